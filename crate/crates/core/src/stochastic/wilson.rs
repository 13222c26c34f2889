//! Wilson score intervals for binomial proportions.

/// Normal quantile for two-sided 95% coverage.
pub const Z95_TWO_SIDED: f64 = 1.959963984540054;
/// Normal quantile for two-sided 99% coverage.
pub const Z99_TWO_SIDED: f64 = 2.5758293035489004;
/// Normal quantile for a one-sided 99% bound.
pub const Z99_ONE_SIDED: f64 = 2.3263478740408408;

/// Wilson score interval for `k` successes out of `n` at quantile `z`.
pub fn wilson_interval(successes: u64, samples: u64, z: f64) -> (f64, f64) {
    assert!(samples > 0, "wilson interval needs samples");
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_brackets_the_point() {
        for &(k, n) in &[(0u64, 100u64), (5, 100), (50, 100), (100, 100)] {
            let p = k as f64 / n as f64;
            let (lo, hi) = wilson_interval(k, n, Z95_TWO_SIDED);
            assert!(0.0 <= lo && lo <= p + 1e-12, "k={k}");
            assert!(p - 1e-12 <= hi && hi <= 1.0, "k={k}");
        }
    }

    #[test]
    fn width_shrinks_like_inverse_sqrt() {
        let (lo1, hi1) = wilson_interval(100, 1000, Z95_TWO_SIDED);
        let (lo2, hi2) = wilson_interval(200, 2000, Z95_TWO_SIDED);
        let ratio = (hi2 - lo2) / (hi1 - lo1);
        let expected = 1.0 / 2.0f64.sqrt();
        assert!(
            (ratio / expected - 1.0).abs() < 0.2,
            "ratio {ratio} vs {expected}"
        );
    }
}
