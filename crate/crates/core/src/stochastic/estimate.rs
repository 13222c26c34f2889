//! Monte Carlo estimation of box-quality probabilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{hausdorff_distance, ParticleRectangle, RealCenter};
use crate::model::{assemble, sample_disorder, ModelParams, SiteRegion, Spectrum};
use crate::resolvent::{classify, quality_pairs, QualityKind, RESONANCE_GUARD};
use crate::stochastic::wilson::{
    wilson_interval, Z95_TWO_SIDED, Z99_ONE_SIDED, Z99_TWO_SIDED,
};
use crate::Result;

/// A binomial point estimate with Wilson confidence bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub point: f64,
    pub lower95: f64,
    pub upper95: f64,
    pub lower99: f64,
    pub upper99: f64,
    /// One-sided 99% upper bound used by the Wegner-family verdicts.
    pub upper99_one_sided: f64,
    pub successes: u64,
    pub samples: u64,
    pub seed: u64,
}

impl ProbEstimate {
    pub fn from_counts(successes: u64, samples: u64, seed: u64) -> Self {
        let (lower95, upper95) = wilson_interval(successes, samples, Z95_TWO_SIDED);
        let (lower99, upper99) = wilson_interval(successes, samples, Z99_TWO_SIDED);
        let (_, upper99_one_sided) = wilson_interval(successes, samples, Z99_ONE_SIDED);
        Self {
            point: successes as f64 / samples as f64,
            lower95,
            upper95,
            lower99,
            upper99,
            upper99_one_sided,
            successes,
            samples,
            seed,
        }
    }

    /// Degenerate estimate for a deterministic event.
    pub fn degenerate(success: bool, samples: u64, seed: u64) -> Self {
        let p = if success { 1.0 } else { 0.0 };
        Self {
            point: p,
            lower95: p,
            upper95: p,
            lower99: p,
            upper99: p,
            upper99_one_sided: p,
            successes: if success { samples } else { 0 },
            samples,
            seed,
        }
    }
}

/// Estimate `P{ box fails the quality predicate at E }` over the
/// disorder ensemble.
pub fn estimate_bad_prob(
    params: &ModelParams,
    rect: &ParticleRectangle,
    e: f64,
    kind: QualityKind,
    n_samples: u64,
    seed: u64,
) -> Result<ProbEstimate> {
    estimate_bad_prob_detailed(params, rect, e, kind, n_samples, seed).map(|(est, _)| est)
}

/// Same as [`estimate_bad_prob`], also returning the per-sample
/// classification reports (a single report when the model is
/// deterministic).
pub fn estimate_bad_prob_detailed(
    params: &ModelParams,
    rect: &ParticleRectangle,
    e: f64,
    kind: QualityKind,
    n_samples: u64,
    seed: u64,
) -> Result<(ProbEstimate, Vec<crate::resolvent::BoxQualityReport>)> {
    if n_samples < 100 {
        return Err(Error::Contract("need at least 100 samples".into()));
    }
    let region = SiteRegion::covering(&[rect])?;
    if params.lambda == 0.0 {
        // no randomness: one classification decides the whole ensemble
        let sample = sample_disorder(params, &region, seed, 0);
        let op = assemble(rect, &sample, params)?;
        let report = classify(&op, e, kind)?;
        let bad = !report.verdict;
        return Ok((
            ProbEstimate::degenerate(bad, n_samples, seed),
            vec![report],
        ));
    }
    let reports: Vec<crate::resolvent::BoxQualityReport> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<crate::resolvent::BoxQualityReport> {
            let sample = sample_disorder(params, &region, seed, i);
            let op = assemble(rect, &sample, params)?;
            classify(&op, e, kind)
        })
        .collect::<Result<_>>()?;
    let bad = reports.iter().filter(|r| !r.verdict).count() as u64;
    Ok((ProbEstimate::from_counts(bad, n_samples, seed), reports))
}

/// Green entry from a full eigensystem.
fn green_from_eigen(spec: &Spectrum, a: usize, b: usize, e: f64) -> f64 {
    let v = spec.eigenvectors.as_ref().expect("eigenvectors required");
    spec.eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| v[(a, k)] * v[(b, k)] / (l - e))
        .sum()
}

/// Whether the box is `(m, E)`-nonregular, evaluated from its
/// eigensystem; energies inside the resonance guard count as nonregular.
fn nonregular_at(
    spec: &Spectrum,
    pairs: &[(usize, usize, f64)],
    e: f64,
    m: f64,
) -> bool {
    if spec.dist(e) <= RESONANCE_GUARD {
        return true;
    }
    pairs.iter().any(|&(a, b, dist)| {
        green_from_eigen(spec, a, b, e).abs() > (-m * dist).exp()
    })
}

/// Uniform grid over an interval plus midpoint refinement around the
/// local minima of `E ↦ dist(σ, E)` for each supplied spectrum.
fn refined_grid(lo: f64, hi: f64, base_points: usize, spectra: &[&Spectrum]) -> Vec<f64> {
    let base_points = base_points.max(2);
    let step = (hi - lo) / (base_points - 1) as f64;
    let mut grid: Vec<f64> = (0..base_points).map(|i| lo + step * i as f64).collect();
    for spec in spectra {
        let dist: Vec<f64> = grid.iter().map(|&e| spec.dist(e)).collect();
        for i in 1..base_points - 1 {
            if dist[i] <= dist[i - 1] && dist[i] <= dist[i + 1] {
                grid.push(grid[i] - step / 2.0);
                grid.push(grid[i] + step / 2.0);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Result of the two-box interval event estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalEventReport {
    pub estimate: ProbEstimate,
    pub interval: (f64, f64),
    pub base_grid_points: usize,
    /// Per-sample event indicators, ordered by sample index.
    #[serde(skip, default)]
    pub hits: Vec<bool>,
    /// The event is evaluated on an energy grid, not the full interval;
    /// this names the approximation in the output.
    pub grid_approximation: &'static str,
}

/// Estimate `P{ ∃E in the grid over I : both boxes are (m,E)-nonregular }`
/// for two boxes sharing one ambient disorder field.
#[allow(clippy::too_many_arguments)]
pub fn two_box_interval_event_prob(
    params: &ModelParams,
    x: &RealCenter,
    y: &RealCenter,
    l: f64,
    m: f64,
    interval: (f64, f64),
    base_grid_points: usize,
    n_samples: u64,
    seed: u64,
) -> Result<IntervalEventReport> {
    let dh = hausdorff_distance(x, y)?;
    if dh < l {
        return Err(Error::InsufficientSeparation { dh, required: l });
    }
    let bx = ParticleRectangle::cube(x.clone(), l)?;
    let by = ParticleRectangle::cube(y.clone(), l)?;
    let region = SiteRegion::covering(&[&bx, &by])?;
    let (lo, hi) = interval;

    let run_sample = |i: u64| -> Result<bool> {
        let sample = sample_disorder(params, &region, seed, i);
        let op_x = assemble(&bx, &sample, params)?;
        let op_y = assemble(&by, &sample, params)?;
        let spec_x = op_x.spectrum(true)?;
        let spec_y = op_y.spectrum(true)?;
        let pts_x = op_x.points();
        let pts_y = op_y.points();
        let pairs_x: Vec<(usize, usize, f64)> = quality_pairs(&op_x, l)
            .into_iter()
            .map(|(a, b)| (a, b, pts_x[a].sup_dist(&pts_x[b])))
            .collect();
        let pairs_y: Vec<(usize, usize, f64)> = quality_pairs(&op_y, l)
            .into_iter()
            .map(|(a, b)| (a, b, pts_y[a].sup_dist(&pts_y[b])))
            .collect();
        let grid = refined_grid(lo, hi, base_grid_points, &[&spec_x, &spec_y]);
        Ok(grid.iter().any(|&e| {
            nonregular_at(&spec_x, &pairs_x, e, m) && nonregular_at(&spec_y, &pairs_y, e, m)
        }))
    };

    let (estimate, hits) = if params.lambda == 0.0 {
        let hit = run_sample(0)?;
        (ProbEstimate::degenerate(hit, n_samples, seed), vec![hit])
    } else {
        let verdicts: Vec<bool> = (0..n_samples)
            .into_par_iter()
            .map(run_sample)
            .collect::<Result<_>>()?;
        let k = verdicts.iter().filter(|&&b| b).count() as u64;
        (ProbEstimate::from_counts(k, n_samples, seed), verdicts)
    };
    Ok(IntervalEventReport {
        estimate,
        interval,
        base_grid_points,
        hits,
        grid_approximation:
            "event evaluated on a uniform grid with midpoint refinement at spectral-distance minima",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DensitySpec;

    #[test]
    fn deterministic_model_gives_degenerate_estimate() {
        let params = ModelParams::simple(1, 1, 1.0, 0.0, 0.0, DensitySpec::Uniform01).unwrap();
        let rect = ParticleRectangle::cube(RealCenter::new(1, 1, vec![0.0]).unwrap(), 8.0)
            .unwrap();
        let est = estimate_bad_prob(
            &params,
            &rect,
            -3.0,
            QualityKind::Suitable { theta: 1.0 },
            200,
            1,
        )
        .unwrap();
        assert!(est.point == 0.0 || est.point == 1.0);
        assert_eq!(est.lower99, est.point);
        assert_eq!(est.upper99, est.point);
    }

    #[test]
    fn estimate_is_worker_count_invariant() {
        let params = ModelParams::simple(1, 1, 1.0, 0.0, 20.0, DensitySpec::Uniform01).unwrap();
        let rect = ParticleRectangle::cube(RealCenter::new(1, 1, vec![0.0]).unwrap(), 12.0)
            .unwrap();
        let kind = QualityKind::Suitable { theta: 2.0 };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate_bad_prob(&params, &rect, 0.0, kind, 120, 77).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.successes, b.successes);
        assert_eq!(a.point, b.point);
    }

    #[test]
    fn interval_event_requires_separation() {
        let params = ModelParams::simple(1, 1, 1.0, 0.0, 1.0, DensitySpec::Uniform01).unwrap();
        let x = RealCenter::new(1, 1, vec![0.0]).unwrap();
        let y = RealCenter::new(1, 1, vec![2.0]).unwrap();
        assert!(two_box_interval_event_prob(
            &params,
            &x,
            &y,
            8.0,
            0.5,
            (0.0, 1.0),
            11,
            100,
            0
        )
        .is_err());
    }

    #[test]
    fn single_point_interval_reduces_to_joint_failure() {
        let params = ModelParams::simple(1, 1, 1.0, 0.0, 15.0, DensitySpec::Uniform01).unwrap();
        let x = RealCenter::new(1, 1, vec![0.0]).unwrap();
        let y = RealCenter::new(1, 1, vec![50.0]).unwrap();
        let e = 1.0;
        let report = two_box_interval_event_prob(
            &params,
            &x,
            &y,
            8.0,
            0.4,
            (e, e),
            2,
            100,
            3,
        )
        .unwrap();
        // direct evaluation of the same joint event
        let bx = ParticleRectangle::cube(x.clone(), 8.0).unwrap();
        let by = ParticleRectangle::cube(y.clone(), 8.0).unwrap();
        let region = SiteRegion::covering(&[&bx, &by]).unwrap();
        let mut hits = 0u64;
        for i in 0..100 {
            let sample = sample_disorder(&params, &region, 3, i);
            let ox = assemble(&bx, &sample, &params).unwrap();
            let oy = assemble(&by, &sample, &params).unwrap();
            let rx = classify(&ox, e, QualityKind::Regular { m: 0.4 }).unwrap();
            let ry = classify(&oy, e, QualityKind::Regular { m: 0.4 }).unwrap();
            if !rx.verdict && !ry.verdict {
                hits += 1;
            }
        }
        assert_eq!(report.estimate.successes, hits);
    }
}
