//! Numeric iteration of the scale recursions, in log domain.

use serde::{Deserialize, Serialize};

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// One step of the probability recursion between scales `ℓ` and `L = Yℓ`:
/// `p_L <= floor(L) + 2 (2Y)^{Nd} p_ℓ^{J+1}` in log form, where `floor`
/// is the additive tail of the estimate at scale `L`.
fn recursion_step(log_floor: f64, log_p: f64, log_c: f64, j: u64) -> f64 {
    log_sum_exp(log_floor, log_c + (j + 1) as f64 * log_p)
}

/// Iterates of the polynomial-decay recursion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Msa1Result {
    /// Violated preconditions; the iteration still runs, flagged as
    /// outside the guaranteed regime.
    pub precondition_violations: Vec<String>,
    /// `(L_k, p_k, log p_k)`; continues for [`POST_THRESHOLD_STEPS`]
    /// scales past the threshold so the tail behavior is visible.
    pub sequence: Vec<(f64, f64, f64)>,
    /// First `k` with `p_k <= L_k^{-p}`.
    pub threshold_index: Option<usize>,
    pub diverged: bool,
}

const MAX_ITER: usize = 10_000;

/// Extra iterations recorded after the threshold index.
pub const POST_THRESHOLD_STEPS: usize = 12;

/// Iterate `p_{k+1} = L_{k+1}^{-p}/2 + 2 (2Y)^{Nd} p_k^{J+1}` with
/// `L_k = Y^k L_0`, returning the first `k` with `p_k <= L_k^{-p}`.
pub fn recursion_msa1(
    p0: f64,
    y: f64,
    n_particles: usize,
    d: usize,
    p: f64,
    j: u64,
    l0: f64,
) -> Msa1Result {
    let nf = n_particles as f64;
    let nd = (n_particles * d) as f64;
    let mut violations = Vec::new();
    if y < 4000.0 * j as f64 * nf.powi(n_particles as i32 + 1) {
        violations.push(format!(
            "Y = {y} below 4000*J*N^(N+1) = {}",
            4000.0 * j as f64 * nf.powi(n_particles as i32 + 1)
        ));
    }
    let p0_cap = 0.5 * (2.0 * y).powf(-nd);
    if !(p0 < p0_cap) {
        violations.push(format!("p0 = {p0} not below (2Y)^(-Nd)/2 = {p0_cap}"));
    }
    if !(0.0..=1.0).contains(&p0) {
        violations.push(format!("p0 = {p0} is not a probability"));
    }

    let log_c = 2.0f64.ln() + nd * (2.0 * y).ln();
    let mut log_p = p0.ln();
    let mut sequence = Vec::new();
    let mut threshold_index = None;
    let mut tail = 0usize;
    for k in 0..MAX_ITER {
        let lk = y.powi(k as i32) * l0;
        sequence.push((lk, log_p.exp(), log_p));
        if log_p <= -p * lk.ln() && threshold_index.is_none() {
            threshold_index = Some(k);
        }
        if threshold_index.is_some() {
            tail += 1;
            if tail > POST_THRESHOLD_STEPS {
                break;
            }
        }
        let log_floor = (0.5f64).ln() - p * (lk * y).ln();
        log_p = recursion_step(log_floor, log_p, log_c, j);
        if !lk.is_finite() {
            break;
        }
    }
    Msa1Result {
        precondition_violations: violations,
        diverged: threshold_index.is_none(),
        sequence,
        threshold_index,
    }
}

/// Length and mass schedules of the exponential-decay recursion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Msa2Result {
    pub precondition_violations: Vec<String>,
    /// `(L_k, m_k)` until the length overflows the float range.
    pub sequence: Vec<(f64, f64)>,
    pub min_mass: f64,
    /// `Σ_j L_0^{-κ γ^{j-1}} / 2`, the total mass ever given up.
    pub halfmass_sum: f64,
    /// Whether the sum stays below `m_0 / 2`.
    pub halfmass_condition: bool,
    /// Whether every generated `m_k` stayed above `m_0 / 2`.
    pub mass_stays_above_half: bool,
}

/// Iterate `L_{k+1} = L_k^γ`, `m_k = m_{k-1} - L_{k-1}^{-κ}/2`.
pub fn recursion_msa2(
    l0: f64,
    m0: f64,
    gamma: f64,
    kappa: f64,
    p: f64,
    n_particles: usize,
    d: usize,
) -> Msa2Result {
    let nd = (n_particles * d) as f64;
    let mut violations = Vec::new();
    let gamma_cap = 1.0 + p / (p + 2.0 * nd);
    if !(gamma > 1.0 && gamma < gamma_cap) {
        violations.push(format!(
            "gamma = {gamma} outside (1, 1 + p/(p+2Nd)) = (1, {gamma_cap})"
        ));
    }
    if !(kappa > 0.0 && kappa < (gamma - 1.0).min(1.0)) {
        violations.push(format!(
            "kappa = {kappa} outside (0, min(gamma-1, 1)) = (0, {})",
            (gamma - 1.0).min(1.0)
        ));
    }
    if !(m0 > 0.0) {
        violations.push(format!("m0 = {m0} must be positive"));
    }
    if l0.powf(-kappa) > m0 {
        violations.push(format!(
            "L0^(-kappa) = {} exceeds m0 = {m0}; L0 too small",
            l0.powf(-kappa)
        ));
    }

    // total mass drift, summed until the terms vanish
    let mut halfmass_sum = 0.0;
    let mut exponent = kappa;
    for _ in 0..MAX_ITER {
        let term = 0.5 * l0.powf(-exponent);
        halfmass_sum += term;
        if term < 1e-30 {
            break;
        }
        exponent *= gamma;
    }

    let mut sequence = Vec::new();
    let mut l = l0;
    let mut m = m0;
    let mut min_mass = m0;
    for _ in 0..200 {
        sequence.push((l, m));
        min_mass = min_mass.min(m);
        let next_l = l.powf(gamma);
        if !next_l.is_finite() || next_l > 1e300 {
            break;
        }
        m -= 0.5 * l.powf(-kappa);
        l = next_l;
    }
    Msa2Result {
        precondition_violations: violations,
        min_mass,
        halfmass_condition: halfmass_sum <= m0 / 2.0,
        mass_stays_above_half: sequence.iter().all(|&(_, mk)| mk >= m0 / 2.0),
        sequence,
        halfmass_sum,
    }
}

/// Iterate the subexponential-decay recursion with `J = floor(Y^{ζ0})`,
/// in log domain throughout, returning the first `k` with
/// `p_k <= exp(-L_k^{ζ1})`.
#[allow(clippy::too_many_arguments)]
pub fn recursion_msa3(
    p0: f64,
    y: f64,
    zeta0: f64,
    zeta1: f64,
    n_particles: usize,
    d: usize,
    l0: f64,
) -> Msa1Result {
    let nf = n_particles as f64;
    let nd = (n_particles * d) as f64;
    let mut violations = Vec::new();
    let y_min = (3800.0 * nf.powi(n_particles as i32 + 1)).powf(1.0 / (1.0 - zeta0));
    if y < y_min {
        violations.push(format!(
            "Y = {y} below (3800 N^(N+1))^(1/(1-zeta0)) = {y_min:.3e}"
        ));
    }
    if !(zeta1 < zeta0) {
        violations.push(format!("need zeta1 < zeta0, got {zeta1} >= {zeta0}"));
    }
    let log_c = 2.0f64.ln() + nd * (2.0 * y).ln();
    // p0 <= (2 (2Y)^{Nd})^{-1/(Y^{zeta0}-1)}, compared in logs
    let log_p0_cap = -log_c / (y.powf(zeta0) - 1.0);
    if !(p0.ln() <= log_p0_cap) {
        violations.push(format!(
            "p0 = {p0} above (2(2Y)^Nd)^(-1/(Y^zeta0 - 1)) = {:.6e}",
            log_p0_cap.exp()
        ));
    }

    let j = y.powf(zeta0).floor().max(1.0);
    let mut log_p = p0.ln();
    let mut sequence = Vec::new();
    let mut threshold_index = None;
    let mut tail = 0usize;
    for k in 0..MAX_ITER {
        let lk = y.powi(k as i32) * l0;
        sequence.push((lk, log_p.exp(), log_p));
        if log_p <= -lk.powf(zeta1) && threshold_index.is_none() {
            threshold_index = Some(k);
        }
        if threshold_index.is_some() {
            tail += 1;
            if tail > POST_THRESHOLD_STEPS {
                break;
            }
        }
        let next_l = lk * y;
        let log_floor = if next_l.powf(zeta1).is_finite() {
            (0.5f64).ln() - next_l.powf(zeta1)
        } else {
            f64::NEG_INFINITY
        };
        log_p = log_sum_exp(log_floor, log_c + (j + 1.0) * log_p);
        if !next_l.is_finite() {
            break;
        }
    }
    Msa1Result {
        precondition_violations: violations,
        diverged: threshold_index.is_none(),
        sequence,
        threshold_index,
    }
}
