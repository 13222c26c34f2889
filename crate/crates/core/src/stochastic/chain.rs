//! The exponent chain shared by the scale recursions and its validator.

use serde::{Deserialize, Serialize};

/// Exponent tuple `(ζ, ζ₂, ζ₁, β, ζ₀, τ, γ, κ, p, s, θ)` with the
/// optional free slot `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTuple {
    pub zeta: f64,
    pub zeta2: f64,
    pub zeta1: f64,
    pub beta: f64,
    pub zeta0: f64,
    pub tau: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub p: f64,
    pub s: f64,
    pub theta: f64,
    /// Exponent between `ζ₀` and `τ`; its role is underdetermined, so the
    /// validator treats it as a free slot and only brackets it when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

/// One violated constraint, as the inequality that failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainViolation {
    pub constraint: String,
}

fn check(violations: &mut Vec<ChainViolation>, ok: bool, text: &str) {
    if !ok {
        violations.push(ChainViolation {
            constraint: text.to_string(),
        });
    }
}

/// Every violated inequality of the exponent chain, in a fixed order.
pub fn validate_exponent_chain(
    t: &ExponentTuple,
    n_particles: usize,
    d: usize,
) -> Vec<ChainViolation> {
    let nd = (n_particles * d) as f64;
    let mut v = Vec::new();
    check(&mut v, t.zeta > 0.0, "0 < zeta");
    check(&mut v, t.zeta < t.zeta2, "zeta < zeta2");
    check(&mut v, t.gamma > 1.0, "zeta2 < gamma*zeta2 (gamma > 1)");
    check(&mut v, t.gamma * t.zeta2 < t.zeta1, "gamma*zeta2 < zeta1");
    check(&mut v, t.gamma * t.zeta1 < t.beta, "gamma*zeta1 < beta");
    check(&mut v, t.beta < t.zeta0, "beta < zeta0");
    match t.r {
        Some(r) => {
            check(&mut v, t.zeta0 < r, "zeta0 < r");
            check(&mut v, r < t.tau, "r < tau");
        }
        None => check(&mut v, t.zeta0 < t.tau, "zeta0 < tau (free slot r unset)"),
    }
    check(&mut v, t.tau < 1.0, "tau < 1");
    check(&mut v, t.zeta < t.tau, "zeta < tau");
    check(
        &mut v,
        t.zeta * t.gamma * t.gamma < t.zeta2,
        "zeta*gamma^2 < zeta2",
    );
    let kappa_cap = (t.gamma - 1.0)
        .min(t.gamma * (1.0 - t.beta))
        .min(1.0);
    check(
        &mut v,
        t.kappa > 0.0 && t.kappa < kappa_cap,
        "0 < kappa < min(gamma-1, gamma*(1-beta), 1)",
    );
    check(&mut v, t.p > 0.0, "0 < p");
    check(&mut v, t.p + nd < t.s, "p + N*d < s");
    check(&mut v, t.s + 2.0 * nd - 2.0 < t.theta, "s + 2*N*d - 2 < theta");
    check(
        &mut v,
        t.gamma < 1.0 + t.p / (t.p + 2.0 * nd),
        "gamma < 1 + p/(p + 2*N*d)",
    );
    v
}

/// How the length scales grow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScaleMode {
    /// `L_{k+1} = Y L_k`.
    Multiplicative { y: f64 },
    /// `L_{k+1} = L_k^gamma`.
    Power,
}

/// A validated scale schedule: growth mode, base length, exponents, and
/// the derived length/mass sequences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub mode: ScaleMode,
    pub l0: f64,
    pub exponents: ExponentTuple,
    pub lengths: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl ScaleSchedule {
    /// Build a schedule of `count` scales; mass sequence only for the
    /// power mode, starting from `m0`.
    pub fn new(
        mode: ScaleMode,
        l0: f64,
        exponents: ExponentTuple,
        count: usize,
        m0: Option<f64>,
    ) -> Self {
        let mut lengths = Vec::with_capacity(count);
        let mut l = l0;
        for _ in 0..count {
            lengths.push(l);
            l = match mode {
                ScaleMode::Multiplicative { y } => l * y,
                ScaleMode::Power => l.powf(exponents.gamma),
            };
            if !l.is_finite() || l > 1e300 {
                break;
            }
        }
        let masses = m0.map(|m0| {
            let mut masses = Vec::with_capacity(lengths.len());
            let mut m = m0;
            for &lk in &lengths {
                masses.push(m);
                m -= 0.5 * lk.powf(-exponents.kappa);
            }
            masses
        });
        Self {
            mode,
            l0,
            exponents,
            lengths,
            masses,
        }
    }

    pub fn validate(&self, n_particles: usize, d: usize) -> Vec<ChainViolation> {
        validate_exponent_chain(&self.exponents, n_particles, d)
    }
}
