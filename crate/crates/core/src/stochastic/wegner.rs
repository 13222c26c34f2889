//! Monte Carlo verification of the Wegner-family bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::ParticleRectangle;
use crate::model::{assemble, sample_disorder, ModelParams, SiteRegion};
use crate::stochastic::estimate::ProbEstimate;
use crate::stochastic::wilson::Z99_ONE_SIDED;
use crate::Result;

/// Empirical mean of `tr χ_I(H_Λ)` against the volume bound
/// `n ||ρ^{(λ)}||_inf |I| L^{nd}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WegnerTraceReport {
    pub interval: (f64, f64),
    pub empirical_mean: f64,
    pub sample_std: f64,
    /// One-sided 99% upper confidence bound for the mean
    /// (normal approximation; the trace is a bounded count, not a
    /// proportion, so the Wilson bound does not apply).
    pub upper99: f64,
    pub bound: f64,
    pub verdict: bool,
    pub samples: u64,
    pub seed: u64,
    /// Per-sample traces, ordered by sample index (not serialized into
    /// summaries; records carry them).
    #[serde(skip, default)]
    pub traces: Vec<f64>,
}

/// Estimate the expected eigenvalue count in an interval and compare it
/// to the volume bound. The disorder strength is folded into the
/// effective density, so the bound uses `||ρ||_inf / λ`.
pub fn wegner_trace_check(
    params: &ModelParams,
    rect: &ParticleRectangle,
    interval: (f64, f64),
    n_samples: u64,
    seed: u64,
) -> Result<WegnerTraceReport> {
    let (lo, hi) = interval;
    if !(lo <= hi) {
        return Err(Error::Contract("empty interval".into()));
    }
    if n_samples == 0 {
        return Err(Error::Contract("need samples".into()));
    }
    let region = SiteRegion::covering(&[rect])?;
    let traces: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let sample = sample_disorder(params, &region, seed, i);
            let op = assemble(rect, &sample, params)?;
            let spec = op.spectrum(false)?;
            Ok(spec.count_in(lo, hi) as f64)
        })
        .collect::<Result<_>>()?;
    let n = n_samples as f64;
    let mean = traces.iter().sum::<f64>() / n;
    let kept_traces = traces.clone();
    let var = if n_samples > 1 {
        traces.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    let upper99 = mean + Z99_ONE_SIDED * std / n.sqrt();
    let nd = (params.n * params.d) as u32;
    let bound = params.n as f64
        * params.effective_density_sup()
        * (hi - lo)
        * rect.max_side().powi(nd as i32);
    Ok(WegnerTraceReport {
        interval,
        empirical_mean: mean,
        sample_std: std,
        upper99,
        bound,
        verdict: upper99 <= bound,
        samples: n_samples,
        seed,
        traces: kept_traces,
    })
}

/// A probability estimate compared against a closed-form bound at the
/// one-sided 99% Wilson level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundedProbReport {
    pub estimate: ProbEstimate,
    pub bound: f64,
    pub verdict: bool,
    /// Per-sample event indicators, ordered by sample index.
    #[serde(skip, default)]
    pub hits: Vec<bool>,
}

fn bounded_event_prob<F>(
    lambda_zero: bool,
    n_samples: u64,
    seed: u64,
    bound: f64,
    event: F,
) -> Result<BoundedProbReport>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let (estimate, hits) = if lambda_zero {
        let hit = event(0)?;
        (ProbEstimate::degenerate(hit, n_samples, seed), vec![hit])
    } else {
        let hits: Vec<bool> = (0..n_samples)
            .into_par_iter()
            .map(&event)
            .collect::<Result<_>>()?;
        let k = hits.iter().filter(|&&b| b).count() as u64;
        (ProbEstimate::from_counts(k, n_samples, seed), hits)
    };
    Ok(BoundedProbReport {
        estimate,
        bound,
        verdict: estimate.upper99_one_sided <= bound,
        hits,
    })
}

/// `P{ dist(σ(H_Λ), E) <= ε }` against `2 n ||ρ^{(λ)}||_inf ε L^{nd}`.
pub fn resolvent_norm_prob(
    params: &ModelParams,
    rect: &ParticleRectangle,
    e: f64,
    eps: f64,
    n_samples: u64,
    seed: u64,
) -> Result<BoundedProbReport> {
    if eps < 0.0 {
        return Err(Error::Contract("epsilon must be nonnegative".into()));
    }
    let region = SiteRegion::covering(&[rect])?;
    let nd = (params.n * params.d) as i32;
    let bound =
        2.0 * params.n as f64 * params.effective_density_sup() * eps * rect.max_side().powi(nd);
    bounded_event_prob(params.lambda == 0.0, n_samples, seed, bound, |i| {
        let sample = sample_disorder(params, &region, seed, i);
        let op = assemble(rect, &sample, params)?;
        let spec = op.spectrum(false)?;
        Ok(spec.dist(e) <= eps)
    })
}

/// `P{ dist(σ(H_Λ1), σ(H_Λ2)) <= ε }` for partially separated rectangles
/// sharing one ambient field, against `2 n ||ρ^{(λ)}||_inf ε L^{2nd}`.
pub fn two_box_spectral_distance_prob(
    params: &ModelParams,
    rect1: &ParticleRectangle,
    rect2: &ParticleRectangle,
    eps: f64,
    n_samples: u64,
    seed: u64,
) -> Result<BoundedProbReport> {
    if !rect1.partially_separated(rect2) {
        return Err(Error::NotPartiallySeparated);
    }
    let region = SiteRegion::covering(&[rect1, rect2])?;
    let l = rect1.max_side().max(rect2.max_side());
    let nd = (params.n * params.d) as i32;
    let bound = 2.0 * params.n as f64 * params.effective_density_sup() * eps * l.powi(2 * nd);
    bounded_event_prob(params.lambda == 0.0, n_samples, seed, bound, |i| {
        let sample = sample_disorder(params, &region, seed, i);
        let op1 = assemble(rect1, &sample, params)?;
        let op2 = assemble(rect2, &sample, params)?;
        let s1 = op1.spectrum(false)?;
        let s2 = op2.spectrum(false)?;
        let mut min_dist = f64::INFINITY;
        for &a in &s1.eigenvalues {
            min_dist = min_dist.min(s2.dist(a));
        }
        Ok(min_dist <= eps)
    })
}
