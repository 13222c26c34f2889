//! The eigenfunction-correlator kernel and its time-evolution cross-check.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{FiniteVolumeOperator, Spectrum};
use crate::Result;

/// Correlator kernel over an energy window.
///
/// `Q_I(x,y) = Σ_{E_n in I} |ψ_n(x)| |ψ_n(y)|` dominates the modulus of
/// every time-evolved amplitude `<δ_x, χ_I e^{-itH} δ_y>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub interval: (f64, f64),
    /// Pair indices into the operator's point list.
    pub pairs: Vec<(usize, usize)>,
    pub q: Vec<f64>,
    /// `max_t |<δ_x, χ_I e^{-itH} δ_y>|` over the sampled times.
    pub amplitude_max: Vec<f64>,
    pub times: Vec<f64>,
}

/// Evaluate the kernel and the time-sampled amplitudes on a pair set.
pub fn kernel_estimate(
    op: &FiniteVolumeOperator,
    interval: (f64, f64),
    pairs: &[(usize, usize)],
    times: &[f64],
) -> Result<KernelEstimate> {
    let spec = op.spectrum(true)?;
    kernel_estimate_with_spectrum(&spec, interval, pairs, times)
}

/// Same, reusing a full eigensystem.
pub fn kernel_estimate_with_spectrum(
    spec: &Spectrum,
    interval: (f64, f64),
    pairs: &[(usize, usize)],
    times: &[f64],
) -> Result<KernelEstimate> {
    let vectors = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Contract("eigenvectors required".into()))?;
    let (lo, hi) = interval;
    let in_window: Vec<usize> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &e)| lo <= e && e <= hi)
        .map(|(k, _)| k)
        .collect();

    let mut q = Vec::with_capacity(pairs.len());
    let mut amplitude_max = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let mut q_ab = 0.0;
        for &k in &in_window {
            q_ab += vectors[(a, k)].abs() * vectors[(b, k)].abs();
        }
        q.push(q_ab);
        let mut best = 0.0f64;
        for &t in times {
            // spectral synthesis of <δ_a, χ_I e^{-itH} δ_b>
            let mut re = 0.0;
            let mut im = 0.0;
            for &k in &in_window {
                let w = vectors[(a, k)] * vectors[(b, k)];
                let phase = -t * spec.eigenvalues[k];
                re += w * phase.cos();
                im += w * phase.sin();
            }
            best = best.max((re * re + im * im).sqrt());
        }
        amplitude_max.push(best);
    }
    Ok(KernelEstimate {
        interval,
        pairs: pairs.to_vec(),
        q,
        amplitude_max,
        times: times.to_vec(),
    })
}

/// Default time samples `0, 0.1, ..., 100`.
pub fn default_times() -> Vec<f64> {
    (0..=1000).map(|i| i as f64 * 0.1).collect()
}
