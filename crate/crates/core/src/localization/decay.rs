//! Per-eigenvector decay profiles in Hausdorff distance from the
//! localization center.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{hausdorff_distance, ConfigPoint};
use crate::model::{FiniteVolumeOperator, Spectrum};
use crate::Result;

/// Amplitudes below this are dropped from profiles.
const AMPLITUDE_FLOOR: f64 = 1e-30;

/// Decay profile of one eigenvector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayProfile {
    pub eigenvalue: f64,
    /// Site of the largest amplitude (lowest lexicographic tie-break).
    pub center: ConfigPoint,
    /// `(d_H(x, center), ln|ψ(x)|)` for every box point with amplitude
    /// above the floor.
    pub samples: Vec<(f64, f64)>,
    /// Decay rate: minus the least-squares slope of `ln|ψ|` against
    /// `d_H` over samples with `d_H >= 2`; positive means decay.
    pub slope: f64,
    pub intercept: f64,
    /// `Σ_x |ψ(x)|²`.
    pub norm_sq: f64,
}

/// Profiles for every eigenvector of the operator.
pub fn decay_profiles(op: &FiniteVolumeOperator) -> Result<Vec<DecayProfile>> {
    let spec = op.spectrum(true)?;
    decay_profiles_with_spectrum(op, &spec)
}

/// Same, reusing a full eigensystem.
pub fn decay_profiles_with_spectrum(
    op: &FiniteVolumeOperator,
    spec: &Spectrum,
) -> Result<Vec<DecayProfile>> {
    let vectors = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Contract("eigenvectors required".into()))?;
    let points = op.points();
    let mut out = Vec::with_capacity(spec.eigenvalues.len());
    for (k, &eigenvalue) in spec.eigenvalues.iter().enumerate() {
        let column = vectors.column(k);
        // strict maximum scan keeps the first (lexicographically lowest)
        // argmax site
        let mut center_idx = 0usize;
        for (i, &v) in column.iter().enumerate() {
            if v.abs() > column[center_idx].abs() {
                center_idx = i;
            }
        }
        let center = points[center_idx].clone();
        let center_real = center.to_real();
        let mut samples = Vec::new();
        let mut norm_sq = 0.0;
        for (i, &v) in column.iter().enumerate() {
            norm_sq += v * v;
            if v.abs() > AMPLITUDE_FLOOR {
                let dh = hausdorff_distance(&points[i].to_real(), &center_real)?;
                samples.push((dh, v.abs().ln()));
            }
        }
        let (slope, intercept) = fit_decay(&samples);
        out.push(DecayProfile {
            eigenvalue,
            center,
            samples,
            slope,
            intercept,
            norm_sq,
        });
    }
    Ok(out)
}

/// Least squares of `ln|ψ|` on `d_H` over `d_H >= 2`; returns
/// `(-slope, intercept)`, falling back to zero slope when the design is
/// degenerate.
fn fit_decay(samples: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(d, _)| d >= 2.0)
        .collect();
    if pts.len() < 2 {
        return (0.0, samples.first().map(|&(_, y)| y).unwrap_or(0.0));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (-slope, intercept)
}
