//! Tensor decomposition of partially interactive boxes and the quality
//! transfer from factors to the product.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{classify_interactivity, Interactivity, ParticleRectangle};
use crate::model::{assemble, DisorderSample, FiniteVolumeOperator, ModelParams, Spectrum};
use crate::resolvent::classify::{classify_with_spectrum, BoxQualityReport, QualityKind};
use crate::resolvent::green::{green_matrix_with_dist, RESONANCE_GUARD};
use crate::Result;

/// A PI box factored along a particle partition, with both factor
/// operators assembled against the shared disorder field.
pub struct PiSplit {
    pub j: Vec<usize>,
    pub jc: Vec<usize>,
    pub left: FiniteVolumeOperator,
    pub right: FiniteVolumeOperator,
}

/// Split a cubic PI box along a witness partition. When `witness` is
/// `None` the partition is taken from [`classify_interactivity`]; a fully
/// interactive box is an error.
pub fn pi_split(
    rect: &ParticleRectangle,
    witness: Option<Vec<usize>>,
    sample: &DisorderSample,
    params: &ModelParams,
) -> Result<PiSplit> {
    let j = match witness {
        Some(j) => j,
        None => match classify_interactivity(rect, params.r0)? {
            Interactivity::Pi { witness } => witness,
            Interactivity::Fi => return Err(Error::NotPartiallyInteractive),
        },
    };
    if j.is_empty() || j.len() >= rect.n() {
        return Err(Error::Contract(
            "witness must be a nonempty proper particle subset".into(),
        ));
    }
    let jc: Vec<usize> = (0..rect.n()).filter(|i| !j.contains(i)).collect();
    let left = assemble(&rect.select(&j), sample, &params.with_n(j.len()))?;
    let right = assemble(&rect.select(&jc), sample, &params.with_n(jc.len()))?;
    Ok(PiSplit { j, jc, left, right })
}

impl PiSplit {
    /// The multiset sum `σ(H_J) + σ(H_{J^c})`, sorted ascending; equals
    /// the spectrum of the product box when the partition is valid.
    pub fn kronecker_spectrum(&self) -> Result<Vec<f64>> {
        let l = self.left.spectrum(false)?;
        let r = self.right.spectrum(false)?;
        let mut sums = Vec::with_capacity(l.eigenvalues.len() * r.eigenvalues.len());
        for &a in &l.eigenvalues {
            for &b in &r.eigenvalues {
                sums.push(a + b);
            }
        }
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(sums)
    }
}

/// Which quality predicate is transferred from the factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PiMode {
    Suitable { theta: f64 },
    Regular { m: f64 },
    Ses { zeta: f64, zeta_prime: f64 },
}

impl PiMode {
    fn factor_kind(&self) -> QualityKind {
        match *self {
            PiMode::Suitable { theta } => QualityKind::Suitable { theta },
            PiMode::Regular { m } => QualityKind::Regular { m },
            PiMode::Ses { zeta, .. } => QualityKind::Ses { zeta },
        }
    }

    /// Quality claimed for the full box when every factor check passes.
    fn conclusion_kind(&self, rect: &ParticleRectangle) -> QualityKind {
        let ell = rect.cube_side().expect("PI boxes are cubes");
        let nd = (rect.n() * rect.d()) as f64;
        match *self {
            PiMode::Suitable { theta } => QualityKind::Suitable { theta: theta / 2.0 },
            PiMode::Regular { m } => QualityKind::Regular {
                m: m - 100.0 * nd * ell.ln() / ell,
            },
            PiMode::Ses { zeta_prime, .. } => QualityKind::Ses { zeta: zeta_prime },
        }
    }
}

/// Report of one factor-to-product transfer check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiTransferReport {
    pub partition: Vec<usize>,
    pub energy: f64,
    /// Factor quality holds at every shifted energy.
    pub hypotheses_hold: bool,
    pub failed_shifts: usize,
    pub checked_shifts: usize,
    /// Conclusion quality of the full box, verified independently.
    pub conclusion: BoxQualityReport,
    /// Max over pairs of `|G_full| - Σ_λ |G_factor(E-λ)|` for both factor
    /// orders; nonpositive up to slack when the tensor bound holds.
    pub bound_excess_left: f64,
    pub bound_excess_right: f64,
}

/// Verify the factor hypotheses and the product conclusion on one PI box,
/// together with the tensor Green-function bound.
pub fn pi_transfer_check(
    rect: &ParticleRectangle,
    witness: Option<Vec<usize>>,
    sample: &DisorderSample,
    params: &ModelParams,
    e: f64,
    mode: PiMode,
) -> Result<PiTransferReport> {
    let split = pi_split(rect, witness, sample, params)?;
    let full = assemble(rect, sample, params)?;
    let full_spec = full.spectrum(false)?;
    if full_spec.dist(e) <= RESONANCE_GUARD {
        return Err(Error::Resonant {
            dist: full_spec.dist(e),
            guard: RESONANCE_GUARD,
        });
    }

    let left_spec = split.left.spectrum(false)?;
    let right_spec = split.right.spectrum(false)?;

    // hypotheses: left factor suitable at E - mu for mu in sigma_right,
    // right factor at E - lambda for lambda in sigma_left
    let kind = mode.factor_kind();
    let mut failed = 0usize;
    let mut checked = 0usize;
    for &mu in &right_spec.eigenvalues {
        let r = classify_with_spectrum(&split.left, &left_spec, e - mu, kind)?;
        checked += 1;
        if !r.verdict {
            failed += 1;
        }
    }
    for &lambda in &left_spec.eigenvalues {
        let r = classify_with_spectrum(&split.right, &right_spec, e - lambda, kind)?;
        checked += 1;
        if !r.verdict {
            failed += 1;
        }
    }

    let conclusion = classify_with_spectrum(&full, &full_spec, e, mode.conclusion_kind(rect))?;

    let (excess_left, excess_right) =
        tensor_bound_excess(&split, &full, &full_spec, &left_spec, &right_spec, e)?;

    Ok(PiTransferReport {
        partition: split.j.clone(),
        energy: e,
        hypotheses_hold: failed == 0,
        failed_shifts: failed,
        checked_shifts: checked,
        conclusion,
        bound_excess_left: excess_left,
        bound_excess_right: excess_right,
    })
}

/// Max violation of
/// `|G_full(E;a,b)| <= Σ_{λ in σ_J} |G_right(E-λ; a_{J^c}, b_{J^c})|`
/// (left excess) and of the mirrored bound (right excess).
fn tensor_bound_excess(
    split: &PiSplit,
    full: &FiniteVolumeOperator,
    full_spec: &Spectrum,
    left_spec: &Spectrum,
    right_spec: &Spectrum,
    e: f64,
) -> Result<(f64, f64)> {
    let g_full = green_matrix_with_dist(full, e, full_spec.dist(e))?;

    // one Green matrix of the opposite factor per factor eigenvalue
    let right_greens: Vec<nalgebra::DMatrix<f64>> = left_spec
        .eigenvalues
        .iter()
        .map(|&lambda| {
            green_matrix_with_dist(&split.right, e - lambda, right_spec.dist(e - lambda))
        })
        .collect::<Result<_>>()?;
    let left_greens: Vec<nalgebra::DMatrix<f64>> = right_spec
        .eigenvalues
        .iter()
        .map(|&mu| green_matrix_with_dist(&split.left, e - mu, left_spec.dist(e - mu)))
        .collect::<Result<_>>()?;

    // factor indices of every full-box point
    let pts = full.points();
    let left_idx: Vec<usize> = pts
        .iter()
        .map(|p| {
            split
                .left
                .index_of(&p.select(&split.j))
                .ok_or_else(|| Error::Contract("factor index missing".into()))
        })
        .collect::<Result<_>>()?;
    let right_idx: Vec<usize> = pts
        .iter()
        .map(|p| {
            split
                .right
                .index_of(&p.select(&split.jc))
                .ok_or_else(|| Error::Contract("factor index missing".into()))
        })
        .collect::<Result<_>>()?;

    let mut excess_left = f64::NEG_INFINITY;
    let mut excess_right = f64::NEG_INFINITY;
    for a in 0..pts.len() {
        for b in 0..pts.len() {
            let g = g_full[(a, b)].abs();
            let rhs_left: f64 = right_greens
                .iter()
                .map(|gr| gr[(right_idx[a], right_idx[b])].abs())
                .sum();
            let rhs_right: f64 = left_greens
                .iter()
                .map(|gl| gl[(left_idx[a], left_idx[b])].abs())
                .sum();
            excess_left = excess_left.max(g - rhs_left);
            excess_right = excess_right.max(g - rhs_right);
        }
    }
    Ok((excess_left, excess_right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RealCenter;
    use crate::model::{sample_disorder, DensitySpec, ModelParams, SiteRegion};

    fn setup(
        centers: Vec<f64>,
        n: usize,
        l: f64,
        lambda: f64,
        seed: u64,
    ) -> (ParticleRectangle, DisorderSample, ModelParams) {
        let rect =
            ParticleRectangle::cube(RealCenter::new(n, 1, centers).unwrap(), l).unwrap();
        let params = ModelParams::simple(n, 1, 1.0, 1.0, lambda, DensitySpec::Uniform01).unwrap();
        let ranges: Vec<Vec<(i64, i64)>> = (0..n).map(|i| rect.particle_box(i)).collect();
        let region = SiteRegion::hull(&ranges).unwrap();
        let sample = sample_disorder(&params, &region, seed, 0);
        (rect, sample, params)
    }

    #[test]
    fn kronecker_spectrum_matches_full() {
        let (rect, sample, params) = setup(vec![0.0, 20.0], 2, 4.0, 3.0, 9);
        let split = pi_split(&rect, None, &sample, &params).unwrap();
        let tensor = split.kronecker_spectrum().unwrap();
        let full = assemble(&rect, &sample, &params).unwrap();
        let direct = full.spectrum(false).unwrap().eigenvalues;
        assert_eq!(tensor.len(), direct.len());
        for (a, b) in tensor.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn fi_box_is_rejected() {
        let (rect, sample, params) = setup(vec![0.0, 1.0], 2, 4.0, 1.0, 0);
        assert!(matches!(
            pi_split(&rect, None, &sample, &params),
            Err(Error::NotPartiallyInteractive)
        ));
    }

    #[test]
    fn tensor_bound_holds_in_a_gap() {
        let (rect, sample, params) = setup(vec![0.0, 30.0], 2, 4.0, 0.0, 0);
        // free clusters: spectrum is sums of two Dirichlet branches in
        // [0,4]+[0,4]; E = -1 lies below everything
        let report =
            pi_transfer_check(&rect, None, &sample, &params, -1.0, PiMode::Suitable {
                theta: 2.0,
            })
            .unwrap();
        assert!(report.bound_excess_left <= 1e-8);
        assert!(report.bound_excess_right <= 1e-8);
    }

    #[test]
    fn regular_mode_target_mass_bookkeeping() {
        let (rect, sample, params) = setup(vec![0.0, 30.0], 2, 6.0, 0.0, 0);
        let m = 1.0;
        let report = pi_transfer_check(&rect, None, &sample, &params, -2.0, PiMode::Regular {
            m,
        })
        .unwrap();
        let ell = 6.0f64;
        let expected = m - 100.0 * 2.0 * ell.ln() / ell;
        match report.conclusion.kind {
            QualityKind::Regular { m: target } => assert!((target - expected).abs() < 1e-12),
            other => panic!("unexpected kind {other:?}"),
        }
    }
}
