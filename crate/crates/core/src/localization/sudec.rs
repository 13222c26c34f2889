//! Eigenfunction-correlation ratios from weighted eigenprojections.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::ConfigPoint;
use crate::model::{FiniteVolumeOperator, Spectrum};
use crate::Result;

/// Eigenvalues closer than this form one cluster (an eigenprojection
/// with multiplicity).
pub const CLUSTER_TOLERANCE: f64 = 1e-9;

/// The ratios `Z_a(λ)` and `W_a(λ)` at one center.
///
/// With `P` the eigenprojection of the cluster at `λ`, `χ_a` the
/// projection onto `δ_a`, and `T_a` multiplication by `<x-a>^ν`:
/// `Z = ||χ_a P||_HS / ||T_a^{-1} P||_HS` and `W` is the largest value of
/// `||χ_a P φ|| / ||T_a^{-1} P φ||` over the range of `P`. Always
/// `0 <= Z <= W <= 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SudecValues {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub center: ConfigPoint,
    pub z: f64,
    pub w: f64,
    pub nu: f64,
    /// Set when the cluster boundary sits near the tolerance, which makes
    /// the projection ill-defined.
    pub degenerate_cluster: bool,
}

/// Weight `<x - a>^{-ν}` at a box point.
fn inv_weight(x: &ConfigPoint, a: &ConfigPoint, nu: f64) -> f64 {
    let s = x.sup_dist(a);
    (1.0 + s * s).powf(-nu / 2.0)
}

/// Compute `Z` and `W` for the eigenvalue cluster containing eigenvalue
/// index `which`, at each requested center. `ν = (Nd + 1)/2`.
pub fn sudec_values(
    op: &FiniteVolumeOperator,
    which: usize,
    centers: &[ConfigPoint],
) -> Result<Vec<SudecValues>> {
    let spec = op.spectrum(true)?;
    sudec_values_with_spectrum(op, &spec, which, centers)
}

/// Same, reusing a full eigensystem.
pub fn sudec_values_with_spectrum(
    op: &FiniteVolumeOperator,
    spec: &Spectrum,
    which: usize,
    centers: &[ConfigPoint],
) -> Result<Vec<SudecValues>> {
    let vectors = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Contract("eigenvectors required".into()))?;
    let dim = op.dim();
    if which >= dim {
        return Err(Error::Contract(format!(
            "eigenvalue index {which} out of range {dim}"
        )));
    }
    let nu = ((op.rect().n() * op.rect().d()) as f64 + 1.0) / 2.0;
    let lambda = spec.eigenvalues[which];

    // cluster: maximal run of eigenvalues within the tolerance chain
    let mut lo = which;
    while lo > 0 && (spec.eigenvalues[lo] - spec.eigenvalues[lo - 1]).abs() <= CLUSTER_TOLERANCE {
        lo -= 1;
    }
    let mut hi = which;
    while hi + 1 < dim
        && (spec.eigenvalues[hi + 1] - spec.eigenvalues[hi]).abs() <= CLUSTER_TOLERANCE
    {
        hi += 1;
    }
    let mult = hi - lo + 1;
    let degenerate = (lo > 0
        && (spec.eigenvalues[lo] - spec.eigenvalues[lo - 1]).abs() <= 10.0 * CLUSTER_TOLERANCE)
        || (hi + 1 < dim
            && (spec.eigenvalues[hi + 1] - spec.eigenvalues[hi]).abs()
                <= 10.0 * CLUSTER_TOLERANCE);

    let points = op.points();
    let mut out = Vec::with_capacity(centers.len());
    for a in centers {
        // v: amplitudes of the cluster basis at the center site
        let a_idx = op
            .index_of(a)
            .ok_or_else(|| Error::Contract("center must be a box point".into()))?;
        let v: Vec<f64> = (lo..=hi).map(|k| vectors[(a_idx, k)]).collect();

        // B = Ψ^T T_a^{-2} Ψ restricted to the cluster basis
        let mut b: DMatrix<f64> = DMatrix::zeros(mult, mult);
        for x_idx in 0..dim {
            let w2 = {
                let w = inv_weight(&points[x_idx], a, nu);
                w * w
            };
            for i in 0..mult {
                let vi = vectors[(x_idx, lo + i)];
                for j in i..mult {
                    let vj = vectors[(x_idx, lo + j)];
                    b[(i, j)] += w2 * vi * vj;
                }
            }
        }
        for i in 0..mult {
            for j in 0..i {
                b[(i, j)] = b[(j, i)];
            }
        }

        // Z² = ||χ_a P||²_HS / ||T_a^{-1} P||²_HS = |v|² / tr B
        let v_norm_sq: f64 = v.iter().map(|t| t * t).sum();
        let tr_b: f64 = (0..mult).map(|i| b[(i, i)]).sum();
        let z = (v_norm_sq / tr_b).sqrt();

        // W² = max over coefficients c of (v·c)² / (c^T B c) = v^T B^{-1} v
        let w = if mult == 1 {
            (v_norm_sq / b[(0, 0)]).sqrt() as f64
        } else {
            let binv = b.clone().try_inverse().ok_or_else(|| {
                Error::Contract("singular weighted Gram matrix in SUDEC".into())
            })?;
            let vv = nalgebra::DVector::from_vec(v.clone());
            (&vv.transpose() * binv * &vv)[(0, 0)].max(0.0).sqrt()
        };

        out.push(SudecValues {
            eigenvalue: lambda,
            multiplicity: mult,
            center: a.clone(),
            z,
            w,
            nu,
            degenerate_cluster: degenerate,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ParticleRectangle, RealCenter};
    use crate::model::{assemble, sample_disorder, DensitySpec, ModelParams, SiteRegion};

    fn disordered_box(n: usize, l: f64, lambda: f64, seed: u64) -> FiniteVolumeOperator {
        let rect =
            ParticleRectangle::cube(RealCenter::new(n, 1, vec![0.0; n]).unwrap(), l).unwrap();
        let params =
            ModelParams::simple(n, 1, 1.0, 1.0, lambda, DensitySpec::Uniform01).unwrap();
        let region = SiteRegion::covering(&[&rect]).unwrap();
        let sample = sample_disorder(&params, &region, seed, 0);
        assemble(&rect, &sample, &params).unwrap()
    }

    #[test]
    fn rank_one_w_equals_z() {
        let op = disordered_box(1, 10.0, 3.0, 1);
        let centers: Vec<ConfigPoint> = op.points().to_vec();
        for which in [0, 3, 7] {
            for s in sudec_values(&op, which, &centers).unwrap() {
                assert_eq!(s.multiplicity, 1);
                assert!((s.z - s.w).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn ordering_z_le_w_le_one() {
        for seed in 0..5u64 {
            let op = disordered_box(2, 6.0, 8.0, seed);
            let centers: Vec<ConfigPoint> = op.points().iter().step_by(7).cloned().collect();
            for which in [0, op.dim() / 2, op.dim() - 1] {
                for s in sudec_values(&op, which, &centers).unwrap() {
                    assert!(
                        s.z <= s.w + 1e-10 && s.w <= 1.0 + 1e-10,
                        "Z = {}, W = {}",
                        s.z,
                        s.w
                    );
                    assert!(s.z >= 0.0);
                }
            }
        }
    }

    #[test]
    fn nu_matches_dimension_rule() {
        let op = disordered_box(2, 6.0, 1.0, 0);
        let center = op.points()[0].clone();
        let s = sudec_values(&op, 0, &[center]).unwrap();
        // Nd = 2, so nu = 3/2
        assert_eq!(s[0].nu, 1.5);
    }

    #[test]
    fn pair_product_bound_for_same_eigenspace() {
        // |φ(x)| |ψ(y)| <= W_x W_y ||T_x^{-1} φ|| ||T_y^{-1} ψ|| for
        // vectors of one eigenspace
        let op = disordered_box(1, 12.0, 6.0, 3);
        let spec = op.spectrum(true).unwrap();
        let vectors = spec.eigenvectors.as_ref().unwrap();
        let points = op.points().to_vec();
        let nu = 1.0; // Nd = 1 -> (1+1)/2
        for which in [0usize, 5, 11] {
            let phi: Vec<f64> = (0..op.dim()).map(|i| vectors[(i, which)]).collect();
            for (xi, x) in points.iter().enumerate().step_by(5) {
                for (yi, y) in points.iter().enumerate().step_by(5) {
                    let sx = &sudec_values(&op, which, std::slice::from_ref(x)).unwrap()[0];
                    let sy = &sudec_values(&op, which, std::slice::from_ref(y)).unwrap()[0];
                    let tx: f64 = phi
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| {
                            let w = inv_weight(&points[i], x, nu);
                            (w * v) * (w * v)
                        })
                        .sum::<f64>()
                        .sqrt();
                    let ty: f64 = phi
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| {
                            let w = inv_weight(&points[i], y, nu);
                            (w * v) * (w * v)
                        })
                        .sum::<f64>()
                        .sqrt();
                    let lhs = phi[xi].abs() * phi[yi].abs();
                    let rhs = sx.w * sy.w * tx * ty;
                    assert!(
                        lhs <= rhs + 1e-10,
                        "bound fails at ({xi},{yi}): {lhs} vs {rhs}"
                    );
                }
            }
        }
    }
}
