//! Finite-volume Hamiltonians `H_Λ = χ_Λ(-Δ + λV_ω + U)χ_Λ`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::geometry::{ConfigPoint, ParticleRectangle};
use crate::model::disorder::DisorderSample;
use crate::model::params::ModelParams;
use crate::Result;

/// Default dense-eigensolver dimension cap.
pub const DEFAULT_EIGEN_CAP: usize = 4096;

/// `H` restricted to a rectangle with the Dirichlet (simple) boundary
/// condition: the plain truncation `χ_Λ H χ_Λ`.
///
/// Matrix indices follow the lexicographic lattice-point order. The
/// diagonal is `2nd + λ Σ_i ω(x_i) + U(x)`; off-diagonal entries are
/// exactly `-1` on nearest-neighbor pairs inside the box and `0`
/// elsewhere, so the diagonal stays `2nd` at the boundary.
#[derive(Debug, Clone)]
pub struct FiniteVolumeOperator {
    rect: ParticleRectangle,
    points: Vec<ConfigPoint>,
    index: HashMap<Vec<i64>, usize>,
    matrix: DMatrix<f64>,
}

impl FiniteVolumeOperator {
    pub fn rect(&self) -> &ParticleRectangle {
        &self.rect
    }

    pub fn points(&self) -> &[ConfigPoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn index_of(&self, p: &ConfigPoint) -> Option<usize> {
        self.index.get(p.coords()).copied()
    }

    /// Eigenvalues (ascending), optionally with orthonormal eigenvectors
    /// as matrix columns in the same order.
    pub fn spectrum(&self, want_vectors: bool) -> Result<Spectrum> {
        self.spectrum_capped(want_vectors, DEFAULT_EIGEN_CAP)
    }

    pub fn spectrum_capped(&self, want_vectors: bool, cap: usize) -> Result<Spectrum> {
        let dim = self.dim();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = want_vectors.then(|| {
            let mut v = DMatrix::zeros(dim, dim);
            for (col, &i) in order.iter().enumerate() {
                v.set_column(col, &eig.eigenvectors.column(i));
            }
            v
        });
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        })
    }

    #[cfg(test)]
    pub(crate) fn set_matrix_for_tests(&mut self, m: DMatrix<f64>) {
        assert_eq!(m.nrows(), self.dim());
        assert_eq!(m.ncols(), self.dim());
        self.matrix = m;
    }

    /// Coordinate-format dump `(row, col, value)` of nonzero entries,
    /// row-major, for cross-tool debugging.
    pub fn dump_coordinates(&self) -> String {
        let mut out = String::new();
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let v = self.matrix[(r, c)];
                if v != 0.0 {
                    out.push_str(&format!("{} {} {}\n", r, c, v));
                }
            }
        }
        out
    }
}

/// Sorted eigensystem of a finite-volume operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    /// Distance from the spectrum to an energy.
    pub fn dist(&self, e: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&l| (l - e).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of eigenvalues in a closed interval.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&l| lo <= l && l <= hi)
            .count()
    }

    pub fn eigenvector(&self, k: usize) -> Option<DVector<f64>> {
        self.eigenvectors
            .as_ref()
            .map(|v| v.column(k).clone_owned())
    }
}

/// Assemble `H_Λ` for a rectangle from a disorder sample.
pub fn assemble(
    rect: &ParticleRectangle,
    sample: &DisorderSample,
    params: &ModelParams,
) -> Result<FiniteVolumeOperator> {
    if rect.n() != params.n || rect.d() != params.d {
        return Err(Error::ShapeMismatch(format!(
            "rectangle is {}x{}, params are {}x{}",
            rect.n(),
            rect.d(),
            params.n,
            params.d
        )));
    }
    let points = rect.lattice_points()?;
    let dim = points.len();
    let mut index = HashMap::with_capacity(dim);
    for (i, p) in points.iter().enumerate() {
        index.insert(p.coords().to_vec(), i);
    }
    let nd = params.n * params.d;
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut neighbor = vec![0i64; nd];
    for (i, p) in points.iter().enumerate() {
        let coords = p.coords();
        let mut diag = 2.0 * nd as f64 + params.diagonal_shift + params.interaction_energy(coords);
        for pi in 0..params.n {
            let site = &coords[pi * params.d..(pi + 1) * params.d];
            diag += params.lambda * sample.value(site)?;
        }
        matrix[(i, i)] = diag;
        neighbor.copy_from_slice(coords);
        for c in 0..nd {
            for step in [-1i64, 1] {
                neighbor[c] += step;
                if let Some(&j) = index.get(neighbor.as_slice()) {
                    matrix[(i, j)] = -1.0;
                }
                neighbor[c] -= step;
            }
        }
    }
    Ok(FiniteVolumeOperator {
        rect: rect.clone(),
        points,
        index,
        matrix,
    })
}

/// Restriction of an assembled operator to a sub-rectangle.
///
/// Extracting the rows and columns of the sub-rectangle's points equals a
/// fresh assembly on the sub-rectangle exactly, because the truncation is
/// a plain cutoff.
pub fn restrict(
    op: &FiniteVolumeOperator,
    sub: &ParticleRectangle,
) -> Result<FiniteVolumeOperator> {
    if !sub.lattice_subset_of(op.rect()) {
        return Err(Error::NotNested);
    }
    let points = sub.lattice_points()?;
    let dim = points.len();
    let parent_idx: Vec<usize> = points
        .iter()
        .map(|p| {
            op.index_of(p)
                .ok_or_else(|| Error::Contract("sub point missing from parent".into()))
        })
        .collect::<Result<_>>()?;
    let mut matrix = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            matrix[(r, c)] = op.matrix[(parent_idx[r], parent_idx[c])];
        }
    }
    let mut index = HashMap::with_capacity(dim);
    for (i, p) in points.iter().enumerate() {
        index.insert(p.coords().to_vec(), i);
    }
    Ok(FiniteVolumeOperator {
        rect: sub.clone(),
        points,
        index,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RealCenter;
    use crate::model::disorder::{sample_disorder, SiteRegion};
    use crate::model::params::DensitySpec;

    fn free_params(n: usize, d: usize) -> ModelParams {
        ModelParams::simple(n, d, 1.0, 0.0, 0.0, DensitySpec::Uniform01).unwrap()
    }

    fn region_for(rect: &ParticleRectangle) -> SiteRegion {
        let ranges: Vec<Vec<(i64, i64)>> = (0..rect.n()).map(|i| rect.particle_box(i)).collect();
        SiteRegion::hull(&ranges).unwrap()
    }

    #[test]
    fn free_laplacian_on_three_points() {
        let rect =
            ParticleRectangle::cube(RealCenter::new(1, 1, vec![0.0]).unwrap(), 2.0).unwrap();
        let params = free_params(1, 1);
        let sample = sample_disorder(&params, &region_for(&rect), 0, 0);
        let op = assemble(&rect, &sample, &params).unwrap();
        let m = op.matrix();
        assert_eq!(op.dim(), 3);
        for i in 0..3 {
            assert_eq!(m[(i, i)], 2.0);
        }
        assert_eq!(m[(0, 1)], -1.0);
        assert_eq!(m[(1, 2)], -1.0);
        assert_eq!(m[(0, 2)], 0.0);
    }

    #[test]
    fn matrix_is_exactly_symmetric() {
        let rect = ParticleRectangle::cube(
            RealCenter::new(2, 1, vec![0.5, 3.0]).unwrap(),
            5.0,
        )
        .unwrap();
        let params =
            ModelParams::simple(2, 1, 1.0, 1.0, 2.5, DensitySpec::UniformSym).unwrap();
        let sample = sample_disorder(&params, &region_for(&rect), 42, 7);
        let op = assemble(&rect, &sample, &params).unwrap();
        let m = op.matrix();
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                assert_eq!(m[(r, c)], m[(c, r)]);
            }
        }
    }

    #[test]
    fn dirichlet_spectrum_closed_form() {
        // 1-particle free Laplacian on m points: 2 - 2 cos(k pi / (m+1))
        let m = 9usize;
        let rect =
            ParticleRectangle::cube(RealCenter::new(1, 1, vec![0.0]).unwrap(), (m - 1) as f64)
                .unwrap();
        let params = free_params(1, 1);
        let sample = sample_disorder(&params, &region_for(&rect), 0, 0);
        let op = assemble(&rect, &sample, &params).unwrap();
        assert_eq!(op.dim(), m);
        let spec = op.spectrum(false).unwrap();
        for (k, &ev) in spec.eigenvalues.iter().enumerate() {
            let exact =
                2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (m as f64 + 1.0)).cos();
            assert!((ev - exact).abs() < 1e-10, "k={k}: {ev} vs {exact}");
        }
    }

    #[test]
    fn trace_equals_eigenvalue_sum() {
        let rect = ParticleRectangle::cube(
            RealCenter::new(2, 1, vec![0.0, 1.0]).unwrap(),
            4.0,
        )
        .unwrap();
        let params =
            ModelParams::simple(2, 1, 1.0, 1.0, 3.0, DensitySpec::Uniform01).unwrap();
        let sample = sample_disorder(&params, &region_for(&rect), 5, 0);
        let op = assemble(&rect, &sample, &params).unwrap();
        let trace: f64 = (0..op.dim()).map(|i| op.matrix()[(i, i)]).sum();
        let spec = op.spectrum(false).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        assert!((trace - sum).abs() <= 1e-9 * trace.abs().max(1.0));
    }

    #[test]
    fn eigenvalues_approach_diagonal_at_large_lambda() {
        // Gershgorin: each eigenvalue is within 2nd of a diagonal entry.
        let rect =
            ParticleRectangle::cube(RealCenter::new(1, 1, vec![0.0]).unwrap(), 6.0).unwrap();
        let params =
            ModelParams::simple(1, 1, 1.0, 0.0, 1e6, DensitySpec::Uniform01).unwrap();
        let sample = sample_disorder(&params, &region_for(&rect), 9, 0);
        let op = assemble(&rect, &sample, &params).unwrap();
        let mut diag: Vec<f64> = (0..op.dim()).map(|i| op.matrix()[(i, i)]).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let spec = op.spectrum(false).unwrap();
        let offdiag_radius = 2.0; // 2nd with nd = 1
        for (ev, dv) in spec.eigenvalues.iter().zip(&diag) {
            assert!((ev - dv).abs() <= offdiag_radius);
        }
    }

    #[test]
    fn eigen_residuals_are_small() {
        let rect = ParticleRectangle::cube(
            RealCenter::new(2, 1, vec![0.0, 0.0]).unwrap(),
            6.0,
        )
        .unwrap();
        let params =
            ModelParams::simple(2, 1, 1.0, 1.0, 4.0, DensitySpec::Triangular).unwrap();
        let sample = sample_disorder(&params, &region_for(&rect), 3, 1);
        let op = assemble(&rect, &sample, &params).unwrap();
        let spec = op.spectrum(true).unwrap();
        let vects = spec.eigenvectors.as_ref().unwrap();
        let norm = op.matrix().norm();
        for k in 0..op.dim() {
            let v = vects.column(k);
            let residual = (op.matrix() * v - spec.eigenvalues[k] * v).norm();
            assert!(residual <= 1e-9 * norm, "k={k}: residual {residual}");
        }
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let rect =
            ParticleRectangle::cube(RealCenter::new(1, 1, vec![0.0]).unwrap(), 100.0).unwrap();
        let params = free_params(1, 1);
        let sample = sample_disorder(&params, &region_for(&rect), 0, 0);
        let op = assemble(&rect, &sample, &params).unwrap();
        match op.spectrum_capped(false, 50) {
            Err(Error::DimensionCap { .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn restrict_to_full_box_is_identity() {
        let rect = ParticleRectangle::cube(
            RealCenter::new(2, 1, vec![0.0, 2.0]).unwrap(),
            4.0,
        )
        .unwrap();
        let params =
            ModelParams::simple(2, 1, 1.0, 1.0, 1.0, DensitySpec::Uniform01).unwrap();
        let sample = sample_disorder(&params, &region_for(&rect), 8, 0);
        let op = assemble(&rect, &sample, &params).unwrap();
        let sub = restrict(&op, &rect).unwrap();
        assert_eq!(op.matrix(), sub.matrix());
    }

    #[test]
    fn restrict_equals_fresh_assembly() {
        let rect = ParticleRectangle::cube(
            RealCenter::new(2, 1, vec![0.0, 1.0]).unwrap(),
            6.0,
        )
        .unwrap();
        let params =
            ModelParams::simple(2, 1, 1.0, 0.5, 2.0, DensitySpec::Uniform01).unwrap();
        let sample = sample_disorder(&params, &region_for(&rect), 13, 2);
        let op = assemble(&rect, &sample, &params).unwrap();
        let sub_rect = ParticleRectangle::cube(
            RealCenter::new(2, 1, vec![1.0, 0.0]).unwrap(),
            2.0,
        )
        .unwrap();
        let restricted = restrict(&op, &sub_rect).unwrap();
        let fresh = assemble(&sub_rect, &sample, &params).unwrap();
        assert_eq!(restricted.matrix(), fresh.matrix());
    }

    #[test]
    fn locality_of_disorder_dependence() {
        // changing omega off the projection leaves the matrix unchanged
        let rect = ParticleRectangle::cube(
            RealCenter::new(1, 1, vec![0.0]).unwrap(),
            4.0,
        )
        .unwrap();
        let params =
            ModelParams::simple(1, 1, 1.0, 1.0, 1.0, DensitySpec::Uniform01).unwrap();
        let narrow = region_for(&rect);
        let wide = SiteRegion::new(vec![-50], vec![50]).unwrap();
        let a = assemble(&rect, &sample_disorder(&params, &narrow, 21, 0), &params).unwrap();
        let b = assemble(&rect, &sample_disorder(&params, &wide, 21, 0), &params).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }
}
