//! Finite-volume Green functions `G_Λ(E; a, b) = <δ_a, (H_Λ - E)^{-1} δ_b>`.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::Error;
use crate::model::FiniteVolumeOperator;
use crate::Result;

/// Refuse to invert when the energy is this close to the spectrum.
pub const RESONANCE_GUARD: f64 = 1e-12;

/// Column-wise resolvent solver for one operator at one energy.
pub struct GreenSolver {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    dim: usize,
    spectral_dist: f64,
}

impl GreenSolver {
    /// Factorize `H - E`; errors with the spectral distance when the
    /// energy is within [`RESONANCE_GUARD`] of the spectrum.
    pub fn new(op: &FiniteVolumeOperator, e: f64) -> Result<Self> {
        let spec = op.spectrum(false)?;
        Self::with_spectral_dist(op, e, spec.dist(e))
    }

    /// Same, reusing an already computed spectral distance.
    pub fn with_spectral_dist(
        op: &FiniteVolumeOperator,
        e: f64,
        spectral_dist: f64,
    ) -> Result<Self> {
        if spectral_dist <= RESONANCE_GUARD {
            return Err(Error::Resonant {
                dist: spectral_dist,
                guard: RESONANCE_GUARD,
            });
        }
        let dim = op.dim();
        let shifted = op.matrix() - DMatrix::identity(dim, dim) * e;
        Ok(Self {
            lu: shifted.lu(),
            dim,
            spectral_dist,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spectral_dist(&self) -> f64 {
        self.spectral_dist
    }

    /// The column `G(·, b)`: the solution of `(H - E) g = δ_b`.
    pub fn column(&self, b: usize) -> DVector<f64> {
        let mut rhs = DVector::zeros(self.dim);
        rhs[b] = 1.0;
        self.lu.solve(&rhs).expect("factorized nonsingular shift")
    }
}

/// Green entries for a list of index pairs, one column solve per distinct
/// second index.
pub fn green_entries(
    op: &FiniteVolumeOperator,
    e: f64,
    pairs: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let solver = GreenSolver::new(op, e)?;
    let mut columns: std::collections::HashMap<usize, DVector<f64>> = Default::default();
    Ok(pairs
        .iter()
        .map(|&(a, b)| {
            let col = columns.entry(b).or_insert_with(|| solver.column(b));
            col[a]
        })
        .collect())
}

/// The full Green matrix `(H - E)^{-1}`.
pub fn green_matrix(op: &FiniteVolumeOperator, e: f64) -> Result<DMatrix<f64>> {
    let spec = op.spectrum(false)?;
    green_matrix_with_dist(op, e, spec.dist(e))
}

pub(crate) fn green_matrix_with_dist(
    op: &FiniteVolumeOperator,
    e: f64,
    spectral_dist: f64,
) -> Result<DMatrix<f64>> {
    if spectral_dist <= RESONANCE_GUARD {
        return Err(Error::Resonant {
            dist: spectral_dist,
            guard: RESONANCE_GUARD,
        });
    }
    let dim = op.dim();
    let shifted = op.matrix() - DMatrix::identity(dim, dim) * e;
    shifted
        .try_inverse()
        .ok_or(Error::Resonant {
            dist: spectral_dist,
            guard: RESONANCE_GUARD,
        })
}
