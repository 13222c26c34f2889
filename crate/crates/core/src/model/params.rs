//! Model parameters: dimensions, interaction, disorder strength, density.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Single-site disorder distributions. All have bounded density with
/// compact support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensitySpec {
    /// Uniform on `[0, 1]`.
    #[default]
    Uniform01,
    /// Uniform on `[-1, 1]`.
    UniformSym,
    /// Symmetric triangular on `[-1, 1]` with peak at 0.
    Triangular,
}

impl DensitySpec {
    /// `||rho||_inf` of the density.
    pub fn sup_density(&self) -> f64 {
        match self {
            DensitySpec::Uniform01 => 1.0,
            DensitySpec::UniformSym => 0.5,
            DensitySpec::Triangular => 1.0,
        }
    }

    /// Support interval.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DensitySpec::Uniform01 => (0.0, 1.0),
            DensitySpec::UniformSym | DensitySpec::Triangular => (-1.0, 1.0),
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            DensitySpec::Uniform01 => t.clamp(0.0, 1.0),
            DensitySpec::UniformSym => ((t + 1.0) / 2.0).clamp(0.0, 1.0),
            DensitySpec::Triangular => {
                if t <= -1.0 {
                    0.0
                } else if t <= 0.0 {
                    (t + 1.0) * (t + 1.0) / 2.0
                } else if t <= 1.0 {
                    1.0 - (1.0 - t) * (1.0 - t) / 2.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Inverse CDF, mapping `u in [0,1)` to a draw.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DensitySpec::Uniform01 => u,
            DensitySpec::UniformSym => 2.0 * u - 1.0,
            DensitySpec::Triangular => {
                if u < 0.5 {
                    (2.0 * u).sqrt() - 1.0
                } else {
                    1.0 - (2.0 * (1.0 - u)).sqrt()
                }
            }
        }
    }
}

/// Finite-range even two-body interaction `Ũ`.
///
/// The default is `Ũ(y) = u0 · 1{||y||_inf <= r0}`; an explicit table of
/// `(offset, value)` pairs overrides it. `Ũ(y) = 0` beyond `r0` and
/// `Ũ(y) = Ũ(-y)` always.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(Vec<i64>, f64)>>,
}

impl Default for Interaction {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            table: None,
        }
    }
}

/// Parameters of the n-particle Anderson model `-Δ + λ V_ω + U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub d: usize,
    /// Interaction range; `Ũ` vanishes beyond it.
    pub r0: f64,
    pub interaction: Interaction,
    /// Disorder strength `λ >= 0`.
    pub lambda: f64,
    pub rho: DensitySpec,
    /// Constant added to every diagonal entry. The kinetic term keeps the
    /// graph-Laplacian convention (diagonal `2nd`); setting `-2nd` here
    /// recovers the band-centered convention.
    #[serde(default)]
    pub diagonal_shift: f64,
}

impl ModelParams {
    pub fn new(
        n: usize,
        d: usize,
        r0: f64,
        interaction: Interaction,
        lambda: f64,
        rho: DensitySpec,
    ) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Contract("need n >= 1 and d >= 1".into()));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Contract("lambda must be >= 0".into()));
        }
        if let Some(table) = &interaction.table {
            for (y, v) in table {
                if y.len() != d {
                    return Err(Error::InvalidInteraction(format!(
                        "offset {:?} has wrong dimension",
                        y
                    )));
                }
                if y.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64 > r0 {
                    return Err(Error::InvalidInteraction(format!(
                        "offset {:?} lies beyond the range r0 = {}",
                        y, r0
                    )));
                }
                let neg: Vec<i64> = y.iter().map(|c| -c).collect();
                let mirrored = table.iter().find(|(z, _)| *z == neg);
                match mirrored {
                    Some((_, w)) if w == v => {}
                    _ => {
                        return Err(Error::InvalidInteraction(format!(
                            "table is not even at offset {:?}",
                            y
                        )));
                    }
                }
            }
        }
        Ok(Self {
            n,
            d,
            r0,
            interaction,
            lambda,
            rho,
            diagonal_shift: 0.0,
        })
    }

    /// Same model with a constant diagonal shift.
    pub fn with_diagonal_shift(mut self, shift: f64) -> Self {
        self.diagonal_shift = shift;
        self
    }

    /// Convenience constructor with the default step interaction.
    pub fn simple(n: usize, d: usize, r0: f64, u0: f64, lambda: f64, rho: DensitySpec) -> Result<Self> {
        Self::new(
            n,
            d,
            r0,
            Interaction {
                amplitude: u0,
                table: None,
            },
            lambda,
            rho,
        )
    }

    /// `Ũ(y)` for a single-particle offset `y in Z^d`.
    pub fn u_tilde(&self, y: &[i64]) -> f64 {
        let norm = y.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64;
        if norm > self.r0 {
            return 0.0;
        }
        if let Some(table) = &self.interaction.table {
            table
                .iter()
                .find(|(z, _)| z == y)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        } else {
            self.interaction.amplitude
        }
    }

    /// Total interaction `U(x) = Σ_{i<j} Ũ(x_i - x_j)` at a configuration.
    pub fn interaction_energy(&self, coords: &[i64]) -> f64 {
        let d = self.d;
        let n = coords.len() / d;
        let mut total = 0.0;
        let mut diff = vec![0i64; d];
        for i in 0..n {
            for j in (i + 1)..n {
                for c in 0..d {
                    diff[c] = coords[i * d + c] - coords[j * d + c];
                }
                total += self.u_tilde(&diff);
            }
        }
        total
    }

    /// The same model for a subset of the particles (used by PI factors).
    pub fn with_n(&self, n: usize) -> ModelParams {
        ModelParams {
            n,
            ..self.clone()
        }
    }

    /// `||ρ^{(λ)}||_inf` of the effective single-site density after the
    /// disorder strength is folded in; infinite at `λ = 0`.
    pub fn effective_density_sup(&self) -> f64 {
        if self.lambda > 0.0 {
            self.rho.sup_density() / self.lambda
        } else {
            f64::INFINITY
        }
    }
}
