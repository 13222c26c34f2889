//! Finite-volume laboratory for multi-particle Anderson models.
//!
//! The crate builds lattice Hamiltonians `H = -Δ + λV_ω + U` for `n`
//! particles on boxes of `Z^{nd}`, classifies boxes by the size of their
//! Green functions, estimates disorder probabilities by Monte Carlo, and
//! measures localization observables on the resulting eigensystems.
//!
//! Modules follow the pipeline:
//!
//! - [`geometry`]: configuration-space points, boxes, covers, separation
//!   predicates, and the bad-region construction.
//! - [`model`]: disorder sampling and assembly of finite-volume operators.
//! - [`resolvent`]: Green functions, box-quality classifiers, and the
//!   deterministic multiscale-analysis checkers.
//! - [`stochastic`]: seeded Monte Carlo estimators, Wegner-bound checks,
//!   and the scale recursions.
//! - [`localization`]: eigenfunction decay profiles, correlator kernels,
//!   and eigenfunction-correlation (SUDEC) ratios.
//!
//! The lexicographic ordering of lattice points is a public contract:
//! matrix indices of every operator follow it.

// Negated comparisons like `!(x < y)` are deliberate: they reject NaN
// inputs, which `x >= y` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod localization;
pub mod model;
pub mod resolvent;
pub mod stochastic;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
