//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A lattice enumeration would exceed the configured point cap.
    #[error("box too large: {count} lattice points exceeds cap {cap}")]
    BoxTooLarge { count: u128, cap: usize },

    /// Dense eigensolves refuse above the dimension cap.
    #[error("dimension {dim} exceeds eigensolver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// Shape mismatch between configuration-space values.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// No integer k makes (L-l)/(2lk) land in [3/5, 4/5].
    #[error("no valid alpha for L={l}, ell={ell}: no k with (L-ell)/(2*ell*k) in [3/5,4/5]")]
    NoValidAlpha { l: f64, ell: f64 },

    /// Covering preconditions (ell <= L/6) violated.
    #[error("cover precondition failed: {0}")]
    CoverPrecondition(String),

    /// `boundary` called on non-nested rectangles.
    #[error("inner rectangle is not contained in the outer rectangle")]
    NotNested,

    /// The bad-region construction cannot fit inside the parent box.
    #[error("bad region overflow: parent box too small for S={s} bad centers at scale ell={ell}")]
    RegionOverflow { s: usize, ell: f64 },

    /// Energy too close to the finite-volume spectrum for a resolvent.
    #[error("resonant energy: dist(spectrum, E) = {dist:.3e} below guard {guard:.3e}")]
    Resonant { dist: f64, guard: f64 },

    /// A disorder sample does not cover the requested sites.
    #[error("disorder sample does not cover site {0:?}")]
    SampleMissingSite(Vec<i64>),

    /// Interaction table violates evenness or range constraints.
    #[error("invalid interaction table: {0}")]
    InvalidInteraction(String),

    /// Two-box estimators require partial separation.
    #[error("rectangles are not partially separated; the bound does not apply")]
    NotPartiallySeparated,

    /// PI-only checks called on a fully interactive box.
    #[error("box is fully interactive; a partially interactive box is required")]
    NotPartiallyInteractive,

    /// Hausdorff separation preconditions for two-box events.
    #[error("insufficient separation: d_H(x,y) = {dh} < required {required}")]
    InsufficientSeparation { dh: f64, required: f64 },

    /// Generic contract violation with a description.
    #[error("contract violation: {0}")]
    Contract(String),
}
