//! Configuration-space geometry for `n` particles on `Z^d`.
//!
//! Points live in `Z^{nd}` (or `R^{nd}` for box centers), boxes are
//! products of per-particle sup-norm boxes, and all distances are
//! sup-norm distances. Lattice points of a rectangle are always
//! enumerated in lexicographic order of their flattened coordinates;
//! operator matrix indices rely on that ordering.

mod bad_region;
mod cover;
mod point;
mod rectangle;

pub use bad_region::{build_bad_region, multiplier_sequence, BadRegion};
pub use cover::{suitable_cover, SuitableCover};
pub use point::{
    diam, hausdorff_distance, is_l_distant, point_dist, ConfigPoint, RealCenter,
};
pub use rectangle::{
    boundary, classify_interactivity, lattice_distance, Interactivity, ParticleRectangle,
    DEFAULT_POINT_CAP,
};
