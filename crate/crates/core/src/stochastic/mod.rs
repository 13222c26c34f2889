//! Seeded Monte Carlo estimators for box-quality probabilities, the
//! Wegner-family bounds, and the numeric scale recursions.
//!
//! Every estimator draws its `k`-th sample from the deterministic
//! disorder stream `(seed, k)`, evaluates samples independently (in
//! parallel when beneficial), and aggregates by sample index, so results
//! are identical for any worker count and evaluation order.

mod chain;
mod estimate;
mod recursion;
mod wegner;
mod wilson;

pub use chain::{validate_exponent_chain, ChainViolation, ExponentTuple, ScaleMode, ScaleSchedule};
pub use estimate::{
    estimate_bad_prob, estimate_bad_prob_detailed, two_box_interval_event_prob,
    IntervalEventReport, ProbEstimate,
};
pub use recursion::{
    recursion_msa1, recursion_msa2, recursion_msa3, Msa1Result, Msa2Result,
    POST_THRESHOLD_STEPS,
};
pub use wegner::{
    resolvent_norm_prob, two_box_spectral_distance_prob, wegner_trace_check, BoundedProbReport,
    WegnerTraceReport,
};
pub use wilson::{wilson_interval, Z95_TWO_SIDED, Z99_ONE_SIDED, Z99_TWO_SIDED};
