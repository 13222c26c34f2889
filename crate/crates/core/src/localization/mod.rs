//! Finite-volume localization observables: eigenfunction decay profiles,
//! the eigenfunction-correlator kernel, and eigenfunction-correlation
//! (SUDEC) ratios.

mod decay;
mod kernel;
mod sudec;

pub use decay::{decay_profiles, decay_profiles_with_spectrum, DecayProfile};
pub use kernel::{
    default_times, kernel_estimate, kernel_estimate_with_spectrum, KernelEstimate,
};
pub use sudec::{sudec_values, sudec_values_with_spectrum, SudecValues, CLUSTER_TOLERANCE};
