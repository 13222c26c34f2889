//! The n-particle Anderson Hamiltonian on finite boxes and the disorder
//! ensembles feeding it.

mod disorder;
mod operator;
mod params;

pub use disorder::{sample_disorder, site_value, DisorderSample, SiteRegion};
pub use operator::{assemble, restrict, FiniteVolumeOperator, Spectrum, DEFAULT_EIGEN_CAP};
pub use params::{DensitySpec, Interaction, ModelParams};
