//! Finite-volume Green functions, box-quality classifiers, and the
//! deterministic multiscale checkers built on them.

mod classify;
mod energy_shift;
mod green;
mod msa;
mod pi;
mod preregular;

pub use classify::{
    achieved_mass, achieved_ses_exponent, achieved_suitable_exponent, classify, is_good,
    quality_pairs, BoxQualityReport, QualityKind,
};
pub use energy_shift::{energy_shift_check, EnergyShiftReport};
pub use green::{green_entries, green_matrix, GreenSolver, RESONANCE_GUARD};
pub use msa::{max_pairwise_distant, msa_deterministic_check, MsaCheckReport, MsaMode};
pub use pi::{pi_split, pi_transfer_check, PiMode, PiSplit, PiTransferReport};
pub use preregular::{preregular_and_hnr_check, PreregularHnrReport, ResonanceWitness};
