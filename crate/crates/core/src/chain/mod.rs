//! Birth-death chains: speed measure, ergodicity criteria and gap bounds.

mod criteria;
mod ladder;
mod spectral;

pub use criteria::{
    verify_test_sequence, ChainAnalysis, CriteriaError, HittingTime, TestSequenceCheck,
    DISCRETE_DECAY_RATIO, DISCRETE_STUCK, DISCRETE_VANISH,
};
pub(crate) use criteria::decide_vanishing;
pub use ladder::{ChainProfile, LadderError, MuLadder, MU_MAX, MU_MIN};
pub use spectral::{
    delta_bd, gap_bounds_bd, representative_w, truncated_gap_oracle, truncated_matrix,
    truncation_eigenvalue, variational_lower_bd, SpectralError, TestSequence,
    ORACLE_TOL, W_MAX,
};
