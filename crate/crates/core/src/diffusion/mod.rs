//! Diffusions `a(x) f'' + b(x) f'` on `[0, ∞)` reflecting at `0`.

mod criteria;
mod profile;
pub mod quadrature;
mod spectral;

use thiserror::Error;

use crate::eigen::EigenError;
use crate::model::ModelError;

pub use criteria::{DiffusionAnalysis, REFINE_TOL, SUP_STABLE_TOL};
pub use profile::{DiffusionProfile, MuValue, GRID_MIN, LAST_HORIZON_LOG2, POINTS_PER_DECADE};
pub use quadrature::{integrate, QuadratureError, QuadratureResult};
pub use spectral::{
    default_cutoff, delta_diff, dirichlet_form, fd_eigenvalue, fd_gap_oracle, gap_bounds_diff,
    kac_krein_delta, muckenhoupt_b, rayleigh_quotient, representative_f, variance,
    variational_lower_diff, RepresentativeF, TestFunction, FD_CUTOFF_FACTOR, FD_STEPS, FD_TAIL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffusionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("quadrature failed: {0}")]
    Quadrature(QuadratureError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("position {0} is outside the half line")]
    Domain(f64),
    #[error("Nash dimension must exceed 2, got {0}")]
    NashExponent(f64),
    #[error("the model has a nonzero drift")]
    NotDriftless,
    #[error("test function is not finite and strictly increasing at {x}")]
    NotIncreasing { x: f64 },
    #[error("the speed measure is not known to be finite")]
    NotErgodic,
    #[error("cutoff {cutoff} leaves a mass fraction {fraction:e} beyond it")]
    CutoffTooSmall { cutoff: f64, fraction: f64 },
    #[error("grid of {0} steps is too small")]
    GridTooSmall(usize),
    #[error("smallest eigenvalue {value} of the reflecting discretisation is not zero")]
    NonzeroGround { value: f64 },
}
