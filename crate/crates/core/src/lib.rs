//! Ergodicity and spectral-gap diagnostics for birth-death chains and
//! one-dimensional diffusions.
//!
//! The library answers, for a given model, which of the standard ergodicity
//! properties hold (uniqueness, recurrence, exponential, strong, discrete
//! spectrum, log-Sobolev, Nash) and brackets the spectral gap between
//! explicit bounds. Every answer is three-valued: a numeric probe either
//! decides, or reports `Inconclusive` with its trace.

#![allow(clippy::needless_range_loop)]

pub mod chain;
pub mod cli;
pub mod diffusion;
pub mod eigen;
pub mod gap;
pub mod lattice;
pub mod model;
pub mod verdict;

use thiserror::Error;

pub use model::{BirthDeathModel, DiffusionModel, EvalError, FileError, Model, ModelError, ParseError, RateExpression};
pub use gap::{Boundary, Delta, GapEstimate, OracleValue, VariationalBound};
pub use verdict::{Budget, Outcome, Probe, Reason, Verdict};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
