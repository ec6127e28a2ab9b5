//! Configuration, orchestration and reporting for the four experiments.

pub mod config;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{load_config, load_config_for, Experiment, ReportFormat, RunConfig};
pub use report::{Summary, SummaryEntry};
pub use run::{run, RunOutcome};

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::lattice_poly::PolyError;
use crate::normal_form::BnfError;
use crate::resonance::ResonanceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
    #[error(transparent)]
    Normal(#[from] BnfError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
