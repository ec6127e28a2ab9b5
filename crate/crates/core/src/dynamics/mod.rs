//! Norm-preserving integration of `i q̇_j = V_j q_j + ε₁(Δq)_j + ε₂|q_j|²q_j`
//! on finite boxes with zero-Dirichlet truncation, the observables of the
//! localization statement, and the experiment driver.

pub mod experiment;
pub mod integrator;
pub mod observables;
pub mod state;

pub use experiment::{
    localization_experiment, InitialProfile, LocalizationConfig, LocalizationReport, SampleReport,
};
pub use integrator::{default_dt, Integrator, Rotor, SimConfig};
pub use observables::{barrier_mass, energy, l2_norm, ls_slope, mass, TrajectoryRow};
pub use state::LatticeState;

use thiserror::Error;

use crate::lattice_poly::PolyError;
use crate::resonance::ResonanceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),
    #[error("state does not match the integrator box: {0}")]
    BoxMismatch(String),
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
    #[error("initial data violates the tail condition: mass {mass:.3e} beyond |j| = {j0} is not below delta = {delta:.3e}")]
    InitialTail { mass: f64, j0: u32, delta: f64 },
    #[error("only {found} of {wanted} phase samples were non-resonant after {tried} draws")]
    TooFewSamples { found: usize, wanted: usize, tried: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
}
