//! Birkhoff normal form around the barrier annulus: homological equation,
//! Lie transforms, the M-step iteration and its norm ledger.

pub mod classify;
pub mod config;
pub mod homological;
pub mod lie;
pub mod step;

pub use classify::{classify_remainder, outward_flux, RemainderParts};
pub use config::BnfConfig;
pub use homological::{build_hamiltonian, lie_derivative, solve_homological, SplitHamiltonian};
pub use lie::{lie_transform, LieReport, WorkingNorm};
pub use step::{bnf_step, run_bnf, BnfFailure, BnfRun, BnfState, LedgerRow};

use thiserror::Error;

use crate::lattice_poly::PolyError;
use crate::resonance::ResonanceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnfError {
    #[error("invalid normal form configuration: {0}")]
    InvalidConfig(String),
    #[error("step {step}: divisor {divisor:.3e} of monomial {monomial} is below tau = {tau:.3e}")]
    SmallDivisor { step: u32, monomial: String, divisor: f64, tau: f64 },
    #[error("step {step}: contraction (e/sigma)*||F|| = {lhs:.6e} exceeds {bound}")]
    Contraction { step: u32, lhs: f64, bound: f64 },
    #[error("Lie series did not converge by order {order} (tail bound {tail:.3e})")]
    LieNotConverged { order: u32, tail: f64 },
    #[error("no frequency for a site of monomial {0}")]
    MissingFrequency(String),
    #[error("box too small: {0}")]
    BoxTooSmall(String),
    #[error("frequencies are resonant: divisor index {k} has value {value:.3e} below tau = {tau:.3e}")]
    Resonant { k: String, value: f64, tau: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
}

impl BnfError {
    /// Attaches the step index to step-local errors.
    pub fn at_step(self, s: u32) -> Self {
        match self {
            BnfError::SmallDivisor { monomial, divisor, tau, .. } => {
                BnfError::SmallDivisor { step: s, monomial, divisor, tau }
            }
            BnfError::Contraction { lhs, bound, .. } => BnfError::Contraction { step: s, lhs, bound },
            e => e,
        }
    }
}
