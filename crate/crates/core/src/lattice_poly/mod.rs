//! Sparse polynomial algebra on lattice multi-indices: monomials, weighted
//! norms, Poisson brackets and the resonant decomposition.

pub mod index;
pub mod monomial;
pub mod norm;
pub mod poly;
pub mod text;

pub use index::{Annulus, BoxGeometry, MultiIndex};
pub use monomial::{Exponent, Monomial};
pub use norm::{grade_by_size, norm_in, weighted_norm, NormParams};
pub use poly::HamiltonianPoly;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid norm parameters: {0}")]
    InvalidNormParams(String),
    #[error("parse error: {0}")]
    Parse(String),
}
