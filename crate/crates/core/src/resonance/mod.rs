//! Small divisors: non-resonance certification, the divisor index family,
//! Monte Carlo measure of the resonant set, the Wronskian factorization, and
//! numerical checks of the sublevel-set inequalities behind the measure estimate.

pub mod inequalities;
pub mod divisor;
pub mod measure;
pub mod wronskian;

pub use divisor::{
    check_nonresonant, enumerate_divisor_indices, for_each_divisor_index, Certificate,
    DivisorFamily, DivisorIndex, EnumerationEstimate,
};
pub use measure::{estimate_resonant_measure, resonant_fractions, wilson_interval, MeasureEstimate};
pub use wronskian::{default_xi, wronskian_det, WronskianDet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice_poly::{Annulus, MultiIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("invalid resonance parameters: {0}")]
    InvalidParams(String),
    #[error(
        "divisor family too large: about {predicted} indices predicted, cap {cap} \
         (crude bound (j0 M^2)^(2dM) = 10^{crude_log10:.1})"
    )]
    CapExceeded { predicted: u64, cap: u64, crude_log10: f64 },
    #[error("no frequency for site ({0})")]
    MissingSite(MultiIndex),
    #[error("degenerate Wronskian: {0}")]
    DegenerateWronskian(String),
    #[error("hypothesis not certified: {0}")]
    NotCertified(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Parameters `(γ, L, M, j0, d)` of the non-resonance condition together with
/// the working floor `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceParams {
    pub gamma: f64,
    #[serde(rename = "L")]
    pub scale: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub j0: u32,
    pub d: usize,
    /// Floor for `|Σ k_j ω_j|` in desk mode.
    pub tau: f64,
    /// Use the proof-scale threshold instead of `tau`.
    #[serde(default)]
    pub proof_scale: bool,
    /// Largest divisor family that will be enumerated.
    #[serde(default = "default_cap")]
    pub cap: u64,
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl ResonanceParams {
    pub fn new(gamma: f64, scale: u32, m: u32, j0: u32, d: usize, tau: f64) -> Result<Self, ResonanceError> {
        let p = ResonanceParams {
            gamma,
            scale,
            m,
            j0,
            d,
            tau,
            proof_scale: false,
            cap: DEFAULT_ENUMERATION_CAP,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ResonanceError> {
        let bad = |m: String| Err(ResonanceError::InvalidParams(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma = {} must lie in (0,1)", self.gamma));
        }
        if self.scale == 0 || self.m == 0 || self.j0 == 0 || self.d == 0 {
            return bad("L, M, j0 and d must be positive".into());
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return bad(format!("tau = {} must be finite and non-negative", self.tau));
        }
        Ok(())
    }

    /// `ln` of `(γ / (2 L M² j0)^{2(d+1)})^{10 L⁴ M⁴}`.
    pub fn log_proof_threshold(&self) -> f64 {
        let l = self.scale as f64;
        let m = self.m as f64;
        let base = 2.0 * l * m * m * self.j0 as f64;
        10.0 * l.powi(4) * m.powi(4) * (self.gamma.ln() - 2.0 * (self.d as f64 + 1.0) * base.ln())
    }

    /// `ln` of the floor actually enforced.
    pub fn log_floor(&self) -> f64 {
        if self.proof_scale {
            self.log_proof_threshold()
        } else {
            self.tau.ln()
        }
    }

    /// Whether `|value|` falls strictly below the enforced floor.
    pub fn violates(&self, value: f64) -> bool {
        value.abs().ln() < self.log_floor()
    }

    /// `A(j0, M²)`, where every divisor index must have support.
    pub fn annulus(&self) -> Annulus {
        Annulus::new(self.j0 as f64, (self.m * self.m) as f64)
    }

    /// Cap on `Δ(k) + |k|₁`.
    pub fn size_cap(&self) -> u32 {
        self.m + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proof_threshold_underflows_but_log_is_finite() {
        let p = ResonanceParams::new(0.1, 1, 2, 20, 1, 1e-6).unwrap();
        let lt = p.log_proof_threshold();
        assert!(lt.is_finite() && lt < -700.0);
        assert_eq!(lt.exp(), 0.0);
    }

    #[test]
    fn zero_floor_never_violates() {
        let p = ResonanceParams::new(0.1, 1, 2, 20, 1, 0.0).unwrap();
        assert!(!p.violates(0.0));
        assert!(!p.violates(1e-300));
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(ResonanceParams::new(1.0, 1, 2, 20, 1, 1e-6).is_err());
        assert!(ResonanceParams::new(0.1, 0, 2, 20, 1, 1e-6).is_err());
    }
}
