//! Parameters of the normal form iteration.

use serde::{Deserialize, Serialize};

use super::BnfError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BnfConfig {
    /// Number of steps `M`.
    #[serde(rename = "M")]
    pub m: u32,
    pub j0: u32,
    /// Weight base of the norms, `r > 2`.
    pub r: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// Floor below which a divisor aborts the run.
    pub tau: f64,
    /// `N_s = M² − decrement·(s−1)`.
    #[serde(default)]
    pub schedule_decrement: u32,
    /// Hard cap on the Lie series order.
    #[serde(default = "default_lie_max_order")]
    pub lie_max_order: u32,
    /// Target for the geometric tail bound of the Lie series, relative to `‖H‖`.
    #[serde(default = "default_lie_tolerance")]
    pub lie_tolerance: f64,
    /// The per-step elimination cap is `Δ(n)+|n|₁ ≤ s + size_cap_offset`.
    #[serde(default = "default_size_cap_offset")]
    pub size_cap_offset: u32,
    /// Extra sites beyond `j0 + M²` in the computational box.
    #[serde(default)]
    pub halo: Option<u32>,
    /// Scan every divisor of the family before the first step.
    #[serde(default = "default_true")]
    pub prescan: bool,
}

fn default_lie_max_order() -> u32 {
    60
}

fn default_lie_tolerance() -> f64 {
    1e-14
}

fn default_size_cap_offset() -> u32 {
    2
}

fn default_true() -> bool {
    true
}

impl BnfConfig {
    pub fn new(m: u32, j0: u32, r: f64, epsilon1: f64, epsilon2: f64, tau: f64) -> Self {
        BnfConfig {
            m,
            j0,
            r,
            epsilon1,
            epsilon2,
            tau,
            schedule_decrement: 0,
            lie_max_order: default_lie_max_order(),
            lie_tolerance: default_lie_tolerance(),
            size_cap_offset: default_size_cap_offset(),
            halo: None,
            prescan: true,
        }
    }

    pub fn validate(&self) -> Result<(), BnfError> {
        let bad = |m: String| Err(BnfError::InvalidConfig(m));
        if self.m == 0 || self.j0 == 0 {
            return bad("M and j0 must be positive".into());
        }
        if !(self.r > 2.0) || !self.r.is_finite() {
            return bad(format!("r = {} must exceed 2", self.r));
        }
        for (name, e) in [("epsilon1", self.epsilon1), ("epsilon2", self.epsilon2)] {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("{name} = {e} must lie in [0,1]"));
            }
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return bad(format!("tau = {} must be finite and non-negative", self.tau));
        }
        if self.lie_max_order == 0 || !(self.lie_tolerance > 0.0) {
            return bad("lie_max_order and lie_tolerance must be positive".into());
        }
        let last = self.n_schedule(self.m + 1);
        if last < 1 {
            return bad(format!(
                "schedule N_s = M^2 - {}(s-1) reaches {last} < 1 at s = M+1",
                self.schedule_decrement
            ));
        }
        if self.halo == Some(0) {
            return bad("halo must be at least 1 site".into());
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon1 + self.epsilon2
    }

    /// `σ = r/(2M)`.
    pub fn sigma(&self) -> f64 {
        self.r / (2.0 * self.m as f64)
    }

    /// Radius after `s` steps, `r − sσ`.
    pub fn radius(&self, s: u32) -> f64 {
        self.r - s as f64 * self.sigma()
    }

    /// `N_s` (may be negative for an invalid schedule).
    pub fn n_schedule(&self, s: u32) -> i64 {
        (self.m * self.m) as i64 - self.schedule_decrement as i64 * (s as i64 - 1)
    }

    pub fn halo(&self) -> u32 {
        self.halo.unwrap_or(self.m + 4)
    }

    /// Reach of the cubic box `[-reach, reach]^d`.
    pub fn box_reach(&self) -> u32 {
        self.j0 + self.m * self.m + self.halo()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_stay_above_half() {
        let c = BnfConfig::new(3, 12, 2.2, 1e-3, 0.0, 1e-6);
        assert!(c.validate().is_ok());
        assert!((c.radius(c.m) - c.r / 2.0).abs() < 1e-15);
    }

    #[test]
    fn schedule_refusal() {
        let mut c = BnfConfig::new(2, 12, 2.2, 1e-3, 0.0, 1e-6);
        c.schedule_decrement = 20;
        assert!(matches!(c.validate(), Err(BnfError::InvalidConfig(_))));
        c.schedule_decrement = 1;
        assert_eq!(c.n_schedule(3), 2);
        assert!(c.validate().is_ok());
    }
}
