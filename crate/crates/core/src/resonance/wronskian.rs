//! Wronskian of the cosine modes `V_{(j,ℓ)} = cos 2π ℓ·(θ + j⊙α)` along a
//! direction `ξ = (ξ̃, ξ̂)` in `(α, θ)`.
//!
//! With `λ_c = (ℓ⊙j)·ξ̃ + ℓ·ξ̂` and `μ_c = (2πλ_c)²` for a column `c = (j,ℓ)`,
//! `d_ξ^{2s} V_c = (−μ_c)^s V_c`, so `W = [V_c (−μ_c)^s]_{s=1..R}` factors as
//! `Π V_c · Π(−μ_c) · Vandermonde(−μ)`, giving `|det W| = A₁·A₂·A₃`.

use serde::Serialize;

use crate::lattice_poly::MultiIndex;
use crate::potential::{cos_2pi, phase, PotentialSpec};

use super::ResonanceError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WronskianDet {
    /// `ln |det W|`; `-∞` when a cosine factor vanishes.
    pub log_abs: f64,
    /// Sign of `det W` (0 when it vanishes).
    pub sign: i8,
    /// `ln A₁ = Σ ln|cos 2π ℓ·(θ + j⊙α)|`.
    pub log_a1: f64,
    /// `ln A₂ = Σ ln μ_c`.
    pub log_a2: f64,
    /// `ln A₃ = Σ_{c<c'} ln|μ_c − μ_c'|`.
    pub log_a3: f64,
    pub rows: usize,
}

impl WronskianDet {
    pub fn det(&self) -> f64 {
        self.sign as f64 * self.log_abs.exp()
    }
}

/// Fractional parts of `√p` for the first `n` primes.
pub fn default_xi(n: usize) -> Vec<f64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if (2..c).take_while(|p| p * p <= c).all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
        .into_iter()
        .map(|p| {
            let s = (p as f64).sqrt();
            s - s.floor()
        })
        .collect()
}

/// Columns `(j, ℓ)` in support-major order with their `λ_c` and cosine.
pub fn columns(spec: &PotentialSpec, support: &[MultiIndex], xi: &[f64]) -> Vec<(f64, f64)> {
    let d = spec.d;
    let (xt, xh) = xi.split_at(d);
    let mut out = Vec::with_capacity(support.len() * spec.terms.len());
    for j in support {
        for t in &spec.terms {
            let l = t.ell.coords();
            let lambda: f64 = (0..d)
                .map(|i| (l[i] as f64 * j.coords()[i] as f64) * xt[i] + l[i] as f64 * xh[i])
                .sum();
            let c = cos_2pi(phase(&t.ell, &spec.theta, &spec.alpha, j));
            out.push((lambda, c));
        }
    }
    out
}

/// `det W` through the closed-form factorization, accumulated in log space.
///
/// `xi` defaults to [`default_xi`]. Errors when some `μ_c` is exactly zero or
/// two columns share `μ` (the direction is not generic for this support).
pub fn wronskian_det(
    spec: &PotentialSpec,
    support: &[MultiIndex],
    xi: Option<&[f64]>,
) -> Result<WronskianDet, ResonanceError> {
    let d = spec.d;
    if support.is_empty() || spec.terms.is_empty() {
        return Err(ResonanceError::InvalidParams("empty support or frequency set".into()));
    }
    if support.iter().any(|j| j.dim() != d) {
        return Err(ResonanceError::Dimension(format!("support sites must have d = {d}")));
    }
    let owned;
    let xi = match xi {
        Some(x) => x,
        None => {
            owned = default_xi(2 * d);
            &owned
        }
    };
    if xi.len() != 2 * d {
        return Err(ResonanceError::Dimension(format!("xi needs {} components", 2 * d)));
    }
    let cols = columns(spec, support, xi);
    let two_pi = std::f64::consts::TAU;
    let mu: Vec<f64> = cols.iter().map(|&(l, _)| (two_pi * l).powi(2)).collect();

    let mut sign: i8 = if cols.len() % 2 == 0 { 1 } else { -1 };
    let mut log_a1 = 0.0;
    let mut log_a2 = 0.0;
    let mut log_a3 = 0.0;
    for (c, &(lambda, cosv)) in cols.iter().enumerate() {
        if lambda == 0.0 {
            return Err(ResonanceError::DegenerateWronskian(format!(
                "direction annihilates column {c} ((ℓ⊙j)·ξ̃ + ℓ·ξ̂ = 0)"
            )));
        }
        log_a1 += cosv.abs().ln();
        log_a2 += mu[c].ln();
        if cosv < 0.0 {
            sign = -sign;
        } else if cosv == 0.0 {
            sign = 0;
        }
        for c2 in c + 1..cols.len() {
            let diff = mu[c] - mu[c2];
            if diff == 0.0 {
                return Err(ResonanceError::DegenerateWronskian(format!(
                    "columns {c} and {c2} have equal |λ| = {}",
                    lambda.abs()
                )));
            }
            log_a3 += diff.abs().ln();
            if diff < 0.0 {
                sign = -sign;
            }
        }
    }
    Ok(WronskianDet {
        log_abs: log_a1 + log_a2 + log_a3,
        sign,
        log_a1,
        log_a2,
        log_a3,
        rows: cols.len(),
    })
}
