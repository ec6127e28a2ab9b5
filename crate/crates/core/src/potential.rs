//! Quasi-periodic on-site potential `V_j(θ,α) = Σ_ℓ v_ℓ cos 2π ℓ·(θ + j⊙α)`.

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lattice_poly::MultiIndex;

/// One cosine mode `v cos 2π ℓ·(θ + j⊙α)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTerm {
    pub ell: MultiIndex,
    pub v: f64,
}

/// Frequency set `Γ_L` with amplitudes and the phases `(θ, α)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub d: usize,
    #[serde(rename = "L")]
    pub scale: u32,
    #[serde(alias = "gamma_set")]
    pub terms: Vec<FrequencyTerm>,
    /// Ignored where phases are sampled.
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Some component of `ℓ` is zero.
    ZeroComponent(MultiIndex),
    /// `ℓ + ℓ' = 0` for two members.
    OppositePair(MultiIndex, MultiIndex),
    Duplicate(MultiIndex),
    /// `ℓ` leaves `[−L, L]^d`.
    OutsideBox(MultiIndex),
    /// A vector has the wrong length.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    EmptyFrequencySet,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroComponent(l) => write!(f, "frequency ({l}) has a zero component"),
            Violation::OppositePair(a, b) => write!(f, "frequencies ({a}) and ({b}) sum to zero"),
            Violation::Duplicate(l) => write!(f, "frequency ({l}) listed twice"),
            Violation::OutsideBox(l) => write!(f, "frequency ({l}) lies outside [-L, L]^d"),
            Violation::DimensionMismatch { what, expected, found } => {
                write!(f, "{what} has length {found}, expected {expected}")
            }
            Violation::EmptyFrequencySet => f.write_str("frequency set is empty"),
        }
    }
}

impl PotentialSpec {
    /// Every violated structural condition; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let d = self.d;
        for (what, len) in [("theta", self.theta.len()), ("alpha", self.alpha.len())] {
            if len != d {
                out.push(Violation::DimensionMismatch { what, expected: d, found: len });
            }
        }
        if self.terms.is_empty() {
            out.push(Violation::EmptyFrequencySet);
        }
        for (i, t) in self.terms.iter().enumerate() {
            let l = &t.ell;
            if l.dim() != d {
                out.push(Violation::DimensionMismatch { what: "ell", expected: d, found: l.dim() });
                continue;
            }
            if l.coords().iter().any(|&c| c == 0) {
                out.push(Violation::ZeroComponent(l.clone()));
            }
            if l.coords().iter().any(|&c| c.unsigned_abs() > self.scale) {
                out.push(Violation::OutsideBox(l.clone()));
            }
            for other in &self.terms[i + 1..] {
                if other.ell == *l {
                    out.push(Violation::Duplicate(l.clone()));
                } else if other.ell.dim() == d && other.ell.add(l).is_zero() {
                    out.push(Violation::OppositePair(l.clone(), other.ell.clone()));
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `Σ |v_ℓ|`, a bound for `|V_j|`.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.v.abs()).sum()
    }

    pub fn eval(&self, j: &MultiIndex) -> f64 {
        eval_at(&self.terms, &self.theta, &self.alpha, j)
    }

    /// `V_j` for every site, in the given order.
    pub fn potential_vector<'a>(&self, sites: impl IntoIterator<Item = &'a MultiIndex>) -> Vec<f64> {
        sites.into_iter().map(|j| self.eval(j)).collect()
    }

    /// Same frequencies and amplitudes at new phases.
    pub fn with_phases(&self, theta: Vec<f64>, alpha: Vec<f64>) -> PotentialSpec {
        PotentialSpec { theta, alpha, ..self.clone() }
    }

    /// A random valid spec: `count` distinct frequencies with nonzero
    /// components in `[−L, L]^d`, no opposite pairs, amplitudes in
    /// `[−1, 1]`, phases uniform in `[0,1)^d`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: u32, count: usize) -> PotentialSpec {
        let available = (2 * scale as usize).pow(d as u32) / 2;
        let count = count.min(available).max(1);
        let mut terms: Vec<FrequencyTerm> = Vec::with_capacity(count);
        while terms.len() < count {
            let coords: Vec<i32> = (0..d)
                .map(|_| {
                    let mag = rng.random_range(1..=scale as i32);
                    if rng.random_bool(0.5) { mag } else { -mag }
                })
                .collect();
            let ell = MultiIndex::new(coords);
            let neg = ell.neg();
            if terms.iter().any(|t| t.ell == ell || t.ell == neg) {
                continue;
            }
            terms.push(FrequencyTerm { ell, v: rng.random_range(-1.0..=1.0) });
        }
        PotentialSpec {
            d,
            scale,
            terms,
            theta: (0..d).map(|_| rng.random::<f64>()).collect(),
            alpha: (0..d).map(|_| rng.random::<f64>()).collect(),
        }
    }
}

/// Potential value with explicit phases; the hot path of Monte Carlo sampling.
pub fn eval_at(terms: &[FrequencyTerm], theta: &[f64], alpha: &[f64], j: &MultiIndex) -> f64 {
    terms
        .iter()
        .map(|t| t.v * cos_2pi(phase(&t.ell, theta, alpha, j)))
        .sum()
}

/// `ℓ·(θ + j⊙α)` reduced to `[−1/2, 1/2]`.
///
/// Each product `ℓ_i θ_i` and `(ℓ_i j_i) α_i` is reduced separately with an
/// exact two-product, so large sites lose no digits to cancellation.
pub fn phase(ell: &MultiIndex, theta: &[f64], alpha: &[f64], j: &MultiIndex) -> f64 {
    let mut acc = 0.0;
    for (i, &l) in ell.coords().iter().enumerate() {
        acc += frac_mul(l as i64, theta[i]);
        acc += frac_mul(l as i64 * j.coords()[i] as i64, alpha[i]);
    }
    acc - acc.round()
}

/// Fractional part of `k·x` (centred, up to one ulp of the result).
fn frac_mul(k: i64, x: f64) -> f64 {
    let kf = k as f64;
    let p = kf * x;
    let err = kf.mul_add(x, -p);
    (p - p.round()) + err
}

/// `cos 2πx`, exact at multiples of 1/4 and accurate near its zeros.
pub fn cos_2pi(x: f64) -> f64 {
    let r = (x - x.round()).abs();
    if r <= 0.125 {
        (TAU * r).cos()
    } else if r <= 0.375 {
        (TAU * (0.25 - r)).sin()
    } else {
        -(TAU * (0.5 - r)).cos()
    }
}
