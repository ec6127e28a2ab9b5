//! Monte Carlo estimate of the measure of resonant phases `(θ, α)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::potential::{eval_at, PotentialSpec};

use super::divisor::DivisorFamily;
use super::{ResonanceError, ResonanceParams};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub seed: u64,
    pub samples: usize,
    pub tau: f64,
    pub resonant: usize,
    pub fraction: f64,
    pub ci_halfwidth: f64,
    pub wilson_lower: f64,
    pub wilson_upper: f64,
}

/// Wilson score interval `(lower, upper)` for `hits` successes in `n` trials.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Phase sample `i`: its own ChaCha stream of the seeded generator, so the
/// draw does not depend on how samples are scheduled.
pub fn sample_phases(seed: u64, index: u64, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let theta = (0..d).map(|_| rng.random::<f64>()).collect();
    let alpha = (0..d).map(|_| rng.random::<f64>()).collect();
    (theta, alpha)
}

/// Smallest `|Σ k_j V_j(θ,α)|` over the family for each sample.
pub fn min_divisors(family: &DivisorFamily, template: &PotentialSpec, samples: usize, seed: u64) -> Vec<f64> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let (theta, alpha) = sample_phases(seed, i as u64, template.d);
            let omega: Vec<f64> = family
                .sites()
                .iter()
                .map(|j| eval_at(&template.terms, &theta, &alpha, j))
                .collect();
            family.min_abs(&omega).map_or(f64::INFINITY, |(_, v)| v)
        })
        .collect()
}

/// Resonant fraction at several floors from one shared set of samples, so
/// the fractions are monotone in the floor.
pub fn resonant_fractions(
    params: &ResonanceParams,
    template: &PotentialSpec,
    taus: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<MeasureEstimate>, ResonanceError> {
    params.validate()?;
    if samples < 100 {
        return Err(ResonanceError::InvalidParams(format!("need at least 100 samples, got {samples}")));
    }
    if template.d != params.d {
        return Err(ResonanceError::Dimension(format!(
            "potential has d = {}, parameters d = {}",
            template.d, params.d
        )));
    }
    let family = DivisorFamily::enumerate(params)?;
    let mins = min_divisors(&family, template, samples, seed);
    Ok(taus
        .iter()
        .map(|&tau| {
            let p = ResonanceParams { tau, ..params.clone() };
            let resonant = mins.iter().filter(|&&v| p.violates(v)).count();
            let fraction = resonant as f64 / samples as f64;
            let (lo, hi) = wilson_interval(resonant, samples, Z95);
            MeasureEstimate {
                seed,
                samples,
                tau,
                resonant,
                fraction,
                ci_halfwidth: 0.5 * (hi - lo),
                wilson_lower: lo,
                wilson_upper: hi,
            }
        })
        .collect())
}

/// Fraction of uniform `(θ, α) ∈ [0,1)^{2d}` failing the non-resonance check.
///
/// The frequency set and amplitudes come from `template`; its phases are
/// ignored.
pub fn estimate_resonant_measure(
    params: &ResonanceParams,
    template: &PotentialSpec,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate, ResonanceError> {
    let mut out = resonant_fractions(params, template, &[params.tau], samples, seed)?;
    Ok(out.remove(0))
}
