//! Mass beyond `j0 + M²` over `|t| ≤ δ·ε^{−M}` for random non-resonant phases.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice_poly::{BoxGeometry, MultiIndex};
use crate::potential::{eval_at, PotentialSpec};
use crate::resonance::measure::sample_phases;
use crate::resonance::{DivisorFamily, ResonanceParams};

use super::integrator::{default_dt, Integrator};
use super::observables::{barrier_mass, energy, ls_slope, mass, TrajectoryRow};
use super::state::LatticeState;
use super::DynamicsError;

/// Initial amplitudes, real and non-negative, with unit total mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialProfile {
    /// `q_j ∝ e^{−|j|/ξ}` on `|j| ≤ j0`, zero beyond.
    Exponential { xi: f64 },
    /// The exponential bulk carrying `1 − f·δ`, plus `f·δ` spread evenly over
    /// `j0 < |j| ≤ j0 + M²`, so the tail condition holds with margin `1 − f`.
    Tail { xi: f64, tail_fraction: f64 },
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile::Tail { xi: 2.0, tail_fraction: 0.5 }
    }
}

impl InitialProfile {
    pub fn build(&self, geometry: &BoxGeometry, j0: u32, m: u32, delta: f64) -> Result<LatticeState, DynamicsError> {
        let j0f = j0 as f64;
        let outer = (j0 + m * m) as f64;
        let (xi, tail) = match *self {
            InitialProfile::Exponential { xi } => (xi, 0.0),
            InitialProfile::Tail { xi, tail_fraction } => (xi, tail_fraction * delta),
        };
        if !(xi > 0.0) || !(0.0..1.0).contains(&tail) {
            return Err(DynamicsError::InvalidConfig(format!("initial profile {self:?} out of range")));
        }
        let bulk = |j: &MultiIndex| if j.norm() <= j0f { (-j.norm() / xi).exp() } else { 0.0 };
        let in_shell = |j: &MultiIndex| j.norm() > j0f && j.norm() <= outer;
        let bulk_mass: f64 = geometry.sites().map(|j| bulk(&j).powi(2)).sum();
        let shell_sites = geometry.sites().filter(|j| in_shell(j)).count();
        if tail > 0.0 && shell_sites == 0 {
            return Err(DynamicsError::InvalidConfig("no sites in the tail shell".into()));
        }
        let a = ((1.0 - tail) / bulk_mass).sqrt();
        let b = if tail > 0.0 { (tail / shell_sites as f64).sqrt() } else { 0.0 };
        Ok(LatticeState::from_fn(geometry.clone(), |j| {
            let x = if in_shell(j) { b } else { a * bulk(j) };
            Complex64::new(x, 0.0)
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationConfig {
    /// Frequency set and amplitudes; phases are drawn per sample.
    pub template: PotentialSpec,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub j0: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub delta: f64,
    pub gamma: f64,
    pub tau: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Phase draws allowed before giving up; defaults to `10·samples`.
    #[serde(default)]
    pub max_draws: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to `δ·ε^{−M}`.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub cadence: Option<u32>,
    /// Sites beyond `j0 + M²`; defaults to `ceil(4dε₁·t_end) + 10`.
    #[serde(default)]
    pub halo: Option<u32>,
    #[serde(default)]
    pub initial: InitialProfile,
    /// `C` in the growth check `slope ≤ C·ε^{M+1}`.
    #[serde(default = "default_slope_constant")]
    pub slope_constant: f64,
}

fn default_samples() -> usize {
    20
}

fn default_slope_constant() -> f64 {
    10.0
}

impl LocalizationConfig {
    pub fn new(template: PotentialSpec, epsilon1: f64, epsilon2: f64, j0: u32, m: u32, delta: f64) -> Self {
        LocalizationConfig {
            template,
            epsilon1,
            epsilon2,
            j0,
            m,
            delta,
            gamma: 0.1,
            tau: 1e-6,
            samples: default_samples(),
            max_draws: None,
            seed: 0,
            t_end: None,
            dt: None,
            cadence: None,
            halo: None,
            initial: InitialProfile::default(),
            slope_constant: default_slope_constant(),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon1 + self.epsilon2
    }

    pub fn t_end(&self) -> Result<f64, DynamicsError> {
        match self.t_end {
            Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(DynamicsError::InvalidConfig(format!("t_end must be non-negative, got {t}"))),
            None if self.epsilon() > 0.0 => Ok(self.delta * self.epsilon().powi(-(self.m as i32))),
            None => Err(DynamicsError::InvalidConfig("t_end = δ·ε^{-M} is infinite at ε = 0; set t_end".into())),
        }
    }

    pub fn halo(&self) -> Result<u32, DynamicsError> {
        Ok(match self.halo {
            Some(h) => h,
            None => (4.0 * self.template.d as f64 * self.epsilon1.abs() * self.t_end()?).ceil() as u32 + 10,
        })
    }

    pub fn geometry(&self) -> Result<BoxGeometry, DynamicsError> {
        let reach = self.j0 + self.m * self.m + self.halo()?;
        Ok(BoxGeometry::cube(self.template.d, reach as i32))
    }

    pub fn resonance_params(&self) -> Result<ResonanceParams, DynamicsError> {
        Ok(ResonanceParams::new(self.gamma, self.template.scale, self.m, self.j0, self.template.d, self.tau)?)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidConfig(m));
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.m == 0 {
            return bad("M must be at least 1".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if self.cadence == Some(0) {
            return bad("cadence must be at least 1".into());
        }
        let template = PotentialSpec {
            theta: vec![0.0; self.template.d],
            alpha: vec![0.0; self.template.d],
            ..self.template.clone()
        };
        let v = template.validate();
        if !v.is_empty() {
            return bad(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "));
        }
        self.t_end()?;
        self.resonance_params()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    /// Index of the phase draw.
    pub draw: u64,
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub min_divisor: f64,
    pub max_barrier_mass: f64,
    pub final_barrier_mass: f64,
    /// Least-squares slope of the mass beyond `j0 + M²`.
    pub slope: f64,
    /// Largest mass seen in the outermost five shells of the box.
    pub boundary_mass: f64,
    pub l2_drift: f64,
    pub energy_drift: f64,
    pub pass: bool,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryRow>,
    #[serde(skip)]
    pub final_state: LatticeState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub t_end: f64,
    pub dt: f64,
    pub steps: u64,
    pub box_reach: u32,
    pub draws: usize,
    /// Draws excluded by the non-resonance check, with their smallest divisor.
    pub resonant_draws: Vec<(u64, f64)>,
    pub samples: Vec<SampleReport>,
    pub mass_bound: f64,
    pub max_barrier_mass: f64,
    pub slope_bound: f64,
    pub max_slope: f64,
    /// `max slope / ε^{M+1}`.
    pub slope_constant: f64,
    pub pass_fraction: f64,
    pub pass: bool,
}

/// Runs the experiment: draws `(θ, α)` until `samples` pass the
/// non-resonance check at `tau`, then integrates each to `t_end` and records
/// the mass beyond `j0` and `j0 + M²`. Trajectories run in parallel; each is
/// serial and seeded by its draw index, so results do not depend on the
/// thread count.
pub fn localization_experiment(config: &LocalizationConfig) -> Result<LocalizationReport, DynamicsError> {
    config.validate()?;
    let d = config.template.d;
    let t_end = config.t_end()?;
    let geometry = config.geometry()?;
    let reach = config.j0 + config.m * config.m + config.halo()?;
    let params = config.resonance_params()?;
    let family = DivisorFamily::enumerate(&params)?;

    let max_draws = config.max_draws.unwrap_or(10 * config.samples);
    let mut chosen = Vec::new();
    let mut resonant = Vec::new();
    let mut draws = 0;
    while chosen.len() < config.samples && draws < max_draws {
        let idx = draws as u64;
        draws += 1;
        let (theta, alpha) = sample_phases(config.seed, idx, d);
        let omega: Vec<f64> = family.sites().iter().map(|j| eval_at(&config.template.terms, &theta, &alpha, j)).collect();
        let min = family.min_abs(&omega).map_or(f64::INFINITY, |(_, v)| v);
        if params.violates(min) {
            resonant.push((idx, min));
        } else {
            chosen.push((idx, theta, alpha, min));
        }
    }
    if chosen.len() < config.samples {
        return Err(DynamicsError::TooFewSamples { found: chosen.len(), wanted: config.samples, tried: draws });
    }

    let initial = config.initial.build(&geometry, config.j0, config.m, config.delta)?;
    let tail = barrier_mass(&initial, config.j0 as f64);
    if !(tail < config.delta) {
        return Err(DynamicsError::InitialTail { mass: tail, j0: config.j0, delta: config.delta });
    }
    let max_mass = initial.amplitudes().iter().map(|q| q.norm_sqr()).fold(0.0, f64::max);
    let dt0 = config
        .dt
        .unwrap_or_else(|| default_dt(&config.template, config.epsilon1, config.epsilon2, max_mass));
    let steps = (t_end / dt0).ceil().max(1.0) as u64;
    let dt = t_end / steps as f64;
    let cadence = config.cadence.map_or_else(|| (steps / 1000).max(1), u64::from);
    let outer = (config.j0 + config.m * config.m) as f64;
    let shell = |j: &MultiIndex| j.coords().iter().any(|c| c.unsigned_abs() + 5 > reach);

    let samples: Vec<SampleReport> = chosen
        .into_par_iter()
        .map(|(draw, theta, alpha, min_divisor)| {
            let spec = config.template.with_phases(theta.clone(), alpha.clone());
            let integ = Integrator::new(&spec, geometry.clone(), config.epsilon1, config.epsilon2, dt);
            let mut state = initial.clone();
            let mut trajectory = vec![TrajectoryRow::measure(&state, &integ, config.j0 as f64, outer)];
            let boundary = |s: &LatticeState| s.iter().filter(|(j, _)| shell(j)).map(|(_, q)| q.norm_sqr()).sum::<f64>();
            let mut boundary_mass = boundary(&state);
            for n in 1..=steps {
                integ.step(&mut state);
                if n % cadence == 0 || n == steps {
                    if n == steps {
                        // land exactly on t_end regardless of rounding in the sum
                        state.time = t_end;
                    }
                    trajectory.push(TrajectoryRow::measure(&state, &integ, config.j0 as f64, outer));
                    boundary_mass = boundary_mass.max(boundary(&state));
                }
            }
            let ts: Vec<f64> = trajectory.iter().map(|r| r.t).collect();
            let ys: Vec<f64> = trajectory.iter().map(|r| r.outer).collect();
            let max_barrier_mass = ys.iter().copied().fold(0.0, f64::max);
            let m0 = mass(&initial);
            let e0 = energy(&initial, &integ);
            let (m1, e1) = (mass(&state), energy(&state, &integ));
            SampleReport {
                draw,
                theta,
                alpha,
                min_divisor,
                max_barrier_mass,
                final_barrier_mass: *ys.last().expect("at least one row"),
                slope: ls_slope(&ts, &ys),
                boundary_mass,
                l2_drift: (m1 - m0).abs() / m0,
                energy_drift: (e1 - e0).abs() / e0.abs().max(f64::MIN_POSITIVE),
                pass: max_barrier_mass < 2.0 * config.delta,
                trajectory,
                final_state: state,
            }
        })
        .collect();

    let eps_pow = config.epsilon().powi(config.m as i32 + 1);
    let slope_bound = config.slope_constant * eps_pow;
    let max_slope = samples.iter().map(|s| s.slope).fold(f64::NEG_INFINITY, f64::max);
    let passed = samples.iter().filter(|s| s.pass).count();
    let pass_fraction = passed as f64 / samples.len() as f64;
    Ok(LocalizationReport {
        t_end,
        dt,
        steps,
        box_reach: reach,
        draws,
        resonant_draws: resonant,
        mass_bound: 2.0 * config.delta,
        max_barrier_mass: samples.iter().map(|s| s.max_barrier_mass).fold(0.0, f64::max),
        slope_bound,
        max_slope,
        slope_constant: if eps_pow > 0.0 { max_slope / eps_pow } else { f64::NAN },
        pass_fraction,
        pass: passed == samples.len() && max_slope <= slope_bound,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::FrequencyTerm;

    fn template() -> PotentialSpec {
        PotentialSpec {
            d: 1,
            scale: 1,
            terms: vec![FrequencyTerm { ell: MultiIndex::d1(1), v: 1.0 }],
            theta: vec![0.0],
            alpha: vec![0.0],
        }
    }

    #[test]
    fn tail_profile_meets_condition() {
        let geo = BoxGeometry::cube(1, 30);
        let s = InitialProfile::default().build(&geo, 12, 2, 0.01).unwrap();
        assert!((mass(&s) - 1.0).abs() < 1e-14);
        assert!((barrier_mass(&s, 12.0) - 0.005).abs() < 1e-15);
        assert_eq!(barrier_mass(&s, 16.0), 0.0);
    }

    #[test]
    fn zero_coupling_keeps_barrier_mass() {
        let mut c = LocalizationConfig::new(template(), 0.0, 0.0, 6, 1, 0.05);
        c.t_end = Some(5.0);
        c.samples = 3;
        c.initial = InitialProfile::Exponential { xi: 3.0 };
        let rep = localization_experiment(&c).unwrap();
        for s in &rep.samples {
            let first = s.trajectory[0].outer;
            assert!(s.trajectory.iter().all(|r| (r.outer - first).abs() < 1e-15));
        }
        assert!(rep.pass);
    }

    #[test]
    fn infinite_horizon_refused() {
        let c = LocalizationConfig::new(template(), 0.0, 0.0, 6, 1, 0.05);
        assert!(matches!(localization_experiment(&c), Err(DynamicsError::InvalidConfig(_))));
    }
}
