//! Run configuration: one TOML file per experiment, versioned.
//!
//! ```toml
//! schema_version = 1
//! experiment = "simulate"
//! seed = 7
//!
//! [potential]
//! d = 1
//! L = 1
//! terms = [{ ell = [1], v = 1.0 }]
//!
//! [simulate]
//! epsilon1 = 0.05
//! epsilon2 = 0.05
//! j0 = 12
//! M = 2
//! delta = 0.01
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{default_dt, InitialProfile, LocalizationConfig};
use crate::normal_form::BnfConfig;
use crate::potential::PotentialSpec;
use crate::resonance::ResonanceParams;

use super::AppError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    NormalForm,
    Measure,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::NormalForm => "normal-form",
            Experiment::Measure => "measure",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: ReportFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, rename = "normal-form", skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<BnfConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
}

/// The localization experiment without the potential and the seed, which
/// live at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub j0: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub delta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_sim_tau")]
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_draws: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cadence: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halo: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_constant: Option<f64>,
}

fn default_gamma() -> f64 {
    0.1
}

fn default_sim_tau() -> f64 {
    1e-6
}

fn default_measure_tau() -> f64 {
    1e-8
}

fn default_measure_samples() -> usize {
    10_000
}

impl SimulateSection {
    pub fn localization(&self, template: &PotentialSpec, seed: u64) -> LocalizationConfig {
        let mut c = LocalizationConfig::new(template.clone(), self.epsilon1, self.epsilon2, self.j0, self.m, self.delta);
        c.gamma = self.gamma;
        c.tau = self.tau;
        c.seed = seed;
        if let Some(s) = self.samples {
            c.samples = s;
        }
        c.max_draws = self.max_draws;
        c.t_end = self.t_end;
        c.dt = self.dt;
        c.cadence = self.cadence;
        c.halo = self.halo;
        if let Some(i) = &self.initial {
            c.initial = i.clone();
        }
        if let Some(k) = self.slope_constant {
            c.slope_constant = k;
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub j0: u32,
    /// Primary floor; its row decides pass/fail.
    #[serde(default = "default_measure_tau")]
    pub tau: f64,
    /// Further floors evaluated on the same samples.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_taus: Vec<f64>,
    #[serde(rename = "S", default = "default_measure_samples")]
    pub samples: usize,
    #[serde(default)]
    pub proof_scale: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
}

impl MeasureSection {
    pub fn params(&self, potential: &PotentialSpec, tau: f64) -> Result<ResonanceParams, AppError> {
        let mut p = ResonanceParams::new(self.gamma, potential.scale, self.m, self.j0, potential.d, tau)?;
        p.proof_scale = self.proof_scale;
        if let Some(cap) = self.cap {
            p.cap = cap;
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_bases")]
    pub bgg85_bases: usize,
    #[serde(default = "default_max_entry")]
    pub bgg85_max_entry: i32,
    #[serde(default = "default_epsilons")]
    pub sw23_epsilons: Vec<f64>,
    #[serde(default = "default_cells")]
    pub sw23_cells: usize,
}

fn default_bases() -> usize {
    10_000
}

fn default_max_entry() -> i32 {
    3
}

fn default_epsilons() -> Vec<f64> {
    (3..=10).map(|k| 0.5f64.powi(k)).collect()
}

fn default_cells() -> usize {
    4096
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            bgg85_bases: default_bases(),
            bgg85_max_entry: default_max_entry(),
            sw23_epsilons: default_epsilons(),
            sw23_cells: default_cells(),
        }
    }
}

impl RunConfig {
    /// Built-in verify battery configuration.
    pub fn verify_default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::Verify,
            seed: 0,
            format: ReportFormat::Csv,
            out: None,
            workers: None,
            potential: None,
            simulate: None,
            normal_form: None,
            measure: None,
            verify: Some(VerifySection::default()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| AppError::Parse(e.to_string()))?;
        Ok(config)
    }

    /// Like [`RunConfig::from_toml`], filling a missing `experiment` key.
    pub fn from_toml_for(text: &str, experiment: Experiment) -> Result<Self, AppError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| AppError::Parse(e.to_string()))?;
        table
            .entry("experiment")
            .or_insert_with(|| toml::Value::String(experiment.name().into()));
        let config: RunConfig = table.try_into().map_err(|e: toml::de::Error| AppError::Parse(e.to_string()))?;
        if config.experiment != experiment {
            return Err(AppError::Invalid(format!(
                "config describes a `{}` run, not `{}`",
                config.experiment.name(),
                experiment.name()
            )));
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize")
    }

    fn potential(&self) -> Result<&PotentialSpec, AppError> {
        self.potential
            .as_ref()
            .ok_or_else(|| AppError::Invalid(format!("a `{}` run needs a [potential] table", self.experiment.name())))
    }

    fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T, AppError> {
        s.as_ref()
            .ok_or_else(|| AppError::Invalid(format!("a `{}` run needs a [{name}] table", self.experiment.name())))
    }

    /// Checks the sections the experiment needs and fills every default, so
    /// that the echoed configuration reproduces the run on its own.
    pub fn resolve(mut self) -> Result<Self, AppError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::Invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.workers == Some(0) {
            return Err(AppError::Invalid("workers must be at least 1".into()));
        }
        match self.experiment {
            Experiment::Simulate => {
                let potential = self.potential()?.clone();
                let section = self.section(&self.simulate, "simulate")?.clone();
                let loc = section.localization(&potential, self.seed);
                loc.validate()?;
                let t_end = loc.t_end()?;
                let geometry = loc.geometry()?;
                let initial = loc.initial.build(&geometry, loc.j0, loc.m, loc.delta)?;
                let max_mass = initial.amplitudes().iter().map(|q| q.norm_sqr()).fold(0.0, f64::max);
                let dt = loc.dt.unwrap_or_else(|| default_dt(&potential, loc.epsilon1, loc.epsilon2, max_mass));
                let steps = (t_end / dt).ceil().max(1.0) as u64;
                self.simulate = Some(SimulateSection {
                    samples: Some(loc.samples),
                    max_draws: Some(loc.max_draws.unwrap_or(10 * loc.samples)),
                    t_end: Some(t_end),
                    dt: Some(dt),
                    cadence: Some(loc.cadence.unwrap_or_else(|| (steps / 1000).max(1) as u32)),
                    halo: Some(loc.halo()?),
                    initial: Some(loc.initial.clone()),
                    slope_constant: Some(loc.slope_constant),
                    ..section
                });
            }
            Experiment::NormalForm => {
                let potential = self.potential()?;
                let violations = potential.validate();
                if !violations.is_empty() {
                    let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                    return Err(AppError::Invalid(msg.join("; ")));
                }
                let mut bnf = self.section(&self.normal_form, "normal-form")?.clone();
                bnf.validate()?;
                bnf.halo = Some(bnf.halo());
                self.normal_form = Some(bnf);
            }
            Experiment::Measure => {
                let potential = self.potential()?;
                let template = PotentialSpec {
                    theta: vec![0.0; potential.d],
                    alpha: vec![0.0; potential.d],
                    ..potential.clone()
                };
                let violations = template.validate();
                if !violations.is_empty() {
                    let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                    return Err(AppError::Invalid(msg.join("; ")));
                }
                let section = self.section(&self.measure, "measure")?;
                if section.samples < 100 {
                    return Err(AppError::Invalid(format!("S = {} is below the minimum of 100", section.samples)));
                }
                for &tau in std::iter::once(&section.tau).chain(&section.extra_taus) {
                    section.params(potential, tau)?;
                }
            }
            Experiment::Verify => {
                if self.verify.is_none() {
                    self.verify = Some(VerifySection::default());
                }
            }
        }
        Ok(self)
    }
}

/// Reads, parses and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&text)?.resolve()
}

/// As [`load_config`], for a known subcommand.
pub fn load_config_for(path: &Path, experiment: Experiment) -> Result<RunConfig, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml_for(&text, experiment)?.resolve()
}
