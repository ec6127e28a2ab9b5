//! Dispatch of a resolved configuration to its experiment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::{localization_experiment, LocalizationReport};
use crate::lattice_poly::text::to_text;
use crate::normal_form::{run_bnf, BnfFailure, LedgerRow};
use crate::potential::PotentialSpec;
use crate::resonance::resonant_fractions;

use super::config::{Experiment, RunConfig};
use super::report::{write_file, write_summary, write_table, Summary, SummaryEntry};
use super::verify::verify_battery;
use super::AppError;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub summary: Summary,
}

impl RunOutcome {
    /// Exit status: 0 iff every gating entry passed and the run finished.
    pub fn exit_code(&self) -> i32 {
        if self.summary.pass {
            0
        } else {
            1
        }
    }
}

struct Collected {
    entries: Vec<SummaryEntry>,
    artifacts: Vec<String>,
    error: Option<String>,
}

/// Runs `config` (already resolved), writing every artifact into `out`.
///
/// Module failures do not return `Err`: they are recorded in `summary.json`
/// with `partial = true` next to whatever was computed, and the outcome
/// fails. `Err` is reserved for configuration and I/O problems.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunOutcome, AppError> {
    fs::create_dir_all(out).map_err(|e| AppError::Io(format!("{}: {e}", out.display())))?;
    write_file(out, "resolved-config.toml", config.to_toml().as_bytes())?;
    let job = || match config.experiment {
        Experiment::Simulate => simulate(config, out),
        Experiment::NormalForm => normal_form(config, out),
        Experiment::Measure => measure(config, out),
        Experiment::Verify => verify(config, out),
    };
    let collected = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::Invalid(format!("worker pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    let mut artifacts = vec!["resolved-config.toml".to_string()];
    artifacts.extend(collected.artifacts);
    let gates_ok = collected.entries.iter().filter(|e| e.gating).all(|e| e.pass);
    let summary = Summary {
        schema_version: config.schema_version,
        experiment: config.experiment.name().into(),
        seed: config.seed,
        pass: gates_ok && collected.error.is_none(),
        partial: collected.error.is_some(),
        error: collected.error,
        entries: collected.entries,
        artifacts,
    };
    write_summary(out, &summary)?;
    Ok(RunOutcome { out_dir: out.to_path_buf(), summary })
}

fn potential(config: &RunConfig) -> Result<&PotentialSpec, AppError> {
    config.potential.as_ref().ok_or_else(|| AppError::Invalid("missing [potential]".into()))
}

#[derive(Serialize)]
struct SampleRow {
    draw: u64,
    theta: String,
    alpha: String,
    min_divisor: f64,
    max_barrier_mass: f64,
    final_barrier_mass: f64,
    slope: f64,
    boundary_mass: f64,
    l2_drift: f64,
    energy_drift: f64,
    pass: bool,
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn simulate(config: &RunConfig, out: &Path) -> Result<Collected, AppError> {
    let section = config.simulate.as_ref().ok_or_else(|| AppError::Invalid("missing [simulate]".into()))?;
    let loc = section.localization(potential(config)?, config.seed);
    let report: LocalizationReport = match localization_experiment(&loc) {
        Ok(r) => r,
        Err(e) => return Ok(Collected { entries: Vec::new(), artifacts: Vec::new(), error: Some(e.to_string()) }),
    };
    let mut artifacts = Vec::new();
    for s in &report.samples {
        artifacts.push(write_table(out, &format!("trajectory-{:04}", s.draw), &s.trajectory, config.format)?);
        let name = format!("checkpoint-{:04}.txt", s.draw);
        write_file(out, &name, s.final_state.to_text().as_bytes())?;
        artifacts.push(name);
    }
    let rows: Vec<SampleRow> = report
        .samples
        .iter()
        .map(|s| SampleRow {
            draw: s.draw,
            theta: join(&s.theta),
            alpha: join(&s.alpha),
            min_divisor: s.min_divisor,
            max_barrier_mass: s.max_barrier_mass,
            final_barrier_mass: s.final_barrier_mass,
            slope: s.slope,
            boundary_mass: s.boundary_mass,
            l2_drift: s.l2_drift,
            energy_drift: s.energy_drift,
            pass: s.pass,
        })
        .collect();
    artifacts.push(write_table(out, "samples", &rows, config.format)?);

    let eps = loc.epsilon();
    let m = loc.m;
    let mut entries = vec![
        SummaryEntry::new(
            "non-resonant samples",
            report.samples.len() as f64,
            loc.samples as f64,
            "requested sample count",
            report.samples.len() >= loc.samples,
            true,
        ),
        SummaryEntry::new(
            "max barrier mass beyond j0+M^2",
            report.max_barrier_mass,
            report.mass_bound,
            "2 delta",
            report.max_barrier_mass < report.mass_bound,
            true,
        ),
        SummaryEntry::new(
            "fraction of samples below 2 delta",
            report.pass_fraction,
            1.0,
            "1",
            report.pass_fraction >= 1.0,
            true,
        ),
        SummaryEntry::new(
            "mass-growth slope",
            report.max_slope,
            report.slope_bound,
            format!("{} eps^(M+1)", loc.slope_constant),
            report.max_slope <= report.slope_bound,
            true,
        ),
        SummaryEntry::new(
            "mass-growth constant C",
            report.slope_constant,
            loc.slope_constant,
            "slope / eps^(M+1)",
            report.slope_constant <= loc.slope_constant,
            false,
        ),
    ];
    let l2 = report.samples.iter().map(|s| s.l2_drift).fold(0.0, f64::max);
    entries.push(SummaryEntry::new("l2 drift", l2, 1e-10, "1e-10 relative", l2 <= 1e-10, false));
    let boundary = report.samples.iter().map(|s| s.boundary_mass).fold(0.0, f64::max);
    entries.push(SummaryEntry::new(
        "mass in outermost 5 shells",
        boundary,
        1e-12,
        "1e-12",
        boundary <= 1e-12,
        false,
    ));
    entries.push(SummaryEntry::new(
        "t_end",
        report.t_end,
        loc.delta * eps.powi(-(m as i32)),
        "delta eps^-M",
        true,
        false,
    ));
    Ok(Collected { entries, artifacts, error: None })
}

#[derive(Serialize)]
struct LedgerCsvRow<'a> {
    step: u32,
    #[serde(rename = "norm-name")]
    name: &'a str,
    measured: f64,
    #[serde(rename = "paper-bound")]
    bound: f64,
    pass: bool,
}

fn ledger_rows(ledger: &[LedgerRow]) -> Vec<LedgerCsvRow<'_>> {
    ledger
        .iter()
        .map(|r| LedgerCsvRow { step: r.step, name: &r.name, measured: r.measured, bound: r.bound, pass: r.pass })
        .collect()
}

fn ledger_entries(ledger: &[LedgerRow]) -> Vec<SummaryEntry> {
    ledger
        .iter()
        .map(|r| {
            SummaryEntry::new(format!("step {}: {}", r.step, r.name), r.measured, r.bound, r.bound_expr.clone(), r.pass, r.gating)
        })
        .collect()
}

fn normal_form(config: &RunConfig, out: &Path) -> Result<Collected, AppError> {
    let bnf = config.normal_form.as_ref().ok_or_else(|| AppError::Invalid("missing [normal-form]".into()))?;
    match run_bnf(potential(config)?, bnf) {
        Ok(run) => {
            let artifacts = vec![
                write_table(out, "ledger", &ledger_rows(run.ledger()), config.format)?,
                {
                    write_file(out, "ztilde.poly", to_text(&run.state.z).as_bytes())?;
                    "ztilde.poly".to_string()
                },
                {
                    write_file(out, "rtilde.poly", to_text(&run.state.r).as_bytes())?;
                    "rtilde.poly".to_string()
                },
            ];
            Ok(Collected { entries: ledger_entries(run.ledger()), artifacts, error: None })
        }
        Err(BnfFailure { error, ledger }) => {
            let artifacts = vec![write_table(out, "ledger-partial", &ledger_rows(&ledger), config.format)?];
            Ok(Collected { entries: ledger_entries(&ledger), artifacts, error: Some(error.to_string()) })
        }
    }
}

#[derive(Serialize)]
struct MeasureRow {
    seed: u64,
    #[serde(rename = "S")]
    samples: usize,
    gamma: f64,
    #[serde(rename = "L")]
    scale: u32,
    #[serde(rename = "M")]
    m: u32,
    j0: u32,
    d: usize,
    tau: f64,
    fraction: f64,
    ci_halfwidth: f64,
}

fn measure(config: &RunConfig, out: &Path) -> Result<Collected, AppError> {
    let section = config.measure.as_ref().ok_or_else(|| AppError::Invalid("missing [measure]".into()))?;
    let pot = potential(config)?;
    let params = section.params(pot, section.tau)?;
    let taus: Vec<f64> = std::iter::once(section.tau).chain(section.extra_taus.iter().copied()).collect();
    let estimates = match resonant_fractions(&params, pot, &taus, section.samples, config.seed) {
        Ok(e) => e,
        Err(e) => return Ok(Collected { entries: Vec::new(), artifacts: Vec::new(), error: Some(e.to_string()) }),
    };
    let rows: Vec<MeasureRow> = estimates
        .iter()
        .map(|e| MeasureRow {
            seed: e.seed,
            samples: e.samples,
            gamma: section.gamma,
            scale: pot.scale,
            m: section.m,
            j0: section.j0,
            d: pot.d,
            tau: e.tau,
            fraction: e.fraction,
            ci_halfwidth: e.ci_halfwidth,
        })
        .collect();
    let artifacts = vec![write_table(out, "measure", &rows, config.format)?];
    let entries = estimates
        .iter()
        .enumerate()
        .map(|(i, e)| {
            SummaryEntry::new(
                format!("resonant fraction at tau={:e}", e.tau),
                e.fraction,
                section.gamma,
                format!("gamma, 95% Wilson interval [{:.6}, {:.6}]", e.wilson_lower, e.wilson_upper),
                e.wilson_upper <= section.gamma,
                i == 0,
            )
        })
        .collect();
    Ok(Collected { entries, artifacts, error: None })
}

fn verify(config: &RunConfig, out: &Path) -> Result<Collected, AppError> {
    let section = config.verify.clone().unwrap_or_default();
    let rows = match verify_battery(&section, config.seed) {
        Ok(r) => r,
        Err(e) => return Ok(Collected { entries: Vec::new(), artifacts: Vec::new(), error: Some(e.to_string()) }),
    };
    let artifacts = vec![write_table(out, "verify", &rows, config.format)?];
    let entries = rows
        .iter()
        .map(|r| SummaryEntry::new(format!("{}: {}", r.check, r.case), r.measured, r.bound, r.relation, r.pass, true))
        .collect();
    Ok(Collected { entries, artifacts, error: None })
}
