//! `qpnls`: localization experiments, normal form ledgers, resonant-set
//! measure estimates and the inequality verifiers.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qpnls::app::{run, Experiment, ReportFormat, RunConfig};

#[derive(Parser)]
#[command(name = "qpnls", version, about = "Long-time localization for quasi-periodic lattice NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate from tail-controlled data over random non-resonant phases
    /// and record the mass beyond j0 + M^2.
    Simulate(Common),
    /// Run the M-step normal form and write its norm ledger.
    NormalForm(Common),
    /// Monte Carlo estimate of the resonant set measure.
    Measure(Common),
    /// Run the built-in verifier battery (config optional).
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the configured `out`, else `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Caps the worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Format of the tabular outputs.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn load(experiment: Experiment, args: &Common) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_toml_for(&text, experiment).with_context(|| format!("loading {}", path.display()))?
        }
        None if experiment == Experiment::Verify => RunConfig::verify_default(),
        None => anyhow::bail!("`{}` needs --config", experiment.name()),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.workers {
        config.workers = Some(n);
    }
    if let Some(f) = args.format {
        config.format = match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        };
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    Ok(config.resolve()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::NormalForm(a) => (Experiment::NormalForm, a),
        Command::Measure(a) => (Experiment::Measure, a),
        Command::Verify(a) => (Experiment::Verify, a),
    };
    let result = load(experiment, args).and_then(|config| {
        let out = config
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
        Ok(run(&config, &out)?)
    });
    match result {
        Ok(outcome) => {
            let s = &outcome.summary;
            for e in &s.entries {
                let tag = match (e.pass, e.gating) {
                    (true, _) => "pass",
                    (false, true) => "FAIL",
                    (false, false) => "over",
                };
                println!("{tag:>4}  {:<60} {:>13.6e}  vs {:>13.6e}  ({})", e.name, e.measured, e.bound, e.bound_expr);
            }
            if let Some(err) = &s.error {
                eprintln!("error: {err} (partial artifacts in {})", outcome.out_dir.display());
            }
            println!("{} -> {}", if s.pass { "PASS" } else { "FAIL" }, outcome.out_dir.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
