//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs as a plain binary (`harness = false`) so the lines appear on every
//! `cargo test` without `--nocapture`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qpnls::app::verify::verify_battery;
use qpnls::app::{run, Experiment, RunConfig};
use qpnls::app::config::VerifySection;
use qpnls::dynamics::{mass, Integrator, LatticeState};
use qpnls::lattice_poly::{norm_in, Annulus, BoxGeometry, MultiIndex};
use qpnls::normal_form::{build_hamiltonian, run_bnf, solve_homological, BnfConfig, BnfRun};
use qpnls::potential::{FrequencyTerm, PotentialSpec};
use qpnls::resonance::{estimate_resonant_measure, ResonanceParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{naive_bracket, random_poly, relative_mismatch, site_pool};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn chain(v: f64) -> PotentialSpec {
    PotentialSpec {
        d: 1,
        scale: 1,
        terms: vec![FrequencyTerm { ell: MultiIndex::d1(1), v }],
        theta: vec![0.2],
        alpha: vec![golden()],
    }
}

fn c1_bracket_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let d = 1 + i % 2;
        let sites = rng.random_range(1..=6);
        let pool = site_pool(&mut rng, d, -3, 3, sites);
        let nw = rng.random_range(1..=8);
        let nu = rng.random_range(1..=8);
        let w = random_poly(&mut rng, d, &pool, nw, 4);
        let u = random_poly(&mut rng, d, &pool, nu, 4);
        let fast = w.bracket(&u).unwrap();
        worst = worst.max(relative_mismatch(&fast, &naive_bracket(&w, &u)));
    }
    outcome(worst <= 1e-12, format!("1000 pairs, worst relative mismatch {worst:.2e} (tol 1e-12)"))
}

fn c2_bracket_estimate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let mut tightest = 0.0f64;
    for i in 0..1000 {
        let d = 1 + i % 2;
        let (j0, n) = (4u32, 1u32);
        let annulus = Annulus::new(j0 as f64, n as f64);
        let inside = annulus.sites(d);
        let w_pool: Vec<MultiIndex> = (0..rng.random_range(1..=4))
            .map(|_| inside[rng.random_range(0..inside.len())].clone())
            .collect();
        let mut u_pool = w_pool.clone();
        u_pool.extend(site_pool(&mut rng, d, -7, 7, 3));
        let (nw, nu) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let w = random_poly(&mut rng, d, &w_pool, nw, 4);
        let u = random_poly(&mut rng, d, &u_pool, nu, 4);
        let r = rng.random_range(2.5..4.0);
        let sigma = rng.random_range(0.05..(r - 2.0));
        let lhs = norm_in(&w.bracket(&u).unwrap(), &annulus, r - sigma);
        let rhs = norm_in(&w, &annulus, r) * norm_in(&u, &annulus, r) / sigma;
        if lhs > rhs {
            failures += 1;
        }
        if rhs > 0.0 {
            tightest = tightest.max(lhs / rhs);
        }
    }
    outcome(failures == 0, format!("1000 instances, {failures} violations, largest lhs/rhs {tightest:.3}"))
}

fn regression_spec() -> PotentialSpec {
    chain(10.0)
}

fn regression_config() -> BnfConfig {
    BnfConfig::new(2, 12, 2.1, 9e-4, 1e-4, 1e-6)
}

fn c3_homological(run: &BnfRun) -> Outcome {
    let rows: Vec<_> = run.ledger().iter().filter(|r| r.name == "homological-residual").collect();
    let worst_ledger = rows.iter().map(|r| r.measured).fold(0.0, f64::max);
    // independent recheck of the first step with the dense bracket
    let spec = regression_spec();
    let cfg = regression_config();
    let geo = BoxGeometry::cube(1, cfg.box_reach() as i32);
    let h = build_hamiltonian(&spec, &geo, cfg.epsilon1, cfg.epsilon2);
    let barrier = Annulus::new(cfg.j0 as f64, (cfg.m * cfg.m) as f64);
    let selected = h.r.truncate(|m| m.meets(&barrier));
    let (f, _) = solve_homological(&selected, &h.omega, cfg.tau).unwrap();
    let oracle = naive_bracket(&f, &h.diagonal);
    let mismatch = relative_mismatch(&selected, &oracle);
    let pass = rows.len() == cfg.m as usize && rows.iter().all(|r| r.pass) && mismatch <= 1e-12;
    outcome(
        pass,
        format!("{} steps, ledger residual max {worst_ledger:.2e}, dense recheck {mismatch:.2e} (tol 1e-12)", rows.len()),
    )
}

fn c4_flux(run: &BnfRun) -> Outcome {
    let cfg = regression_config();
    let j0 = cfg.j0 as f64;
    let half = (cfg.m * cfg.m) as f64 / 2.0;
    let reach = (cfg.m + 3) as f64;
    let mut short = 0;
    let mut violations = 0;
    for (mono, _) in run.state.r.iter() {
        let sites: Vec<&MultiIndex> = mono.support().collect();
        let meets = sites.iter().any(|j| (j.norm() - j0).abs() <= half);
        let diameter = sites
            .iter()
            .flat_map(|a| sites.iter().map(move |b| a.dist(b)))
            .fold(0.0, f64::max);
        if meets || diameter > reach {
            continue;
        }
        short += 1;
        let flux: i64 = mono
            .entries()
            .iter()
            .filter(|(j, _)| j.norm() > j0)
            .map(|(_, e)| e.q as i64 - e.qbar as i64)
            .sum();
        if flux != 0 {
            violations += 1;
        }
    }
    let agree = short == run.parts.short_range.len() && run.parts.flux_violations.is_empty();
    outcome(
        violations == 0 && agree,
        format!("{short} short-range monomials, {violations} with nonzero outward flux"),
    )
}

fn c5_ledger(run: &BnfRun) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["final norm(Ztilde)", "final norm(Rtilde)", "final norm(Rcal-tilde)"] {
        match run.row(name) {
            Some(r) => {
                parts.push(format!("{name} {:.3e} <= {:.3e} {}", r.measured, r.bound, if r.pass { "ok" } else { "over" }));
                pass &= r.pass;
            }
            None => {
                parts.push(format!("{name} missing"));
                pass = false;
            }
        }
    }
    pass &= run.passed();
    outcome(pass, parts.join("; "))
}

fn c6_conservation() -> Outcome {
    let geo = BoxGeometry::new(vec![0], vec![255]).unwrap();
    let integ = Integrator::new(&chain(1.0), geo.clone(), 0.1, 0.1, 0.01);
    let mut s = LatticeState::from_fn(geo, |j| {
        let x = j.coords()[0] as f64;
        Complex64::new((0.3 * x).sin(), (0.7 * x).cos())
    });
    let m0 = mass(&s);
    integ.advance(&mut s, 1_000_000);
    let drift = (mass(&s) - m0).abs() / m0;
    outcome(drift <= 1e-10, format!("256 sites, 1e6 steps, relative drift {drift:.2e} (tol 1e-10)"))
}

/// `e^{−iAt} q0` for `A = [[V0, e], [e, V1]]`.
fn two_site_exact(v0: f64, v1: f64, e: f64, t: f64, q0: [Complex64; 2]) -> [Complex64; 2] {
    let mu = 0.5 * (v0 + v1);
    let delta = 0.5 * (v0 - v1);
    let omega = (delta * delta + e * e).sqrt();
    let (c, s) = ((omega * t).cos(), (omega * t).sin() / omega);
    let i = Complex64::new(0.0, 1.0);
    let phase = (-i * mu * t).exp();
    [
        phase * (c * q0[0] - i * s * (delta * q0[0] + e * q0[1])),
        phase * (c * q0[1] - i * s * (e * q0[0] - delta * q0[1])),
    ]
}

fn c7_order() -> Outcome {
    let geo = BoxGeometry::new(vec![0], vec![1]).unwrap();
    let e1 = 0.5;
    let t_end = 2.0;
    let q0 = [Complex64::new(0.8, 0.1), Complex64::new(-0.2, 0.55)];
    let error = |dt: f64| {
        let integ = Integrator::new(&chain(1.0), geo.clone(), e1, 0.0, dt);
        let v = integ.potential().to_vec();
        let mut s = LatticeState::new(geo.clone(), q0.to_vec()).unwrap();
        integ.advance(&mut s, (t_end / dt).round() as u64);
        let exact = two_site_exact(v[0], v[1], e1, t_end, q0);
        s.amplitudes().iter().zip(exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    };
    let (coarse, fine) = (error(0.02), error(0.01));
    let ratio = coarse / fine;
    outcome(
        (3.5..=4.5).contains(&ratio),
        format!("error {coarse:.3e} at dt=0.02, {fine:.3e} at dt=0.01, ratio {ratio:.3} (want [3.5, 4.5])"),
    )
}

const SIMULATE_TOML: &str = r#"
schema_version = 1
experiment = "simulate"
seed = 2024

[potential]
d = 1
L = 1
terms = [{ ell = [1], v = 1.0 }]

[simulate]
epsilon1 = 0.05
epsilon2 = 0.05
j0 = 12
M = 2
delta = 0.01
tau = 1e-6
samples = 20
"#;

fn simulate_into(dir: &Path) -> qpnls::app::RunOutcome {
    let config = RunConfig::from_toml_for(SIMULATE_TOML, Experiment::Simulate).unwrap().resolve().unwrap();
    run(&config, dir).unwrap()
}

fn c8_localization(dir: &Path) -> Outcome {
    let out = simulate_into(dir);
    let detail: Vec<String> = out
        .summary
        .entries
        .iter()
        .filter(|e| e.gating)
        .map(|e| format!("{} {:.3e} vs {:.3e}", e.name, e.measured, e.bound))
        .collect();
    let samples = fs::read_dir(dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("trajectory-"))
        .count();
    outcome(out.summary.pass && samples >= 20, format!("{samples} samples; {}", detail.join("; ")))
}

fn c9_measure() -> Outcome {
    let params = ResonanceParams::new(0.1, 1, 2, 20, 1, 1e-6).unwrap();
    let est = estimate_resonant_measure(&params, &chain(1.0), 10_000, 9).unwrap();
    outcome(
        est.wilson_upper <= 0.1,
        format!(
            "fraction {:.2e}, 95% Wilson [{:.2e}, {:.2e}] vs gamma 0.1",
            est.fraction, est.wilson_lower, est.wilson_upper
        ),
    )
}

fn c10_verifiers() -> Outcome {
    let rows = verify_battery(&VerifySection::default(), 0).unwrap();
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{} {}", r.check, r.case)).collect();
    let by_check = |c: &str| rows.iter().filter(|r| r.check == c).count();
    outcome(
        failed.is_empty(),
        format!(
            "{} rows (bgg85 {}, km98 {}, sw23 {}); failed: {}",
            rows.len(),
            by_check("bgg85"),
            by_check("km98"),
            by_check("sw23"),
            if failed.is_empty() { "none".into() } else { failed.join(", ") }
        ),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn c11_reproducible(first: &Path) -> Outcome {
    let second = tempfile::tempdir().unwrap();
    simulate_into(second.path());
    let (a, b) = (csv_files(first), csv_files(second.path()));
    let same = !a.is_empty() && a == b;
    outcome(same, format!("{} csv files compared, identical: {same}", a.len()))
}

fn report(label: &str, elapsed: Duration, o: &Outcome) -> bool {
    println!(
        "{} {label} [{:.2}s] {}",
        if o.pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        o.detail
    );
    o.pass
}

fn timed(f: impl FnOnce() -> Outcome) -> (Duration, Outcome) {
    let t = Instant::now();
    let o = f();
    (t.elapsed(), o)
}

fn main() {
    let mut all = true;
    let (t, o) = timed(c1_bracket_oracle);
    all &= report("c1 bracket matches dense oracle", t, &o);
    let (t, o) = timed(c2_bracket_estimate);
    all &= report("c2 bracket norm estimate", t, &o);

    let t = Instant::now();
    let bnf = run_bnf(&regression_spec(), &regression_config());
    let bnf_time = t.elapsed();
    match &bnf {
        Ok(run) => {
            let (t, o) = timed(|| c3_homological(run));
            all &= report("c3 homological exactness", t, &o);
            let (t, o) = timed(|| c4_flux(run));
            all &= report("c4 flux cancellation", t, &o);
            all &= report("c5 normal form ledger", bnf_time, &c5_ledger(run));
        }
        Err(e) => {
            let o = outcome(false, format!("normal form run failed: {e}"));
            all &= report("c3 homological exactness", bnf_time, &o);
            all &= report("c4 flux cancellation", bnf_time, &o);
            all &= report("c5 normal form ledger", bnf_time, &o);
        }
    }

    let (t, o) = timed(c6_conservation);
    all &= report("c6 l2 conservation", t, &o);
    let (t, o) = timed(c7_order);
    all &= report("c7 integrator order", t, &o);
    let first = tempfile::tempdir().unwrap();
    let (t, o) = timed(|| c8_localization(first.path()));
    all &= report("c8 localization experiment", t, &o);
    let (t, o) = timed(c9_measure);
    all &= report("c9 resonant measure", t, &o);
    let (t, o) = timed(c10_verifiers);
    all &= report("c10 inequality verifiers", t, &o);
    let (t, o) = timed(|| c11_reproducible(first.path()));
    all &= report("c11 reproducibility", t, &o);

    println!("acceptance: {}", if all { "PASS" } else { "FAIL" });
    if !all {
        std::process::exit(1);
    }
}
