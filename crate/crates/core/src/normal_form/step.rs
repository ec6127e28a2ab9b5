//! One normal form step, the full iteration, and the per-step norm ledger.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::lattice_poly::{norm_in, Annulus, BoxGeometry, HamiltonianPoly, Monomial, MultiIndex};
use crate::potential::PotentialSpec;
use crate::resonance::{for_each_divisor_index, ResonanceParams};

use super::classify::{classify_remainder, RemainderParts};
use super::homological::{build_hamiltonian, solve_homological};
use super::lie::{lie_transform, WorkingNorm};
use super::{BnfConfig, BnfError};

/// Relative tolerance for the homological identity `{F, D} = R_sel`.
pub const HOMOLOGICAL_TOLERANCE: f64 = 1e-12;
/// Relative size allowed for `{H, Σ|q_j|²}`.
pub const GAUGE_TOLERANCE: f64 = 1e-14;
/// Relative drift allowed in the diagonal `½ V_j` coefficients.
pub const DIAGONAL_TOLERANCE: f64 = 1e-13;

/// One measured quantity against its bound.
///
/// `gating` rows decide success; the others record how the run compares with
/// bounds that are asymptotic in `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerRow {
    pub step: u32,
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub bound_expr: String,
    pub pass: bool,
    pub gating: bool,
}

impl LedgerRow {
    fn at_most(step: u32, name: impl Into<String>, measured: f64, bound: f64, expr: impl Into<String>, gating: bool) -> Self {
        LedgerRow {
            step,
            name: name.into(),
            measured,
            bound,
            bound_expr: expr.into(),
            pass: measured <= bound,
            gating,
        }
    }

    fn at_least(step: u32, name: impl Into<String>, measured: f64, bound: f64, expr: impl Into<String>, gating: bool) -> Self {
        LedgerRow {
            pass: measured >= bound,
            ..LedgerRow::at_most(step, name, measured, bound, expr, gating)
        }
    }
}

/// `H_s = D + Z_s + R_s` after `s − 1` steps.
#[derive(Clone, Debug)]
pub struct BnfState {
    pub s: u32,
    pub diagonal: HamiltonianPoly,
    pub z: HamiltonianPoly,
    pub r: HamiltonianPoly,
    pub omega: BTreeMap<MultiIndex, f64>,
    pub ledger: Vec<LedgerRow>,
    /// Smallest divisor met by any generator so far.
    pub min_divisor: f64,
}

impl BnfState {
    pub fn new(diagonal: HamiltonianPoly, z: HamiltonianPoly, r: HamiltonianPoly, omega: BTreeMap<MultiIndex, f64>) -> Self {
        BnfState { s: 1, diagonal, z, r, omega, ledger: Vec::new(), min_divisor: f64::INFINITY }
    }

    pub fn hamiltonian(&self) -> HamiltonianPoly {
        let mut h = self.diagonal.clone();
        h.add_scaled_in_place(Complex64::new(1.0, 0.0), &self.z);
        h.add_scaled_in_place(Complex64::new(1.0, 0.0), &self.r);
        h
    }
}

fn barrier(config: &BnfConfig) -> Annulus {
    Annulus::new(config.j0 as f64, (config.m * config.m) as f64)
}

fn geometric(s: u32) -> f64 {
    (0..=s).map(|i| 0.5f64.powi(i as i32)).sum()
}

/// Norms of the `Δ(n)+|n|₁ = A` slices of `Z + R`, for each `A ≥ 3` present.
fn slice_rows(step: u32, prefix: &str, z: &HamiltonianPoly, r: &HamiltonianPoly, config: &BnfConfig, radius: f64) -> Vec<LedgerRow> {
    let eps = config.epsilon();
    let annulus = barrier(config);
    let mut sizes: Vec<u32> = z.iter().chain(r.iter()).map(|(m, _)| m.size_class()).filter(|&a| a >= 3).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|a| {
            let measured = norm_in(&z.truncate(|m| m.size_class() == a), &annulus, radius)
                + norm_in(&r.truncate(|m| m.size_class() == a), &annulus, radius);
            LedgerRow::at_most(
                step,
                format!("{prefix}slice[A={a}]"),
                measured,
                eps.powf(1.0 + 0.9 * (a as f64 - 3.0)),
                "eps^(1+0.9(A-3))",
                false,
            )
        })
        .collect()
}

/// Performs step `state.s`: eliminates the non-resonant terms of `R_s` that
/// meet `A(j0, N_{s+1})` with `Δ(n)+|n|₁ ≤ s + 2`, then re-splits
/// `H_s ∘ X_{F_s}¹ − D` into resonant `Z_{s+1}` and remainder `R_{s+1}`.
pub fn bnf_step(state: BnfState, config: &BnfConfig) -> Result<BnfState, BnfError> {
    let s = state.s;
    let eps = config.epsilon();
    let sigma = config.sigma();
    let r_in = config.radius(s - 1);
    let r_out = config.radius(s);
    let big = barrier(config);
    let select = Annulus::new(config.j0 as f64, config.n_schedule(s + 1) as f64);
    let cap = s + config.size_cap_offset;
    let mut ledger = state.ledger.clone();

    let rsel = state.r.truncate(|n| n.meets(&select) && n.size_at_most(cap));
    let (f, _) = solve_homological(&rsel, &state.omega, config.tau).map_err(|e| e.at_step(s))?;
    let mut min_divisor = state.min_divisor;
    for (m, _) in f.iter() {
        if let Some(div) = m.divisor(|j| state.omega.get(j).copied()) {
            min_divisor = min_divisor.min(div.abs());
        }
    }

    let (_, nonres) = rsel.resonant_split();
    let residual = f.bracket(&state.diagonal)?.sub(&nonres)?;
    let scale = norm_in(&rsel, &big, r_in);
    let rel = if scale > 0.0 { norm_in(&residual, &big, r_in) / scale } else { 0.0 };
    ledger.push(LedgerRow::at_most(s, "homological-residual", rel, HOMOLOGICAL_TOLERANCE, "1e-12 relative", true));

    let f_norm = norm_in(&f, &big, r_in);
    ledger.push(LedgerRow::at_most(s, "norm(F)", f_norm, eps.powf(0.9 * s as f64), "eps^(0.9s)", false));
    let contraction = E / sigma * f_norm;
    ledger.push(LedgerRow::at_most(s, "contraction", contraction, 0.5, "(e/sigma)||F|| <= 1/2", true));
    if contraction > 0.5 {
        return Err(BnfError::Contraction { step: s, lhs: contraction, bound: 0.5 });
    }

    let h = state.hamiltonian();
    let norm = WorkingNorm { annulus: big, radius: r_in, sigma };
    let (h_new, _report) = lie_transform(&h, &f, &norm, config.lie_tolerance, config.lie_max_order, |_| true)
        .map_err(|e| e.at_step(s))?;

    let rest = h_new.sub(&state.diagonal)?.without_constant();
    let (z, r) = rest.resonant_split();

    // {H, Σ|q_j|²} vanishes for gauge-invariant H
    let mass = HamiltonianPoly::from_terms(
        h_new.dim(),
        state.omega.keys().map(|j| (Monomial::modulus_power(j.clone(), 1), Complex64::new(1.0, 0.0))),
    )?;
    let gauge = h_new.bracket(&mass)?.max_abs() / h_new.max_abs().max(f64::MIN_POSITIVE);
    ledger.push(LedgerRow::at_most(s, "gauge", gauge, GAUGE_TOLERANCE, "||{H, sum|q|^2}|| relative", true));

    let vmax = state.omega.values().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let diag_drift = state
        .omega
        .iter()
        .map(|(j, v)| {
            let m = Monomial::modulus_power(j.clone(), 1);
            (h_new.coeff(&m) - z.coeff(&m) - Complex64::new(0.5 * v, 0.0)).norm()
        })
        .fold(0.0, f64::max)
        / vmax;
    ledger.push(LedgerRow::at_most(s, "diagonal", diag_drift, DIAGONAL_TOLERANCE, "D unchanged, 1e-13 relative", true));

    let zb = eps.powf(0.9) * geometric(s);
    ledger.push(LedgerRow::at_most(s, "norm(Z)", norm_in(&z, &big, r_out), zb, "eps^0.9 sum_{i<=s} 2^-i", false));
    ledger.push(LedgerRow::at_most(s, "norm(R)", norm_in(&r, &big, r_out), zb, "eps^0.9 sum_{i<=s} 2^-i", false));
    let next = Annulus::new(config.j0 as f64, config.n_schedule(s + 2).max(0) as f64);
    let rcal = norm_in(&r.truncate(|n| n.meets(&next)), &big, r_out);
    let rcal_bound = eps.powf(1.0 + 0.9 * s as f64);
    ledger.push(LedgerRow::at_most(s, "norm(Rcal)", rcal, rcal_bound, "eps^(1+0.9s)", false));
    if eps > 0.0 && eps < 1.0 {
        let exponent = if rcal > 0.0 { rcal.ln() / eps.ln() } else { f64::INFINITY };
        ledger.push(LedgerRow::at_least(s, "exponent(Rcal)", exponent, 1.0 + 0.9 * s as f64, "1+0.9s", false));
    }
    let residue = norm_in(
        &r.truncate(|n| n.meets(&select) && n.size_at_most(cap)),
        &big,
        r_out,
    );
    ledger.push(LedgerRow::at_most(s, "selection-residue", residue, rcal_bound, "eps^(1+0.9s)", false));
    ledger.extend(slice_rows(s, "", &z, &r, config, r_out));

    Ok(BnfState {
        s: s + 1,
        diagonal: state.diagonal,
        z,
        r,
        omega: state.omega,
        ledger,
        min_divisor,
    })
}

/// Outcome of a complete run.
#[derive(Clone, Debug)]
pub struct BnfRun {
    pub state: BnfState,
    pub parts: RemainderParts,
    pub geometry: BoxGeometry,
}

impl BnfRun {
    pub fn ledger(&self) -> &[LedgerRow] {
        &self.state.ledger
    }

    /// Every gating row passes.
    pub fn passed(&self) -> bool {
        self.state.ledger.iter().filter(|r| r.gating).all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&LedgerRow> {
        self.state.ledger.iter().find(|r| r.name == name)
    }
}

/// A failed run with the ledger rows recorded before the failure.
#[derive(Clone, Debug)]
pub struct BnfFailure {
    pub error: BnfError,
    pub ledger: Vec<LedgerRow>,
}

impl fmt::Display for BnfFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} ledger rows recorded)", self.error, self.ledger.len())
    }
}

impl std::error::Error for BnfFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<BnfError> for BnfFailure {
    fn from(error: BnfError) -> Self {
        BnfFailure { error, ledger: Vec::new() }
    }
}

/// Divisors `Σ k_j V_j` over the whole index family, checked against `tau`.
fn prescan(spec: &PotentialSpec, config: &BnfConfig, omega: &BTreeMap<MultiIndex, f64>) -> Result<(), BnfError> {
    let params = ResonanceParams {
        gamma: 0.5,
        scale: spec.scale,
        m: config.m,
        j0: config.j0,
        d: spec.d,
        tau: config.tau,
        proof_scale: false,
        cap: crate::resonance::DEFAULT_ENUMERATION_CAP,
    };
    let mut failure: Option<BnfError> = None;
    for_each_divisor_index(&params, |k| {
        if failure.is_some() {
            return;
        }
        match k.value(|j| omega.get(j).copied()) {
            Ok(v) if params.violates(v) => {
                failure = Some(BnfError::Resonant { k: k.to_string(), value: v, tau: config.tau })
            }
            Ok(_) => {}
            Err(_) => {
                failure = Some(BnfError::BoxTooSmall(format!("divisor index {k} leaves the box")))
            }
        }
    })?;
    failure.map_or(Ok(()), Err)
}

/// Builds `H₁ = D + Z₁ + R₁` on the box `[−(j0+M²+halo), j0+M²+halo]^d`,
/// applies `M` steps and evaluates the final bounds at radius `r/2`.
pub fn run_bnf(spec: &PotentialSpec, config: &BnfConfig) -> Result<BnfRun, BnfFailure> {
    config.validate()?;
    let violations = spec.validate();
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(BnfError::InvalidConfig(msg.join("; ")).into());
    }
    let geometry = BoxGeometry::cube(spec.d, config.box_reach() as i32);
    let h1 = build_hamiltonian(spec, &geometry, config.epsilon1, config.epsilon2);
    if config.prescan {
        prescan(spec, config, &h1.omega)?;
    }

    let eps = config.epsilon();
    let big = barrier(config);
    let mut state = BnfState::new(h1.diagonal, h1.z, h1.r, h1.omega);
    let perturbation = norm_in(&state.z, &big, config.r) + norm_in(&state.r, &big, config.r);
    state.ledger.push(LedgerRow::at_most(0, "norm(H1-D)", perturbation, eps.powf(0.99), "eps^0.99", false));
    state.ledger.extend(slice_rows(0, "", &state.z, &state.r, config, config.r));

    for _ in 0..config.m {
        let s = state.s;
        let ledger = state.ledger.clone();
        state = bnf_step(state, config).map_err(|error| BnfFailure {
            error,
            ledger: ledger.clone(),
        })?;
        debug_assert_eq!(state.s, s + 1);
    }

    let fin = config.m + 1;
    let half = config.r / 2.0;
    let m = config.m;
    let parts = classify_remainder(&state.r, config.j0, m);
    let mut rows = vec![
        LedgerRow::at_most(fin, "final norm(Ztilde)", norm_in(&state.z, &big, half), 2.0 * eps.powf(0.9), "2 eps^0.9", true),
        LedgerRow::at_most(fin, "final norm(Rtilde)", norm_in(&state.r, &big, half), 2.0 * eps.powf(0.9), "2 eps^0.9", true),
        LedgerRow::at_most(
            fin,
            "final norm(Rcal-tilde)",
            norm_in(&parts.meets_barrier, &big, half),
            eps.powf(0.9 * m as f64),
            "eps^(0.9M)",
            true,
        ),
    ];
    rows.extend(slice_rows(fin, "final ", &state.z, &state.r, config, half));
    let near = norm_in(&parts.meets_barrier, &big, half) + norm_in(&parts.long_range, &big, half);
    rows.push(LedgerRow::at_most(fin, "final norm(R1+R2)", near, eps.powf(m as f64 + 1.0), "eps^(M+1)", false));
    rows.push(LedgerRow::at_most(
        fin,
        "flux-violations",
        parts.flux_violations.len() as f64,
        0.0,
        "sum_{|j|>j0}(n_j-n'_j) = 0 on short-range terms",
        true,
    ));
    if state.min_divisor.is_finite() {
        rows.push(LedgerRow::at_least(fin, "min-divisor", state.min_divisor, config.tau, "tau", false));
        if eps > 0.0 {
            rows.push(LedgerRow::at_least(
                fin,
                "min-divisor/eps^0.01",
                state.min_divisor / eps.powf(0.01),
                1.0,
                "1",
                false,
            ));
        }
    }
    state.ledger.extend(rows);
    Ok(BnfRun { state, parts, geometry })
}
