//! Time-one map of a generator acting on a Hamiltonian: `H ∘ X_F¹ = Σ_m ad_F^m(H)/m!`.

use std::f64::consts::E;

use num_complex::Complex64;

use crate::lattice_poly::poly::PRUNE_RELATIVE;
use crate::lattice_poly::{norm_in, Annulus, HamiltonianPoly, Monomial};

use super::BnfError;

/// Norm in which the contraction hypothesis `(e/σ)‖F‖ ≤ ½` is checked.
#[derive(Clone, Copy, Debug)]
pub struct WorkingNorm {
    pub annulus: Annulus,
    pub radius: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieReport {
    /// `(e/σ)‖F‖`.
    pub contraction: f64,
    /// Highest power of `ad_F` applied.
    pub order: u32,
    /// Guaranteed relative tail `ρ^{m+1}/(1−ρ)` at the stopping order.
    pub tail_bound: f64,
}

/// `Σ_{m ≥ 0} ad_F^m(H)/m!` with `ad_F(U) = {U, F}`.
///
/// Refuses unless `ρ = (e/σ)‖F‖ ≤ ½` in the working norm. The order is the
/// first `m` with `ρ^{m+1}/(1−ρ) ≤ tolerance` and a last term below
/// `tolerance·max|H|`, or earlier when a term prunes to nothing; each term is pruned against the scale of `H`. `keep` filters
/// every term before it is accumulated and iterated.
pub fn lie_transform(
    h: &HamiltonianPoly,
    f: &HamiltonianPoly,
    norm: &WorkingNorm,
    tolerance: f64,
    max_order: u32,
    keep: impl Fn(&Monomial) -> bool,
) -> Result<(HamiltonianPoly, LieReport), BnfError> {
    let rho = E / norm.sigma * norm_in(f, &norm.annulus, norm.radius);
    if rho > 0.5 {
        return Err(BnfError::Contraction { step: 0, lhs: rho, bound: 0.5 });
    }
    let mut out = h.truncate(&keep);
    if f.is_empty() {
        return Ok((out, LieReport { contraction: rho, order: 0, tail_bound: 0.0 }));
    }
    let floor = PRUNE_RELATIVE * h.max_abs();
    let mut term = out.clone();
    let mut order = 0;
    let mut tail = rho / (1.0 - rho);
    let scale = h.max_abs();
    while order < max_order {
        order += 1;
        let mut next = term.bracket(f)?.scale(Complex64::new(1.0 / order as f64, 0.0));
        next.prune_below(floor);
        next = next.truncate(&keep);
        tail *= rho;
        if next.is_empty() {
            tail = 0.0;
            term = next;
            break;
        }
        out.add_scaled_in_place(Complex64::new(1.0, 0.0), &next);
        let small = next.max_abs() <= tolerance * scale;
        term = next;
        // the bound only sees the annulus; also wait for the term itself to fade
        if tail <= tolerance && small {
            break;
        }
    }
    out.prune_below(floor);
    if tail > tolerance || term.max_abs() > tolerance * scale {
        return Err(BnfError::LieNotConverged { order, tail });
    }
    Ok((out, LieReport { contraction: rho, order, tail_bound: tail }))
}
