//! The Hamiltonian `D + Z₁ + R₁` and the homological equation.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::lattice_poly::{BoxGeometry, HamiltonianPoly, Monomial, MultiIndex};
use crate::potential::PotentialSpec;

use super::BnfError;

/// `H = D + Z + R` with `D = ½ Σ V_j |q_j|²` and the frequencies `V_j`.
#[derive(Clone, Debug)]
pub struct SplitHamiltonian {
    pub diagonal: HamiltonianPoly,
    pub z: HamiltonianPoly,
    pub r: HamiltonianPoly,
    pub omega: BTreeMap<MultiIndex, f64>,
}

/// `D = ½ Σ V_j |q_j|²`, `Z₁ = (ε₂/4) Σ |q_j|⁴` and
/// `R₁ = (ε₁/2) Σ_{|i−j|₁=1} q_i q̄_j` over the bonds inside `sites`.
pub fn build_hamiltonian(spec: &PotentialSpec, sites: &BoxGeometry, epsilon1: f64, epsilon2: f64) -> SplitHamiltonian {
    let dim = sites.dim();
    let omega: BTreeMap<MultiIndex, f64> = sites.sites().map(|j| {
        let v = spec.eval(&j);
        (j, v)
    }).collect();
    let real = |x: f64| Complex64::new(x, 0.0);
    let diagonal = HamiltonianPoly::from_terms(
        dim,
        omega.iter().map(|(j, &v)| (Monomial::modulus_power(j.clone(), 1), real(0.5 * v))),
    )
    .expect("box sites share the dimension");
    let z = HamiltonianPoly::from_terms(
        dim,
        omega.keys().map(|j| (Monomial::modulus_power(j.clone(), 2), real(0.25 * epsilon2))),
    )
    .expect("box sites share the dimension");
    let mut bonds = Vec::new();
    for j in omega.keys() {
        for axis in 0..dim {
            let k = j.offset(axis, 1);
            if sites.contains(&k) {
                bonds.push((Monomial::hop(j.clone(), k.clone()), real(0.5 * epsilon1)));
                bonds.push((Monomial::hop(k, j.clone()), real(0.5 * epsilon1)));
            }
        }
    }
    let r = HamiltonianPoly::from_terms(dim, bonds).expect("box sites share the dimension");
    SplitHamiltonian { diagonal, z, r, omega }
}

/// Generator `F` with `{D, F} + R_sel = 0` for the non-resonant part of
/// `R_sel`, and the resonant part that passes through unchanged.
///
/// Since `{W, D} = (i/2) Σ_j (n_j − n'_j) V_j · W` on monomials, the solution
/// is `F(n) = −2i R(n) / Σ_j (n_j − n'_j) V_j`.
pub fn solve_homological(
    rsel: &HamiltonianPoly,
    omega: &BTreeMap<MultiIndex, f64>,
    tau: f64,
) -> Result<(HamiltonianPoly, HamiltonianPoly), BnfError> {
    let (resonant, nonres) = rsel.resonant_split();
    let mut terms = Vec::with_capacity(nonres.len());
    for (m, &c) in nonres.iter() {
        let div = m
            .divisor(|j| omega.get(j).copied())
            .ok_or_else(|| BnfError::MissingFrequency(m.to_string()))?;
        if !(div.abs() >= tau) || div == 0.0 {
            return Err(BnfError::SmallDivisor {
                step: 0,
                monomial: m.to_string(),
                divisor: div,
                tau,
            });
        }
        terms.push((m.clone(), Complex64::new(0.0, -2.0) * c / div));
    }
    let f = HamiltonianPoly::from_terms(rsel.dim(), terms).expect("dimension preserved");
    Ok((f, resonant))
}

/// `L_V W := {W, D}`, which multiplies each monomial by `(i/2)` times its divisor.
pub fn lie_derivative(w: &HamiltonianPoly, omega: &BTreeMap<MultiIndex, f64>) -> Option<HamiltonianPoly> {
    let freq = |j: &MultiIndex| omega.get(j).copied();
    if w.iter().any(|(m, _)| m.divisor(freq).is_none()) {
        return None;
    }
    Some(w.map_coeffs(|m, c| {
        let div = m.divisor(freq).unwrap_or(0.0);
        Complex64::new(0.0, 0.5 * div) * c
    }))
}
