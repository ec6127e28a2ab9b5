//! Splitting of the final remainder by position relative to the barrier.

use crate::lattice_poly::{Annulus, HamiltonianPoly, Monomial};

/// `R̃ = R⁽¹⁾ + R⁽²⁾ + R⁽³⁾`.
#[derive(Clone, Debug)]
pub struct RemainderParts {
    /// Terms meeting `A(j0, M²/2)`.
    pub meets_barrier: HamiltonianPoly,
    /// Terms missing the barrier with `Δ(n) > M + 3`.
    pub long_range: HamiltonianPoly,
    /// Terms missing the barrier with `Δ(n) ≤ M + 3`.
    pub short_range: HamiltonianPoly,
    /// Short-range monomials whose mass flux out of `|j| ≤ j0` is nonzero.
    pub flux_violations: Vec<(Monomial, i64)>,
}

/// `Σ_{|j| > j0} (n_j − n'_j)`.
pub fn outward_flux(m: &Monomial, j0: f64) -> i64 {
    m.charge_where(|j| j.norm() > j0)
}

pub fn classify_remainder(rt: &HamiltonianPoly, j0: u32, m: u32) -> RemainderParts {
    let barrier = Annulus::new(j0 as f64, (m * m) as f64 / 2.0);
    let reach_sq = ((m + 3) as i64).pow(2);
    let meets_barrier = rt.truncate(|n| n.meets(&barrier));
    let long_range = rt.truncate(|n| !n.meets(&barrier) && n.delta_sq() > reach_sq);
    let short_range = rt.truncate(|n| !n.meets(&barrier) && n.delta_sq() <= reach_sq);
    let flux_violations = short_range
        .iter()
        .map(|(n, _)| (n.clone(), outward_flux(n, j0 as f64)))
        .filter(|(_, f)| *f != 0)
        .collect();
    RemainderParts { meets_barrier, long_range, short_range, flux_violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_poly::MultiIndex;
    use num_complex::Complex64;

    fn s(j: i32) -> MultiIndex {
        MultiIndex::d1(j)
    }

    #[test]
    fn parts_partition() {
        let one = Complex64::new(1.0, 0.0);
        let rt = HamiltonianPoly::from_terms(
            1,
            [
                (Monomial::hop(s(0), s(1)), one),
                (Monomial::hop(s(11), s(12)), one),
                (Monomial::hop(s(3), s(20)), one),
                (Monomial::hop(s(16), s(17)), one),
            ],
        )
        .unwrap();
        let p = classify_remainder(&rt, 12, 2);
        assert_eq!(p.meets_barrier.len(), 1);
        assert_eq!(p.long_range.len(), 1);
        assert_eq!(p.short_range.len(), 2);
        assert!(p.flux_violations.is_empty());
        let sum = p.meets_barrier.add(&p.long_range).unwrap().add(&p.short_range).unwrap();
        assert_eq!(sum, rt);
    }

    #[test]
    fn flux_of_straddling_hop() {
        assert_eq!(outward_flux(&Monomial::hop(s(13), s(9)), 12.0), 1);
        assert_eq!(outward_flux(&Monomial::hop(s(13), s(14)), 12.0), 0);
    }
}
