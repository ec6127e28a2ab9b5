//! Sparse polynomials in `(q, q̄)` with complex coefficients.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use super::index::MultiIndex;
use super::monomial::Monomial;
use super::PolyError;

/// Relative magnitude below which coefficients are discarded after an
/// algebra operation.
pub const PRUNE_RELATIVE: f64 = 1e-16;

/// W-terms per parallel work unit in the bracket. Fixed so the summation
/// order, and therefore the result, does not depend on the worker count.
const BRACKET_CHUNK: usize = 32;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A Hamiltonian `Σ_n W(n) q^n q̄^{n'}` on Z^d.
///
/// Values are immutable once built; every algebra operation returns a new
/// polynomial with tiny coefficients pruned.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPoly {
    dim: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl HamiltonianPoly {
    pub fn zero(dim: usize) -> Self {
        HamiltonianPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Sums repeated monomials and prunes.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Monomial, Complex64)>,
    ) -> Result<Self, PolyError> {
        let mut p = HamiltonianPoly::zero(dim);
        for (m, c) in terms {
            if let Some(d) = m.dim() {
                if d != dim {
                    return Err(PolyError::DimensionMismatch { left: dim, right: d });
                }
            }
            *p.terms.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        p.prune();
        Ok(p)
    }

    /// Single-term polynomial.
    pub fn monomial(dim: usize, m: Monomial, c: Complex64) -> Self {
        Self::from_terms(dim, [(m, c)]).expect("monomial dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sites appearing in any monomial.
    pub fn support(&self) -> BTreeSet<MultiIndex> {
        self.terms
            .keys()
            .flat_map(|m| m.support().cloned())
            .collect()
    }

    /// Drops coefficients below `PRUNE_RELATIVE` times the largest one.
    pub fn prune(&mut self) {
        let floor = PRUNE_RELATIVE * self.max_abs();
        self.prune_below(floor);
    }

    /// Drops coefficients with magnitude below `floor` (and exact zeros).
    pub fn prune_below(&mut self, floor: f64) {
        self.terms.retain(|_, c| {
            let a = c.norm();
            a > 0.0 && a >= floor
        });
    }

    fn check_dim(&self, other: &HamiltonianPoly) -> Result<(), PolyError> {
        if self.dim != other.dim {
            return Err(PolyError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &HamiltonianPoly) -> Result<Self, PolyError> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &HamiltonianPoly) -> Result<Self, PolyError> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: Complex64, other: &HamiltonianPoly) -> Result<Self, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.add_scaled_in_place(a, other);
        out.prune();
        Ok(out)
    }

    /// `self += a·other` without pruning; dimensions must already agree.
    pub(crate) fn add_scaled_in_place(&mut self, a: Complex64, other: &HamiltonianPoly) {
        for (m, c) in &other.terms {
            *self.terms.entry(m.clone()).or_default() += a * c;
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = HamiltonianPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), a * c)).collect(),
        };
        out.prune();
        out
    }

    /// Maps every coefficient through `f(monomial, coefficient)`.
    pub fn map_coeffs(&self, f: impl Fn(&Monomial, Complex64) -> Complex64) -> Self {
        let mut out = HamiltonianPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), f(m, c)))
                .collect(),
        };
        out.prune();
        out
    }

    /// Keeps exactly the terms whose monomial satisfies `keep`.
    pub fn truncate(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        HamiltonianPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Splits into the resonant part (`n_j = n'_j` everywhere) and the rest.
    /// The two parts sum to `self` exactly.
    pub fn resonant_split(&self) -> (Self, Self) {
        let (z, r): (BTreeMap<_, _>, BTreeMap<_, _>) = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), *c))
            .partition(|(m, _)| m.is_resonant());
        (
            HamiltonianPoly { dim: self.dim, terms: z },
            HamiltonianPoly { dim: self.dim, terms: r },
        )
    }

    /// Drops the constant term, which generates no dynamics.
    pub fn without_constant(mut self) -> Self {
        self.terms.remove(&Monomial::one());
        self
    }

    /// Complex conjugate as a function: `(n, n') ↦ (n', n)` with conjugated
    /// coefficients.
    pub fn conjugate(&self) -> Self {
        HamiltonianPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.conjugate(), c.conj()))
                .collect(),
        }
    }

    /// Largest mismatch between `W(n, n')` and `conj W(n', n)`; zero for a
    /// real-valued Hamiltonian.
    pub fn reality_defect(&self) -> f64 {
        let conj = self.conjugate();
        let keys: BTreeSet<&Monomial> = self.terms.keys().chain(conj.terms.keys()).collect();
        keys.into_iter()
            .map(|m| (self.coeff(m) - conj.coeff(m)).norm())
            .fold(0.0, f64::max)
    }

    /// Poisson bracket `{W, U} = i Σ_j (∂_{q_j}W ∂_{q̄_j}U − ∂_{q̄_j}W ∂_{q_j}U)`.
    ///
    /// For monomials `n`, `m` sharing a site `k` the contribution is
    /// `i W(n) U(m) (n_k m'_k − n'_k m_k)` on `n + m` with one `q_k q̄_k` pair
    /// removed. Work is split over fixed-size chunks of W's terms and merged in
    /// order, so the output is bitwise independent of the thread count.
    pub fn bracket(&self, other: &HamiltonianPoly) -> Result<Self, PolyError> {
        self.check_dim(other)?;
        let mut by_site: HashMap<&MultiIndex, Vec<(&Monomial, Complex64)>> = HashMap::new();
        for (m, &c) in &other.terms {
            for s in m.support() {
                by_site.entry(s).or_default().push((m, c));
            }
        }
        let left: Vec<(&Monomial, Complex64)> = self.terms.iter().map(|(m, &c)| (m, c)).collect();

        let chunk_terms = |chunk: &[(&Monomial, Complex64)]| {
            let mut acc: BTreeMap<Monomial, Complex64> = BTreeMap::new();
            for &(n, a) in chunk {
                for (k, en) in n.entries() {
                    let Some(partners) = by_site.get(k) else {
                        continue;
                    };
                    for &(m, b) in partners {
                        let em = m.exponent(k);
                        let factor = en.q as i64 * em.qbar as i64 - en.qbar as i64 * em.q as i64;
                        if factor == 0 {
                            continue;
                        }
                        let l = n.contract(m, k);
                        *acc.entry(l).or_default() += I * a * b * factor as f64;
                    }
                }
            }
            acc
        };

        let partials: Vec<BTreeMap<Monomial, Complex64>> = if left.len() > BRACKET_CHUNK {
            left.par_chunks(BRACKET_CHUNK).map(chunk_terms).collect()
        } else {
            vec![chunk_terms(&left)]
        };
        let mut out = HamiltonianPoly::zero(self.dim);
        for part in partials {
            for (m, c) in part {
                *out.terms.entry(m).or_default() += c;
            }
        }
        out.prune();
        Ok(out)
    }
}
