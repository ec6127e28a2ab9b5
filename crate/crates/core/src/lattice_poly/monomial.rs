//! Monomials `Π q_j^{n_j} q̄_j^{n'_j}` over a finite support.

use std::cmp::Ordering;
use std::fmt;

use super::index::{Annulus, MultiIndex};

/// Exponent pair `(n_j, n'_j)` of `q_j` and `q̄_j` at one site.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Exponent {
    pub q: u32,
    pub qbar: u32,
}

impl Exponent {
    pub const fn new(q: u32, qbar: u32) -> Self {
        Exponent { q, qbar }
    }

    pub fn is_zero(&self) -> bool {
        self.q == 0 && self.qbar == 0
    }

    /// `n_j − n'_j`.
    pub fn charge(&self) -> i64 {
        self.q as i64 - self.qbar as i64
    }
}

/// Exponent data `n = (n_j, n'_j)_{j ∈ supp n}`.
///
/// Entries are kept sorted by site with zero exponents removed, so derived
/// equality and ordering are the canonical ones (lexicographic on site, then
/// on `(n_j, n'_j)`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    entries: Vec<(MultiIndex, Exponent)>,
}

impl Monomial {
    /// The empty-support monomial (the constant 1).
    pub fn one() -> Self {
        Monomial { entries: Vec::new() }
    }

    /// Builds a monomial from arbitrary entries; repeated sites are merged and
    /// zero entries dropped.
    pub fn new(mut entries: Vec<(MultiIndex, Exponent)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(MultiIndex, Exponent)> = Vec::with_capacity(entries.len());
        for (site, e) in entries {
            match out.last_mut() {
                Some((s, acc)) if *s == site => {
                    acc.q += e.q;
                    acc.qbar += e.qbar;
                }
                _ => out.push((site, e)),
            }
        }
        out.retain(|(_, e)| !e.is_zero());
        Monomial { entries: out }
    }

    /// `q_j^a q̄_j^b`.
    pub fn single(site: MultiIndex, q: u32, qbar: u32) -> Self {
        Monomial::new(vec![(site, Exponent::new(q, qbar))])
    }

    /// `q_i q̄_j`.
    pub fn hop(i: MultiIndex, j: MultiIndex) -> Self {
        Monomial::new(vec![(i, Exponent::new(1, 0)), (j, Exponent::new(0, 1))])
    }

    /// `|q_j|^{2p}`.
    pub fn modulus_power(site: MultiIndex, p: u32) -> Self {
        Monomial::single(site, p, p)
    }

    pub fn entries(&self) -> &[(MultiIndex, Exponent)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_constant(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn exponent(&self, site: &MultiIndex) -> Exponent {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(site))
            .map(|i| self.entries[i].1)
            .unwrap_or(Exponent::new(0, 0))
    }

    /// `|n|₁ = Σ (n_j + n'_j)`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|(_, e)| e.q + e.qbar).sum()
    }

    /// Square of the support diameter, exact.
    pub fn delta_sq(&self) -> i64 {
        let mut best = 0;
        for (a, (sa, _)) in self.entries.iter().enumerate() {
            for (sb, _) in &self.entries[a + 1..] {
                best = best.max(sa.dist_sq(sb));
            }
        }
        best
    }

    /// `Δ(n)`: Euclidean diameter of the support (0 for at most one site).
    pub fn delta(&self) -> f64 {
        (self.delta_sq() as f64).sqrt()
    }

    /// `|n|₁ + ⌈Δ(n)⌉`. Equals `Δ(n) + |n|₁` whenever the diameter is an
    /// integer (always in d = 1), and `Δ + |n|₁ ≤ c ⇔ size_class ≤ c` for
    /// integer `c`.
    pub fn size_class(&self) -> u32 {
        self.degree() + ceil_sqrt(self.delta_sq())
    }

    /// Whether `Δ(n) + |n|₁ ≤ cap`, decided in exact integer arithmetic.
    pub fn size_at_most(&self, cap: u32) -> bool {
        self.size_class() <= cap
    }

    /// Member of the resonant set: `n_j = n'_j` at every site.
    pub fn is_resonant(&self) -> bool {
        self.entries.iter().all(|(_, e)| e.q == e.qbar)
    }

    /// `Σ_j (n_j − n'_j)`; zero for gauge-invariant monomials.
    pub fn charge(&self) -> i64 {
        self.entries.iter().map(|(_, e)| e.charge()).sum()
    }

    /// `Σ_{j : keep(j)} (n_j − n'_j)`.
    pub fn charge_where(&self, keep: impl Fn(&MultiIndex) -> bool) -> i64 {
        self.entries
            .iter()
            .filter(|(s, _)| keep(s))
            .map(|(_, e)| e.charge())
            .sum()
    }

    /// `Σ_j (n_j − n'_j) ω_j`, or `None` if some site has no frequency.
    pub fn divisor(&self, omega: impl Fn(&MultiIndex) -> Option<f64>) -> Option<f64> {
        let mut acc = 0.0;
        for (s, e) in &self.entries {
            let c = e.charge();
            if c != 0 {
                acc += c as f64 * omega(s)?;
            }
        }
        Some(acc)
    }

    pub fn meets(&self, annulus: &Annulus) -> bool {
        self.support().any(|s| annulus.contains(s))
    }

    /// Swaps `q` and `q̄` exponents.
    pub fn conjugate(&self) -> Monomial {
        Monomial {
            entries: self
                .entries
                .iter()
                .map(|(s, e)| (s.clone(), Exponent::new(e.qbar, e.q)))
                .collect(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.first().map(|(s, _)| s.dim())
    }

    /// Exponents of `∂_{q_k}(q^n) · ∂_{q̄_k}(q^m)` up to its scalar factor:
    /// `n + m` with one `q_k` and one `q̄_k` removed.
    ///
    /// Callers guarantee the resulting exponents at `k` are non-negative.
    pub(crate) fn contract(&self, other: &Monomial, k: &MultiIndex) -> Monomial {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (0, 0);
        let (xs, ys) = (&self.entries, &other.entries);
        while a < xs.len() || b < ys.len() {
            let (site, mut e) = match (xs.get(a), ys.get(b)) {
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    Ordering::Less => {
                        a += 1;
                        (&x.0, x.1)
                    }
                    Ordering::Greater => {
                        b += 1;
                        (&y.0, y.1)
                    }
                    Ordering::Equal => {
                        a += 1;
                        b += 1;
                        (&x.0, Exponent::new(x.1.q + y.1.q, x.1.qbar + y.1.qbar))
                    }
                },
                (Some(x), None) => {
                    a += 1;
                    (&x.0, x.1)
                }
                (None, Some(y)) => {
                    b += 1;
                    (&y.0, y.1)
                }
                (None, None) => unreachable!(),
            };
            if site == k {
                e.q -= 1;
                e.qbar -= 1;
            }
            if !e.is_zero() {
                out.push((site.clone(), e));
            }
        }
        Monomial { entries: out }
    }
}

pub(crate) fn ceil_sqrt(v: i64) -> u32 {
    if v <= 0 {
        return 0;
    }
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while r * r < v {
        r += 1;
    }
    r as u32
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `site:(n,n')` tokens separated by spaces; the constant renders as `1`.
impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("1");
        }
        for (i, (s, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}:({},{})", e.q, e.qbar)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(j: i32) -> MultiIndex {
        MultiIndex::d1(j)
    }

    #[test]
    fn bookkeeping() {
        let m = Monomial::hop(s(5), s(6));
        assert_eq!(m.degree(), 2);
        assert_eq!(m.delta(), 1.0);
        assert_eq!(m.size_class(), 3);
        assert!(!m.is_resonant());
        assert_eq!(m.charge(), 0);

        let r = Monomial::modulus_power(s(0), 2);
        assert_eq!(r.degree(), 4);
        assert_eq!(r.delta(), 0.0);
        assert!(r.is_resonant());

        let c = Monomial::one();
        assert_eq!(c.degree(), 0);
        assert_eq!(c.delta(), 0.0);
        assert!(!c.meets(&Annulus::new(0.0, 100.0)));
    }

    #[test]
    fn merge_and_drop_zero() {
        let m = Monomial::new(vec![
            (s(2), Exponent::new(1, 0)),
            (s(1), Exponent::new(0, 0)),
            (s(2), Exponent::new(0, 1)),
        ]);
        assert_eq!(m, Monomial::modulus_power(s(2), 1));
        assert_eq!(m.support_len(), 1);
    }

    #[test]
    fn canonical_order_is_by_site_then_exponent() {
        let a = Monomial::single(s(0), 1, 0);
        let b = Monomial::single(s(0), 1, 1);
        let c = Monomial::single(s(1), 0, 1);
        assert!(a < b && b < c);
    }

    #[test]
    fn diameter_d2_rounds_up_in_size_class() {
        let m = Monomial::hop(MultiIndex::new(vec![0, 0]), MultiIndex::new(vec![1, 1]));
        assert!((m.delta() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.size_class(), 4);
        assert!(m.size_at_most(4));
        assert!(!m.size_at_most(3));
    }

    #[test]
    fn contraction_removes_one_pair() {
        // q1 q̄2 and q2 q̄1 contracted at site 1 leave |q2|².
        let n = Monomial::hop(s(1), s(2));
        let m = Monomial::hop(s(2), s(1));
        assert_eq!(n.contract(&m, &s(1)), Monomial::modulus_power(s(2), 1));
        assert_eq!(n.contract(&m, &s(2)), Monomial::modulus_power(s(1), 1));
    }

    #[test]
    fn ceil_sqrt_exact() {
        assert_eq!(ceil_sqrt(0), 0);
        assert_eq!(ceil_sqrt(1), 1);
        assert_eq!(ceil_sqrt(2), 2);
        assert_eq!(ceil_sqrt(4), 2);
        assert_eq!(ceil_sqrt(5), 3);
        assert_eq!(ceil_sqrt(1 << 40), 1 << 20);
    }
}
