//! Random polynomials and an independent dense bracket for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use qpnls::lattice_poly::{Exponent, HamiltonianPoly, Monomial, MultiIndex};
use rand::Rng;

/// Up to 6 distinct sites drawn from `[lo, hi]^d`.
pub fn site_pool<R: Rng>(rng: &mut R, d: usize, lo: i32, hi: i32, count: usize) -> Vec<MultiIndex> {
    let mut pool: Vec<MultiIndex> = Vec::new();
    while pool.len() < count {
        let j = MultiIndex::new((0..d).map(|_| rng.random_range(lo..=hi)).collect());
        if !pool.contains(&j) {
            pool.push(j);
        }
    }
    pool
}

/// A random monomial of total degree in `1..=max_degree` over `pool`.
pub fn random_monomial<R: Rng>(rng: &mut R, pool: &[MultiIndex], max_degree: u32) -> Monomial {
    let degree = rng.random_range(1..=max_degree);
    let entries = (0..degree)
        .map(|_| {
            let s = pool[rng.random_range(0..pool.len())].clone();
            if rng.random_bool(0.5) {
                (s, Exponent::new(1, 0))
            } else {
                (s, Exponent::new(0, 1))
            }
        })
        .collect();
    Monomial::new(entries)
}

pub fn random_poly<R: Rng>(rng: &mut R, d: usize, pool: &[MultiIndex], terms: usize, max_degree: u32) -> HamiltonianPoly {
    let t = (0..terms).map(|_| {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        (random_monomial(rng, pool, max_degree), c)
    });
    HamiltonianPoly::from_terms(d, t.collect::<Vec<_>>()).unwrap()
}

type Dense = BTreeMap<Vec<(Vec<i32>, u32, u32)>, Complex64>;

fn dense(p: &HamiltonianPoly) -> Dense {
    let mut out = Dense::new();
    for (m, c) in p.iter() {
        let key = m.entries().iter().map(|(s, e)| (s.coords().to_vec(), e.q, e.qbar)).collect();
        *out.entry(key).or_default() += *c;
    }
    out
}

fn exps(key: &[(Vec<i32>, u32, u32)]) -> BTreeMap<Vec<i32>, (u32, u32)> {
    key.iter().map(|(s, a, b)| (s.clone(), (*a, *b))).collect()
}

/// `∂/∂q_k` (`conj = false`) or `∂/∂q̄_k` of one monomial.
fn diff(e: &BTreeMap<Vec<i32>, (u32, u32)>, k: &[i32], conj: bool) -> Option<(f64, BTreeMap<Vec<i32>, (u32, u32)>)> {
    let (a, b) = *e.get(k)?;
    let p = if conj { b } else { a };
    if p == 0 {
        return None;
    }
    let mut out = e.clone();
    let entry = out.get_mut(k).unwrap();
    if conj {
        entry.1 -= 1;
    } else {
        entry.0 -= 1;
    }
    if *entry == (0, 0) {
        out.remove(k);
    }
    Some((p as f64, out))
}

fn mul(a: &BTreeMap<Vec<i32>, (u32, u32)>, b: &BTreeMap<Vec<i32>, (u32, u32)>) -> Vec<(Vec<i32>, u32, u32)> {
    let mut out = a.clone();
    for (s, (x, y)) in b {
        let e = out.entry(s.clone()).or_insert((0, 0));
        e.0 += x;
        e.1 += y;
    }
    out.into_iter().map(|(s, (x, y))| (s, x, y)).collect()
}

/// `{W, U} = i Σ_k (∂_{q_k}W ∂_{q̄_k}U − ∂_{q̄_k}W ∂_{q_k}U)`, term by term
/// over every pair and every site, with no shared code path.
pub fn naive_bracket(w: &HamiltonianPoly, u: &HamiltonianPoly) -> Dense {
    let (dw, du) = (dense(w), dense(u));
    let mut out = Dense::new();
    let i = Complex64::new(0.0, 1.0);
    for (kn, cw) in &dw {
        let en = exps(kn);
        for (km, cu) in &du {
            let em = exps(km);
            let sites: Vec<Vec<i32>> = en.keys().filter(|s| em.contains_key(*s)).cloned().collect();
            for k in sites {
                if let (Some((a, x)), Some((b, y))) = (diff(&en, &k, false), diff(&em, &k, true)) {
                    *out.entry(mul(&x, &y)).or_default() += i * cw * cu * (a * b);
                }
                if let (Some((a, x)), Some((b, y))) = (diff(&en, &k, true), diff(&em, &k, false)) {
                    *out.entry(mul(&x, &y)).or_default() -= i * cw * cu * (a * b);
                }
            }
        }
    }
    out
}

/// Largest coefficient mismatch between `p` and a dense reference, relative
/// to the largest coefficient of either.
pub fn relative_mismatch(p: &HamiltonianPoly, reference: &Dense) -> f64 {
    let mine = dense(p);
    let scale = mine.values().chain(reference.values()).map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut keys: Vec<_> = mine.keys().chain(reference.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|k| {
            let a = mine.get(k).copied().unwrap_or_default();
            let b = reference.get(k).copied().unwrap_or_default();
            (a - b).norm()
        })
        .fold(0.0, f64::max)
        / scale
}
