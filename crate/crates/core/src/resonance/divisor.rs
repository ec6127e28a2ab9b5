//! Divisor indices `k` and the family `{k : supp k ∩ A(j0,M²) ≠ ∅, Δ(k)+|k|₁ ≤ M+2}`.

use std::collections::BTreeMap;
use std::fmt;

use crate::lattice_poly::{MultiIndex, BoxGeometry};

use super::{ResonanceError, ResonanceParams};

/// Integer vector `k = (k_j)` with finite, nonempty support.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorIndex {
    entries: Vec<(MultiIndex, i32)>,
}

impl DivisorIndex {
    /// Merges repeated sites; `None` if everything cancels.
    pub fn new(entries: impl IntoIterator<Item = (MultiIndex, i32)>) -> Option<Self> {
        let mut acc: BTreeMap<MultiIndex, i32> = BTreeMap::new();
        for (s, k) in entries {
            *acc.entry(s).or_default() += k;
        }
        let entries: Vec<_> = acc.into_iter().filter(|(_, k)| *k != 0).collect();
        (!entries.is_empty()).then_some(DivisorIndex { entries })
    }

    pub fn entries(&self) -> &[(MultiIndex, i32)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.entries.iter().map(|(s, _)| s)
    }

    /// `|k|₁`.
    pub fn norm_l1(&self) -> u32 {
        self.entries.iter().map(|(_, k)| k.unsigned_abs()).sum()
    }

    pub fn delta_sq(&self) -> i64 {
        let mut best = 0;
        for (a, (sa, _)) in self.entries.iter().enumerate() {
            for (sb, _) in &self.entries[a + 1..] {
                best = best.max(sa.dist_sq(sb));
            }
        }
        best
    }

    pub fn delta(&self) -> f64 {
        (self.delta_sq() as f64).sqrt()
    }

    pub fn neg(&self) -> DivisorIndex {
        DivisorIndex {
            entries: self.entries.iter().map(|(s, k)| (s.clone(), -k)).collect(),
        }
    }

    /// `Σ_j k_j ω_j`.
    pub fn value(&self, omega: impl Fn(&MultiIndex) -> Option<f64>) -> Result<f64, ResonanceError> {
        let mut acc = 0.0;
        for (s, k) in &self.entries {
            let w = omega(s).ok_or_else(|| ResonanceError::MissingSite(s.clone()))?;
            acc += *k as f64 * w;
        }
        Ok(acc)
    }
}

impl fmt::Debug for DivisorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `site:k` tokens separated by spaces.
impl fmt::Display for DivisorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, k)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}:{k}")?;
        }
        Ok(())
    }
}

/// Size of the family before enumerating it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerationEstimate {
    /// Upper bound: anchors times the count around one anchor.
    pub predicted: u64,
    pub anchors: u64,
    /// `log10 (j0 M²)^{2dM}`.
    pub crude_log10: f64,
}

impl EnumerationEstimate {
    pub fn new(params: &ResonanceParams) -> Self {
        let anchors = params.annulus().sites(params.d).len() as u64;
        let origin = MultiIndex::origin(params.d);
        let candidates = ball(&origin, params.size_cap() - 1)
            .into_iter()
            .filter(|s| *s != origin)
            .collect::<Vec<_>>();
        let mut per_anchor = 0u64;
        visit_supports(&origin, &candidates, params.size_cap(), &mut |support, budget| {
            per_anchor += count_values(support.len() as u32, budget);
        });
        let jm = params.j0 as f64 * (params.m * params.m) as f64;
        EnumerationEstimate {
            predicted: anchors.saturating_mul(per_anchor),
            anchors,
            crude_log10: 2.0 * params.d as f64 * params.m as f64 * jm.log10(),
        }
    }
}

/// Sites within Euclidean distance `radius` of `center`, canonical order.
fn ball(center: &MultiIndex, radius: u32) -> Vec<MultiIndex> {
    let r = radius as i32;
    let cube = BoxGeometry::cube(center.dim(), r);
    let r2 = (radius as i64).pow(2);
    cube.sites()
        .filter(|s| s.norm_sq() <= r2)
        .map(|s| s.add(center))
        .collect()
}

/// Visits every support `{anchor} ∪ S`, `S ⊆ candidates`, that can carry
/// some `k` with `Δ + |k|₁ ≤ cap`, together with the largest admissible `|k|₁`.
fn visit_supports(
    anchor: &MultiIndex,
    candidates: &[MultiIndex],
    cap: u32,
    visit: &mut dyn FnMut(&[MultiIndex], u32),
) {
    fn rec(
        chosen: &mut Vec<MultiIndex>,
        diam_sq: i64,
        start: usize,
        candidates: &[MultiIndex],
        cap: u32,
        visit: &mut dyn FnMut(&[MultiIndex], u32),
    ) {
        let budget = cap as i64 - ceil_sqrt(diam_sq) as i64;
        if budget < chosen.len() as i64 {
            return;
        }
        visit(chosen, budget as u32);
        for (i, c) in candidates.iter().enumerate().skip(start) {
            let d = chosen.iter().map(|s| s.dist_sq(c)).max().unwrap_or(0).max(diam_sq);
            // one more site needs |k|₁ ≥ len + 1
            if (cap as i64 - ceil_sqrt(d) as i64) < chosen.len() as i64 + 1 {
                continue;
            }
            chosen.push(c.clone());
            rec(chosen, d, i + 1, candidates, cap, visit);
            chosen.pop();
        }
    }
    let mut chosen = vec![anchor.clone()];
    rec(&mut chosen, 0, 0, candidates, cap, visit);
}

fn ceil_sqrt(v: i64) -> u32 {
    crate::lattice_poly::monomial::ceil_sqrt(v)
}

/// Number of vectors of `len` nonzero integers with `Σ|k| ≤ budget`.
fn count_values(len: u32, budget: u32) -> u64 {
    (len..=budget)
        .map(|t| (1u64 << len) * binomial(t as u64 - 1, len as u64 - 1))
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Calls `emit` with every nonzero-entry assignment on `support` with
/// `Σ|k_j| ≤ budget`.
fn assign_values(support: &[MultiIndex], budget: u32, emit: &mut dyn FnMut(DivisorIndex)) {
    fn rec(
        support: &[MultiIndex],
        values: &mut Vec<i32>,
        left: u32,
        emit: &mut dyn FnMut(DivisorIndex),
    ) {
        let pos = values.len();
        if pos == support.len() {
            emit(DivisorIndex {
                entries: support.iter().cloned().zip(values.iter().copied()).collect(),
            });
            return;
        }
        let remaining_sites = (support.len() - pos - 1) as u32;
        if left < remaining_sites + 1 {
            return;
        }
        let max = left - remaining_sites;
        for mag in 1..=max as i32 {
            for v in [-mag, mag] {
                values.push(v);
                rec(support, values, left - mag as u32, emit);
                values.pop();
            }
        }
    }
    let mut sorted = support.to_vec();
    sorted.sort();
    rec(&sorted, &mut Vec::new(), budget, emit);
}

/// Streams every index of the family exactly once.
///
/// Each `k` is produced under the smallest annulus site of its support; the
/// remaining sites lie within `Δ(k) ≤ M + 1` of it. Refuses when the
/// predicted count exceeds `params.cap`.
pub fn for_each_divisor_index(
    params: &ResonanceParams,
    mut emit: impl FnMut(DivisorIndex),
) -> Result<EnumerationEstimate, ResonanceError> {
    params.validate()?;
    let est = EnumerationEstimate::new(params);
    if est.predicted > params.cap {
        return Err(ResonanceError::CapExceeded {
            predicted: est.predicted,
            cap: params.cap,
            crude_log10: est.crude_log10,
        });
    }
    let annulus = params.annulus();
    let cap = params.size_cap();
    for anchor in annulus.sites(params.d) {
        let candidates: Vec<MultiIndex> = ball(&anchor, cap - 1)
            .into_iter()
            .filter(|s| *s != anchor && !(annulus.contains(s) && *s < anchor))
            .collect();
        visit_supports(&anchor, &candidates, cap, &mut |support, budget| {
            assign_values(support, budget, &mut emit);
        });
    }
    Ok(est)
}

pub fn enumerate_divisor_indices(params: &ResonanceParams) -> Result<Vec<DivisorIndex>, ResonanceError> {
    let mut out = Vec::new();
    for_each_divisor_index(params, |k| out.push(k))?;
    Ok(out)
}

/// Outcome of a non-resonance scan.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Nonresonant { checked: usize },
    Resonant { k: DivisorIndex, value: f64 },
}

impl Certificate {
    pub fn is_nonresonant(&self) -> bool {
        matches!(self, Certificate::Nonresonant { .. })
    }
}

/// First index whose divisor falls below the floor, if any.
pub fn check_nonresonant<'a>(
    omega: impl Fn(&MultiIndex) -> Option<f64>,
    params: &ResonanceParams,
    indices: impl IntoIterator<Item = &'a DivisorIndex>,
) -> Result<Certificate, ResonanceError> {
    let mut checked = 0;
    for k in indices {
        let value = k.value(&omega)?;
        if params.violates(value) {
            return Ok(Certificate::Resonant { k: k.clone(), value });
        }
        checked += 1;
    }
    Ok(Certificate::Nonresonant { checked })
}

/// The family compiled against a site table, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct DivisorFamily {
    sites: Vec<MultiIndex>,
    /// `(offset into sites, coefficient)` per entry, grouped per index.
    entries: Vec<(u32, i32)>,
    starts: Vec<usize>,
}

impl DivisorFamily {
    pub fn enumerate(params: &ResonanceParams) -> Result<Self, ResonanceError> {
        let mut table: BTreeMap<MultiIndex, u32> = BTreeMap::new();
        let mut raw: Vec<Vec<(MultiIndex, i32)>> = Vec::new();
        for_each_divisor_index(params, |k| {
            for (s, _) in k.entries() {
                table.entry(s.clone()).or_insert(0);
            }
            raw.push(k.entries.clone());
        })?;
        for (i, v) in table.values_mut().enumerate() {
            *v = i as u32;
        }
        let mut entries = Vec::new();
        let mut starts = vec![0];
        for k in raw {
            entries.extend(k.into_iter().map(|(s, c)| (table[&s], c)));
            starts.push(entries.len());
        }
        Ok(DivisorFamily {
            sites: table.into_keys().collect(),
            entries,
            starts,
        })
    }

    /// Sites touched by some index, canonical order.
    pub fn sites(&self) -> &[MultiIndex] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize) -> DivisorIndex {
        DivisorIndex {
            entries: self.entries[self.starts[i]..self.starts[i + 1]]
                .iter()
                .map(|&(s, c)| (self.sites[s as usize].clone(), c))
                .collect(),
        }
    }

    /// Divisor values for frequencies given in `sites()` order.
    pub fn values<'a>(&'a self, omega: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.starts.windows(2).map(move |w| {
            self.entries[w[0]..w[1]]
                .iter()
                .map(|&(s, c)| c as f64 * omega[s as usize])
                .sum()
        })
    }

    /// Smallest `|Σ k_j ω_j|` and the index attaining it.
    pub fn min_abs(&self, omega: &[f64]) -> Option<(usize, f64)> {
        self.values(omega)
            .map(f64::abs)
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b <= v => best,
                _ => Some((i, v)),
            })
    }
}
