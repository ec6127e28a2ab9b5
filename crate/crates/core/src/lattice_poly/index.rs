//! Lattice points, annuli and finite boxes of Z^d.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PolyError;

/// A point of Z^d. Used both for lattice sites `j` and frequency vectors `ℓ`.
///
/// Ordering is lexicographic on the coordinates, which is the canonical
/// order used everywhere a set of sites is serialized or iterated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(coords: Vec<i32>) -> Self {
        assert!(!coords.is_empty(), "a multi-index needs at least one coordinate");
        MultiIndex(coords)
    }

    pub fn origin(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// One-dimensional site, the common case in experiments.
    pub fn d1(j: i32) -> Self {
        MultiIndex(vec![j])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// `|j|₁ = Σ|j_i|`.
    pub fn norm_l1(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    /// `Σ j_i²`, exact.
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    /// Euclidean length `|j|`.
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Squared Euclidean distance, exact.
    pub fn dist_sq(&self, other: &MultiIndex) -> i64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let d = a as i64 - b as i64;
                d * d
            })
            .sum()
    }

    pub fn dist(&self, other: &MultiIndex) -> f64 {
        (self.dist_sq(other) as f64).sqrt()
    }

    /// `|j - j'|₁`.
    pub fn dist_l1(&self, other: &MultiIndex) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs())
            .sum()
    }

    pub fn offset(&self, axis: usize, by: i32) -> MultiIndex {
        let mut c = self.0.clone();
        c[axis] += by;
        MultiIndex(c)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|c| -c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Coordinates joined by commas: `5`, `1,-2`.
impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coords = s
            .split(',')
            .map(|t| t.trim().parse::<i32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PolyError::Parse(format!("bad site `{s}`: {e}")))?;
        if coords.is_empty() {
            return Err(PolyError::Parse(format!("empty site `{s}`")));
        }
        Ok(MultiIndex(coords))
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex::new(v)
    }
}

/// The shell `A(j0, N) = { j : ||j| − j0| ≤ N }` around the sphere of radius `j0`.
///
/// The half-width is real so that `A(j0, M²/2)` is representable for odd `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annulus {
    pub j0: f64,
    pub half_width: f64,
}

impl Annulus {
    pub fn new(j0: f64, half_width: f64) -> Self {
        Annulus { j0, half_width }
    }

    pub fn contains(&self, j: &MultiIndex) -> bool {
        (j.norm() - self.j0).abs() <= self.half_width
    }

    /// Every site of the annulus in dimension `dim`, canonical order.
    pub fn sites(&self, dim: usize) -> Vec<MultiIndex> {
        let reach = (self.j0 + self.half_width).floor().max(0.0) as i32;
        BoxGeometry::cube(dim, reach)
            .sites()
            .filter(|j| self.contains(j))
            .collect()
    }
}

/// Axis-aligned finite box `Π [lo_i, hi_i]` of Z^d (bounds inclusive).
///
/// Sites are enumerated in lexicographic order; `index_of` is the inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxGeometry {
    lo: Vec<i32>,
    hi: Vec<i32>,
}

impl BoxGeometry {
    pub fn new(lo: Vec<i32>, hi: Vec<i32>) -> Result<Self, PolyError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(PolyError::DimensionMismatch {
                left: lo.len(),
                right: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(PolyError::Parse(format!("empty box {lo:?}..{hi:?}")));
        }
        Ok(BoxGeometry { lo, hi })
    }

    /// `[-reach, reach]^dim`.
    pub fn cube(dim: usize, reach: i32) -> Self {
        BoxGeometry {
            lo: vec![-reach; dim],
            hi: vec![reach; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i32] {
        &self.lo
    }

    pub fn hi(&self) -> &[i32] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, j: &MultiIndex) -> bool {
        j.dim() == self.dim()
            && j.coords()
                .iter()
                .enumerate()
                .all(|(a, &c)| c >= self.lo[a] && c <= self.hi[a])
    }

    /// Linear position of `j` in the canonical enumeration.
    pub fn index_of(&self, j: &MultiIndex) -> Option<usize> {
        if !self.contains(j) {
            return None;
        }
        let mut idx = 0usize;
        for (a, &c) in j.coords().iter().enumerate() {
            idx = idx * self.extent(a) + (c - self.lo[a]) as usize;
        }
        Some(idx)
    }

    pub fn site_at(&self, mut idx: usize) -> MultiIndex {
        let mut coords = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let e = self.extent(a);
            coords[a] = self.lo[a] + (idx % e) as i32;
            idx /= e;
        }
        MultiIndex(coords)
    }

    pub fn sites(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).map(move |i| self.site_at(i))
    }

    /// Whether the box contains every site within Euclidean distance `margin`
    /// of `annulus`.
    pub fn covers(&self, annulus: &Annulus, margin: f64) -> bool {
        let reach = annulus.j0 + annulus.half_width + margin;
        self.lo.iter().all(|&l| (l as f64) <= -reach) && self.hi.iter().all(|&h| (h as f64) >= reach)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let j = MultiIndex::new(vec![3, -4]);
        assert_eq!(j.norm_l1(), 7);
        assert_eq!(j.norm(), 5.0);
        assert_eq!(j.dist_sq(&MultiIndex::origin(2)), 25);
    }

    #[test]
    fn annulus_membership_d1() {
        let a = Annulus::new(5.0, 2.0);
        let inside: Vec<i32> = (-10..=10)
            .filter(|&j| a.contains(&MultiIndex::d1(j)))
            .collect();
        assert_eq!(inside, vec![-7, -6, -5, -4, -3, 3, 4, 5, 6, 7]);
        assert_eq!(a.sites(1).len(), 10);
    }

    #[test]
    fn box_indexing_roundtrip() {
        let b = BoxGeometry::new(vec![-2, 0], vec![1, 3]).unwrap();
        assert_eq!(b.len(), 16);
        for (i, s) in b.sites().enumerate() {
            assert_eq!(b.index_of(&s), Some(i));
        }
        let all: Vec<_> = b.sites().collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn display_parse() {
        let j = MultiIndex::new(vec![1, -2]);
        assert_eq!(j.to_string(), "1,-2");
        assert_eq!("1,-2".parse::<MultiIndex>().unwrap(), j);
    }
}
