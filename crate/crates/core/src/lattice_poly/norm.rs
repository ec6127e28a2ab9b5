//! The weighted norm `‖W‖_{j0,N,r}` and its size-graded slices.

use super::index::Annulus;
use super::poly::HamiltonianPoly;
use super::PolyError;

/// Parameters `(j0, N, r)` of the weighted norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    j0: u32,
    n: u32,
    r: f64,
}

impl NormParams {
    pub fn new(j0: u32, n: u32, r: f64) -> Result<Self, PolyError> {
        if !(r > 2.0) || !r.is_finite() {
            return Err(PolyError::InvalidNormParams(format!("weight base r = {r} must exceed 2")));
        }
        if n == 0 || j0 == 0 {
            return Err(PolyError::InvalidNormParams(format!(
                "j0 = {j0} and N = {n} must be positive"
            )));
        }
        Ok(NormParams { j0, n, r })
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    pub fn half_width(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn annulus(&self) -> Annulus {
        Annulus::new(self.j0 as f64, self.n as f64)
    }
}

/// `Σ_{supp n ∩ A ≠ ∅} |W(n)| |n|₁ r^{Δ(n)+|n|₁−1}`.
pub fn weighted_norm(w: &HamiltonianPoly, p: &NormParams) -> f64 {
    norm_in(w, &p.annulus(), p.r)
}

/// The same sum over an arbitrary annulus and any base `r > 0`.
///
/// Intermediate radii of the normal form iteration (`r − sσ`, down to `r/2`)
/// fall below 2, so the bookkeeping evaluates the defining sum there directly.
pub fn norm_in(w: &HamiltonianPoly, annulus: &Annulus, r: f64) -> f64 {
    let ln_r = r.ln();
    w.iter()
        .filter(|(m, _)| m.meets(annulus))
        .map(|(m, c)| {
            let deg = m.degree() as f64;
            c.norm() * deg * ((m.delta() + deg - 1.0) * ln_r).exp()
        })
        .sum()
}

/// Weighted norm of the slice `Δ(n)+|n|₁ = size`, where non-integer diameters
/// are rounded up (exact in d = 1).
pub fn grade_by_size(w: &HamiltonianPoly, size: u32, p: &NormParams) -> f64 {
    let slice = w.truncate(|m| m.size_class() == size);
    weighted_norm(&slice, p)
}
