//! Numerical checks of three inequalities used by the measure estimate:
//! a lower bound for `max_l |w·v^(l)|` over an integer basis, a sublevel-set
//! bound in one variable under a derivative floor, and the `ε^{1/k}` scaling
//! of sublevel sets under a directional-derivative floor.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::ResonanceError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisCheck {
    /// `max_l |w·v^(l)|`.
    pub lhs: f64,
    /// `r^{−3/2} M^{1−r} |w|₂ |det[v^(l)]|`.
    pub rhs: f64,
    pub det: f64,
    /// `max_l |v^(l)|₁`.
    pub m: f64,
    pub holds: bool,
}

/// `max_l |w·v^(l)| ≥ r^{−3/2} M^{1−r} |w|₂ |det[v^(l)]|` for `r` vectors in
/// `R^r` with `|v^(l)|₁ ≤ M`, using the smallest admissible `M`.
///
/// A singular family gives `rhs = 0`, so the inequality holds trivially.
pub fn verify_bgg85(vectors: &[Vec<f64>], w: &[f64]) -> Result<BasisCheck, ResonanceError> {
    let r = vectors.len();
    if r == 0 || w.len() != r || vectors.iter().any(|v| v.len() != r) {
        return Err(ResonanceError::Dimension(format!(
            "need r vectors of length r = {} and w of the same length",
            r
        )));
    }
    let mat = DMatrix::from_fn(r, r, |i, l| vectors[l][i]);
    let det = mat.determinant();
    let m = vectors
        .iter()
        .map(|v| v.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lhs = vectors
        .iter()
        .map(|v| v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let w2 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let rf = r as f64;
    let rhs = if det == 0.0 {
        0.0
    } else {
        rf.powf(-1.5) * m.powf(1.0 - rf) * w2 * det.abs()
    };
    // the determinant carries rounding of relative size ~ r·eps
    let slack = 1e-12 * rhs;
    Ok(BasisCheck {
        lhs,
        rhs,
        det,
        m,
        holds: lhs + slack >= rhs,
    })
}

/// `ζ_k = k (k+1) ((k+1)!)^{1/k}`.
pub fn zeta(k: u32) -> f64 {
    let fact: f64 = (1..=k + 1).map(|i| i as f64).product();
    k as f64 * (k as f64 + 1.0) * fact.powf(1.0 / k as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelCheck {
    pub measured: f64,
    /// `ζ_k (γ/A)^{1/k}`.
    pub bound: f64,
    /// Smallest `|f^{(k)}|` seen on the certification grid.
    pub derivative_floor: f64,
    /// Estimated discretization error of `measured`.
    pub grid_error: f64,
    pub holds: bool,
}

/// Grid resolution for one-variable sublevel measures.
pub const SUBLEVEL_GRID: usize = 1 << 20;
const CERT_GRID: usize = 512;

/// Checks `meas{x ∈ I : |f(x)| ≤ γ} ≤ ζ_k (γ/A)^{1/k}` given `inf_I |f^{(k)}| ≥ A`.
///
/// The derivative floor is certified on a grid through `k`-th forward
/// differences, which equal `h^k f^{(k)}` at an intermediate point. The
/// measure is that of the piecewise-linear interpolant on
/// [`SUBLEVEL_GRID`] cells; the check refuses when the interpolation error
/// could move the measure by 1% of the bound.
pub fn verify_km98(
    f: impl Fn(f64) -> f64 + Sync,
    interval: (f64, f64),
    k: u32,
    a: f64,
    gamma: f64,
) -> Result<SublevelCheck, ResonanceError> {
    let (lo, hi) = interval;
    if !(hi > lo) || k == 0 || !(a > 0.0) || !(gamma >= 0.0) {
        return Err(ResonanceError::InvalidParams(format!(
            "need lo < hi, k ≥ 1, A > 0, γ ≥ 0 (got [{lo}, {hi}], k={k}, A={a}, γ={gamma})"
        )));
    }
    let h = (hi - lo) / CERT_GRID as f64;
    let floor = (0..=CERT_GRID - k as usize)
        .map(|i| (forward_difference(&f, lo + i as f64 * h, h, k) / h.powi(k as i32)).abs())
        .fold(f64::INFINITY, f64::min);
    if floor < a * (1.0 - 1e-6) {
        return Err(ResonanceError::NotCertified(format!(
            "|f^({k})| reaches {floor:.6e} < A = {a:.6e} on the grid"
        )));
    }
    let bound = zeta(k) * (gamma / a).powf(1.0 / k as f64);
    if gamma == 0.0 {
        // the level set {f = 0} is null under the derivative floor
        return Ok(SublevelCheck { measured: 0.0, bound, derivative_floor: floor, grid_error: 0.0, holds: true });
    }

    let n = SUBLEVEL_GRID;
    let step = (hi - lo) / n as f64;
    let ys: Vec<f64> = (0..=n).into_par_iter().map(|i| f(lo + i as f64 * step)).collect();
    let curvature = ys
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
        .fold(0.0, f64::max);
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let err = curvature / 8.0 + 4.0 * f64::EPSILON * scale;
    let measured = pl_sublevel(&ys, step, gamma);
    let grid_error = pl_sublevel(&ys, step, gamma + err) - pl_sublevel(&ys, step, (gamma - err).max(0.0));
    if grid_error >= 0.01 * bound {
        return Err(ResonanceError::NotCertified(format!(
            "grid error {grid_error:.3e} is not below 1% of the bound {bound:.3e}"
        )));
    }
    Ok(SublevelCheck {
        measured,
        bound,
        derivative_floor: floor,
        grid_error,
        holds: measured <= bound,
    })
}

fn forward_difference(f: &impl Fn(f64) -> f64, x: f64, h: f64, k: u32) -> f64 {
    let mut acc = 0.0;
    let mut binom = 1.0;
    for i in 0..=k {
        let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(x + i as f64 * h);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Measure of `{|p| ≤ γ}` for the piecewise-linear `p` through `ys`.
fn pl_sublevel(ys: &[f64], step: f64, gamma: f64) -> f64 {
    ys.par_windows(2)
        .map(|w| step * interval_fraction(w[0], w[1], -gamma, gamma))
        .sum()
}

/// Fraction of `t ∈ [0,1]` with `lo ≤ a + t(b−a) ≤ hi`.
fn interval_fraction(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    if a == b {
        return if a >= lo && a <= hi { 1.0 } else { 0.0 };
    }
    let (t0, t1) = ((lo - a) / (b - a), (hi - a) / (b - a));
    let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    (t1.min(1.0) - t0.max(0.0)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub epsilon: f64,
    pub measured: f64,
    /// `measured / ε^{1/k}`.
    pub ratio: f64,
    /// Right-hand side of the inequality without its unknown constant.
    pub rhs_without_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub points: Vec<ScalingPoint>,
    pub derivative_floor: f64,
    /// `sup_{1≤|γ|≤k+1} |∂^γ f|` estimated on the grid.
    pub derivative_norm: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Ratio never exceeds twice its value at the largest `ε`.
    pub bounded: bool,
}

/// Box `Π [a_i, b_i]`, directional derivative data and grid sizes for the
/// multi-variable sublevel check.
#[derive(Clone, Debug)]
pub struct ScalingSetup {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub beta: Vec<f64>,
    pub k: u32,
    pub a: f64,
    /// Midpoint cells per axis for the measure.
    pub cells: usize,
    /// Points per axis for derivative certification.
    pub cert_points: usize,
}

/// Checks that `meas{|f| ≤ ε} / ε^{1/k}` stays bounded along `epsilons`
/// when `inf_x max_{l≤k} |d_β^l f(x)| ≥ A`.
///
/// `f` must be defined on a neighbourhood of the box: derivatives are
/// central differences that step slightly outside it.
pub fn verify_sw23(
    f: impl Fn(&[f64]) -> f64 + Sync,
    setup: &ScalingSetup,
    epsilons: &[f64],
) -> Result<ScalingCheck, ResonanceError> {
    let d = setup.lo.len();
    let k = setup.k;
    if d == 0 || setup.hi.len() != d || setup.beta.len() != d {
        return Err(ResonanceError::Dimension("box and β must share one dimension".into()));
    }
    if setup.lo.iter().zip(&setup.hi).any(|(a, b)| !(b > a)) || k == 0 || setup.cells == 0 {
        return Err(ResonanceError::InvalidParams("empty box, k = 0 or no cells".into()));
    }
    if setup.beta.iter().all(|&b| b == 0.0) {
        return Err(ResonanceError::InvalidParams("β must be nonzero".into()));
    }
    if !(setup.a < 1.0) || epsilons.iter().any(|&e| !(e > 0.0 && e < setup.a)) {
        return Err(ResonanceError::InvalidParams(format!(
            "need 0 < ε < A < 1 (A = {})",
            setup.a
        )));
    }

    let widths: Vec<f64> = setup.lo.iter().zip(&setup.hi).map(|(a, b)| b - a).collect();
    let cert = grid_points(&setup.lo, &widths, setup.cert_points.max(2), false);
    let h = 1e-3 * widths.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = cert
        .par_iter()
        .map(|x| {
            (1..=k)
                .map(|l| directional_derivative(&f, x, &setup.beta, h, l).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| f64::INFINITY, f64::min);
    if floor < setup.a * (1.0 - 1e-4) {
        return Err(ResonanceError::NotCertified(format!(
            "max_l |d_β^l f| drops to {floor:.6e} < A = {:.6e}",
            setup.a
        )));
    }
    let derivative_norm = mixed_partials_sup(&f, &cert, d, k + 1, h);

    let cell_volume: f64 = widths.iter().map(|w| w / setup.cells as f64).product();
    // cell midpoints are streamed: d = 2 grids reach 10⁷ cells
    let total = setup.cells.pow(d as u32);
    let counts = (0..total)
        .into_par_iter()
        .fold(
            || vec![0usize; epsilons.len()],
            |mut acc, idx| {
                let x = grid_point(&setup.lo, &widths, setup.cells, true, idx);
                let v = f(&x).abs();
                for (c, &eps) in acc.iter_mut().zip(epsilons) {
                    if v <= eps {
                        *c += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; epsilons.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let diag = widths.iter().map(|w| w * w).sum::<f64>().sqrt();
    let corner: f64 = setup.lo.iter().zip(&setup.hi).map(|(a, b)| a.abs().max(b.abs())).sum();
    let df = d as f64;
    let points: Vec<ScalingPoint> = epsilons
        .iter()
        .zip(&counts)
        .map(|(&eps, &count)| {
            let measured = count as f64 * cell_volume;
            let root = eps.powf(1.0 / k as f64);
            ScalingPoint {
                epsilon: eps,
                measured,
                ratio: measured / root,
                rhs_without_constant: (derivative_norm * diag + 1.0).powf(df)
                    * corner.powf(df - 1.0)
                    * setup.a.powf(-(df + 1.0 / k as f64))
                    * root,
            }
        })
        .collect();
    let ratio_min = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let first = points.iter().max_by(|a, b| a.epsilon.total_cmp(&b.epsilon)).map_or(0.0, |p| p.ratio);
    Ok(ScalingCheck {
        bounded: ratio_max <= 2.0 * first,
        points,
        derivative_floor: floor,
        derivative_norm,
        ratio_min,
        ratio_max,
    })
}

/// Tensor grid over the box: cell midpoints, or `n` points including ends.
fn grid_points(lo: &[f64], widths: &[f64], n: usize, midpoints: bool) -> Vec<Vec<f64>> {
    let total = n.pow(lo.len() as u32);
    (0..total).map(|idx| grid_point(lo, widths, n, midpoints, idx)).collect()
}

/// Point `idx` of that grid, last axis fastest.
fn grid_point(lo: &[f64], widths: &[f64], n: usize, midpoints: bool, mut idx: usize) -> Vec<f64> {
    let d = lo.len();
    let mut x = vec![0.0; d];
    for a in (0..d).rev() {
        let i = (idx % n) as f64;
        idx /= n;
        x[a] = if midpoints {
            lo[a] + (i + 0.5) * widths[a] / n as f64
        } else {
            lo[a] + i * widths[a] / (n - 1) as f64
        };
    }
    x
}

/// Central difference for `d_β^l f(x)`.
fn directional_derivative(f: &impl Fn(&[f64]) -> f64, x: &[f64], beta: &[f64], h: f64, l: u32) -> f64 {
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut y = vec![0.0; x.len()];
    for i in 0..=l {
        let shift = (l as f64 / 2.0 - i as f64) * h;
        for (a, yi) in y.iter_mut().enumerate() {
            *yi = x[a] + shift * beta[a];
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(&y);
        binom = binom * (l - i) as f64 / (i + 1) as f64;
    }
    acc / h.powi(l as i32)
}

/// `max_{1≤|γ|≤order} |∂^γ f|` over `points` by tensor central differences.
fn mixed_partials_sup(f: &(impl Fn(&[f64]) -> f64 + Sync), points: &[Vec<f64>], d: usize, order: u32, h: f64) -> f64 {
    let mut orders: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..d {
        orders = orders
            .into_iter()
            .flat_map(|o| (0..=order).map(move |g| [o.clone(), vec![g]].concat()))
            .collect();
    }
    orders.retain(|g| {
        let s: u32 = g.iter().sum();
        s >= 1 && s <= order
    });
    points
        .par_iter()
        .map(|x| {
            orders
                .iter()
                .map(|g| mixed_partial(f, x, g, h).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

fn mixed_partial(f: &impl Fn(&[f64]) -> f64, x: &[f64], g: &[u32], h: f64) -> f64 {
    // stencil offsets per axis: (shift, weight)
    let stencils: Vec<Vec<(f64, f64)>> = g
        .iter()
        .map(|&l| {
            let mut out = Vec::new();
            let mut binom = 1.0;
            for i in 0..=l {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                out.push(((l as f64 / 2.0 - i as f64) * h, sign * binom / h.powi(l as i32)));
                binom = binom * (l - i) as f64 / (i + 1) as f64;
            }
            out
        })
        .collect();
    let mut acc = 0.0;
    let mut idx = vec![0usize; g.len()];
    let mut y = x.to_vec();
    loop {
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            let (s, wt) = stencils[a][i];
            y[a] = x[a] + s;
            w *= wt;
        }
        acc += w * f(&y);
        let mut a = 0;
        while a < idx.len() {
            idx[a] += 1;
            if idx[a] < stencils[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == idx.len() {
            return acc;
        }
    }
}
