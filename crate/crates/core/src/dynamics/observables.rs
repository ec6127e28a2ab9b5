//! Mass, energy and barrier mass.

use serde::{Deserialize, Serialize};

use super::integrator::Integrator;
use super::state::LatticeState;

/// `Σ|q_j|²`.
pub fn mass(state: &LatticeState) -> f64 {
    state.amplitudes().iter().map(|q| q.norm_sqr()).sum()
}

/// `(Σ|q_j|²)^{1/2}`.
pub fn l2_norm(state: &LatticeState) -> f64 {
    mass(state).sqrt()
}

/// `Σ_{|j| > radius} |q_j|²` with Euclidean `|j|`.
pub fn barrier_mass(state: &LatticeState, radius: f64) -> f64 {
    state
        .iter()
        .filter(|(j, _)| j.norm() > radius)
        .map(|(_, q)| q.norm_sqr())
        .sum()
}

/// `H = ½(Σ V_j|q_j|² + ε₁ Σ_{|i−j|₁=1} q_i q̄_j + ½ε₂ Σ|q_j|⁴)` over the box,
/// which generates the flow through `i q̇ = 2∂H/∂q̄`.
pub fn energy(state: &LatticeState, integ: &Integrator) -> f64 {
    let q = state.amplitudes();
    let mut diag = 0.0;
    let mut quartic = 0.0;
    for (z, &v) in q.iter().zip(integ.potential()) {
        let m = z.norm_sqr();
        diag += v * m;
        quartic += m * m;
    }
    // each bond appears as q_a q̄_b + q_b q̄_a = 2 Re(q_a q̄_b)
    let hop: f64 = integ
        .sweeps()
        .iter()
        .flatten()
        .map(|&(a, b)| 2.0 * (q[a] * q[b].conj()).re)
        .sum();
    0.5 * (diag + integ.epsilon1() * hop + 0.5 * integ.epsilon2() * quartic)
}

/// One row of the trajectory output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub l2_norm: f64,
    pub energy: f64,
    #[serde(rename = "barrier_mass@j0")]
    pub inner: f64,
    #[serde(rename = "barrier_mass@j0+M^2")]
    pub outer: f64,
}

impl TrajectoryRow {
    pub fn measure(state: &LatticeState, integ: &Integrator, j0: f64, outer_radius: f64) -> Self {
        TrajectoryRow {
            t: state.time,
            l2_norm: l2_norm(state),
            energy: energy(state, integ),
            inner: barrier_mass(state, j0),
            outer: barrier_mass(state, outer_radius),
        }
    }
}

/// Least-squares slope of `y` against `x`; zero for fewer than two points.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..n {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::lattice_poly::{BoxGeometry, MultiIndex};
    use crate::potential::{FrequencyTerm, PotentialSpec};

    #[test]
    fn single_site_energy() {
        // V₀ = 2 from v = 2, θ = 0, and q₀ = 1
        let spec = PotentialSpec {
            d: 1,
            scale: 1,
            terms: vec![FrequencyTerm { ell: MultiIndex::d1(1), v: 2.0 }],
            theta: vec![0.0],
            alpha: vec![0.3],
        };
        let geo = BoxGeometry::cube(1, 0);
        let integ = Integrator::new(&spec, geo.clone(), 0.7, 0.4, 0.01);
        let s = LatticeState::from_fn(geo.clone(), |_| Complex64::new(1.0, 0.0));
        assert!((energy(&s, &integ) - 1.1).abs() < 1e-15);
        assert_eq!(energy(&LatticeState::zeros(geo), &integ), 0.0);
    }

    #[test]
    fn barrier_mass_edges() {
        let geo = BoxGeometry::cube(2, 3);
        let origin = LatticeState::from_fn(geo.clone(), |j| {
            if j.norm_sq() == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        assert_eq!(barrier_mass(&origin, 1.0), 0.0);
        let uniform = LatticeState::from_fn(geo, |_| Complex64::new(1.0, 0.0));
        assert_eq!(barrier_mass(&uniform, -1.0), mass(&uniform));
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|t| 0.5 - 2.0 * t).collect();
        assert!((ls_slope(&x, &y) + 2.0).abs() < 1e-15);
        assert_eq!(ls_slope(&[1.0], &[1.0]), 0.0);
    }
}
