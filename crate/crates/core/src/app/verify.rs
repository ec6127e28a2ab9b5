//! Built-in battery for the three inequality verifiers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::resonance::inequalities::{verify_bgg85, verify_km98, verify_sw23, ScalingSetup};

use super::config::VerifySection;
use super::AppError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub case: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: &'static str,
    pub pass: bool,
}

impl VerifyRow {
    fn new(check: &str, case: &str, measured: f64, bound: f64, relation: &'static str, pass: bool) -> Self {
        VerifyRow { check: check.into(), case: case.into(), measured, bound, relation, pass }
    }
}

/// Random integer family of `r ≤ 3` vectors with entries in `[−M, M]`.
fn random_basis(rng: &mut ChaCha8Rng, max_entry: i32) -> (Vec<Vec<f64>>, Vec<f64>) {
    let r = rng.random_range(1..=3);
    let vectors = (0..r)
        .map(|_| (0..r).map(|_| rng.random_range(-max_entry..=max_entry) as f64).collect())
        .collect();
    let w = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
    (vectors, w)
}

pub fn verify_battery(section: &VerifySection, seed: u64) -> Result<Vec<VerifyRow>, AppError> {
    let mut rows = Vec::new();

    let one = verify_bgg85(&[vec![3.0]], &[-2.0])?;
    rows.push(VerifyRow::new("bgg85", "r=1 v=(3) w=(-2)", one.lhs, one.rhs, ">=", one.holds && (one.lhs - one.rhs).abs() < 1e-12));
    let id = verify_bgg85(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[3.0, 4.0])?;
    rows.push(VerifyRow::new("bgg85", "identity r=2 w=(3,4)", id.lhs, id.rhs, ">=", id.holds));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut tightest = f64::INFINITY;
    for _ in 0..section.bgg85_bases {
        let (v, w) = random_basis(&mut rng, section.bgg85_max_entry);
        let c = verify_bgg85(&v, &w)?;
        if !c.holds {
            violations += 1;
        }
        if c.rhs > 0.0 {
            tightest = tightest.min(c.lhs / c.rhs);
        }
    }
    rows.push(VerifyRow::new(
        "bgg85",
        &format!("{} random integer bases, violations", section.bgg85_bases),
        violations as f64,
        0.0,
        "<=",
        violations == 0,
    ));
    rows.push(VerifyRow::new("bgg85", "smallest lhs/rhs over random bases", tightest, 1.0, ">=", tightest >= 1.0 - 1e-12));

    let lin = verify_km98(|x| x, (0.0, 1.0), 1, 1.0, 0.1)?;
    rows.push(VerifyRow::new("km98", "f=x on [0,1], k=1, A=1, gamma=0.1", lin.measured, lin.bound, "<=", lin.holds));
    let quad = verify_km98(|x| x * x, (-1.0, 1.0), 2, 2.0, 0.01)?;
    rows.push(VerifyRow::new("km98", "f=x^2 on [-1,1], k=2, A=2, gamma=0.01", quad.measured, quad.bound, "<=", quad.holds));
    let zero = verify_km98(|x| x, (0.0, 1.0), 1, 1.0, 0.0)?;
    rows.push(VerifyRow::new("km98", "f=x, gamma=0", zero.measured, zero.bound, "<=", zero.holds));

    // centred so that {|x+y| ≤ ε} is the full diagonal strip of area ε(2−ε)
    let strip = ScalingSetup {
        lo: vec![-0.5, -0.5],
        hi: vec![0.5, 0.5],
        beta: vec![1.0, 1.0],
        k: 1,
        a: 0.9,
        cells: section.sw23_cells,
        cert_points: 33,
    };
    let sc = verify_sw23(|x| x[0] + x[1], &strip, &section.sw23_epsilons)?;
    rows.push(VerifyRow::new(
        "sw23",
        "f=x+y on [-1/2,1/2]^2, beta=(1,1), k=1: max ratio vs 2x largest-eps ratio",
        sc.ratio_max,
        2.0 * sc.points.iter().max_by(|a, b| a.epsilon.total_cmp(&b.epsilon)).map_or(0.0, |p| p.ratio),
        "<=",
        sc.bounded,
    ));
    let within = sc.points.iter().all(|p| p.ratio >= 1.0 && p.ratio <= 4.0);
    rows.push(VerifyRow::new("sw23", "diagonal strip: smallest ratio vs exact 2 / 2", sc.ratio_min, 1.0, ">=", within));
    rows.push(VerifyRow::new("sw23", "diagonal strip: largest ratio vs exact 2 * 2", sc.ratio_max, 4.0, "<=", within));
    let line = ScalingSetup { lo: vec![0.0], hi: vec![1.0], beta: vec![1.0], k: 1, a: 0.9, cells: 1 << 16, cert_points: 65 };
    let d1 = verify_sw23(|x| x[0], &line, &[0.1])?;
    let cross = (d1.points[0].measured - lin.measured).abs();
    rows.push(VerifyRow::new("sw23", "d=1 f=x at eps=0.1 agrees with km98", cross, 1e-4, "<=", cross <= 1e-4));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_passes() {
        let s = VerifySection { bgg85_bases: 200, sw23_cells: 1024, ..VerifySection::default() };
        let rows = verify_battery(&s, 1).unwrap();
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }
}
