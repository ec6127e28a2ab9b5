//! Property tests across the polynomial, resonance and dynamics layers.

mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qpnls::dynamics::{energy, Integrator, LatticeState};
use qpnls::lattice_poly::{norm_in, text, Annulus, BoxGeometry, MultiIndex};
use qpnls::potential::{FrequencyTerm, PotentialSpec};
use qpnls::resonance::{resonant_fractions, wronskian_det, DivisorIndex, ResonanceParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_poly, site_pool};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_state(seed: u64, geo: BoxGeometry) -> LatticeState {
    let mut r = rng(seed);
    let amps = (0..geo.len()).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    LatticeState::new(geo, amps).unwrap()
}

fn chain(v: f64, theta: f64, alpha: f64) -> PotentialSpec {
    PotentialSpec {
        d: 1,
        scale: 1,
        terms: vec![FrequencyTerm { ell: MultiIndex::d1(1), v }],
        theta: vec![theta],
        alpha: vec![alpha],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>(), d in 1usize..=2) {
        let mut r = rng(seed);
        let pool = site_pool(&mut r, d, -2, 2, 4);
        let w = random_poly(&mut r, d, &pool, 5, 4);
        let u = random_poly(&mut r, d, &pool, 5, 4);
        let sum = w.bracket(&u).unwrap().add(&u.bracket(&w).unwrap()).unwrap();
        let scale = w.max_abs() * u.max_abs();
        prop_assert!(sum.max_abs() <= 1e-14 * scale.max(1.0));
    }

    #[test]
    fn bracket_satisfies_jacobi(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = site_pool(&mut r, 1, -2, 2, 3);
        let a = random_poly(&mut r, 1, &pool, 3, 3);
        let b = random_poly(&mut r, 1, &pool, 3, 3);
        let c = random_poly(&mut r, 1, &pool, 3, 3);
        let br = |x: &qpnls::lattice_poly::HamiltonianPoly, y: &qpnls::lattice_poly::HamiltonianPoly| x.bracket(y).unwrap();
        let total = br(&br(&a, &b), &c).add(&br(&br(&b, &c), &a)).unwrap().add(&br(&br(&c, &a), &b)).unwrap();
        let scale = a.max_abs() * b.max_abs() * c.max_abs();
        prop_assert!(total.max_abs() <= 1e-12 * scale.max(1.0), "{}", total.max_abs());
    }

    #[test]
    fn bracket_norm_estimate(seed in any::<u64>(), r in 2.2f64..5.0, frac in 0.02f64..0.98) {
        let mut g = rng(seed);
        let annulus = Annulus::new(3.0, 1.0);
        let inside = annulus.sites(1);
        let w_pool: Vec<MultiIndex> = (0..3).map(|_| inside[g.random_range(0..inside.len())].clone()).collect();
        let mut u_pool = w_pool.clone();
        u_pool.extend(site_pool(&mut g, 1, -6, 6, 2));
        let w = random_poly(&mut g, 1, &w_pool, 4, 4);
        let u = random_poly(&mut g, 1, &u_pool, 4, 4);
        let sigma = frac * (r - 2.0);
        let lhs = norm_in(&w.bracket(&u).unwrap(), &annulus, r - sigma);
        let rhs = norm_in(&w, &annulus, r) * norm_in(&u, &annulus, r) / sigma;
        prop_assert!(lhs <= rhs, "{lhs} > {rhs}");
    }

    #[test]
    fn divisor_flips_sign_under_negation(seed in any::<u64>(), theta in 0.0f64..1.0, alpha in 0.0f64..1.0) {
        let mut g = rng(seed);
        let spec = chain(1.0, theta, alpha);
        let sites = site_pool(&mut g, 1, -8, 8, 3);
        let k = DivisorIndex::new(sites.into_iter().map(|j| (j, g.random_range(1..=3) * if g.random_bool(0.5) { 1 } else { -1 })));
        prop_assume!(k.is_some());
        let k = k.unwrap();
        let omega = |j: &MultiIndex| Some(spec.eval(j));
        let (a, b) = (k.value(omega).unwrap(), k.neg().value(omega).unwrap());
        prop_assert!((a + b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn wronskian_factorization_matches_direct_determinant(
        theta in 0.0f64..1.0,
        alpha in 0.0f64..1.0,
        n in 1usize..=3,
        start in -4i32..4,
    ) {
        let spec = chain(1.0, theta, alpha);
        let support: Vec<MultiIndex> = (0..n as i32).map(|i| MultiIndex::d1(start + 2 * i)).collect();
        let xi = [0.41421356, 0.73205081];
        let w = wronskian_det(&spec, &support, Some(&xi));
        prop_assume!(w.is_ok());
        let w = w.unwrap();
        // W[s][c] = d_xi^{2s} V_c for s = 1..n, built entry by entry
        let tau = std::f64::consts::TAU;
        let m = DMatrix::from_fn(n, n, |s, c| {
            let j = support[c].coords()[0] as f64;
            let lambda = j * xi[0] + xi[1];
            let mu = (tau * lambda).powi(2);
            let v = (tau * (theta + j * alpha)).cos();
            v * (-mu).powi(s as i32 + 1)
        });
        let direct = m.determinant();
        prop_assert!((w.det() - direct).abs() <= 1e-8 * direct.abs().max(1e-300), "{} vs {}", w.det(), direct);
    }

    #[test]
    fn gauge_rotation_commutes_with_flow(seed in any::<u64>(), phi in 0.0f64..6.3) {
        let geo = BoxGeometry::new(vec![0, 0], vec![4, 3]).unwrap();
        let spec = PotentialSpec::random(&mut rng(seed ^ 1), 2, 2, 2);
        let integ = Integrator::new(&spec, geo.clone(), 0.3, 0.2, 0.01);
        let rot = Complex64::from_polar(1.0, phi);
        let mut a = random_state(seed, geo.clone());
        let mut b = LatticeState::new(geo, a.amplitudes().iter().map(|z| z * rot).collect()).unwrap();
        integ.advance(&mut a, 50);
        integ.advance(&mut b, 50);
        let err = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x * rot - y).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn energy_matches_direct_sum(seed in any::<u64>(), e1 in -1.0f64..1.0, e2 in -1.0f64..1.0) {
        let geo = BoxGeometry::new(vec![-1, 0], vec![2, 2]).unwrap();
        let spec = PotentialSpec::random(&mut rng(seed ^ 2), 2, 2, 3);
        let integ = Integrator::new(&spec, geo.clone(), e1, e2, 0.01);
        let state = random_state(seed, geo.clone());
        let mut h = 0.0;
        for (j, q) in state.iter() {
            h += spec.eval(&j) * q.norm_sqr() + 0.5 * e2 * q.norm_sqr().powi(2);
            for axis in 0..2 {
                let k = j.offset(axis, 1);
                if geo.contains(&k) {
                    h += e1 * 2.0 * (q * state.get(&k).conj()).re;
                }
            }
        }
        let expect = 0.5 * h;
        prop_assert!((energy(&state, &integ) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn polynomial_text_round_trip(seed in any::<u64>(), d in 1usize..=3) {
        let mut g = rng(seed);
        let pool = site_pool(&mut g, d, -5, 5, 5);
        let p = random_poly(&mut g, d, &pool, 8, 5);
        prop_assert_eq!(text::from_text(&text::to_text(&p)).unwrap(), p);
    }

    #[test]
    fn checkpoint_round_trip(seed in any::<u64>(), t in 0.0f64..100.0) {
        let mut s = random_state(seed, BoxGeometry::new(vec![-2, 1], vec![1, 3]).unwrap());
        s.time = t;
        let back = LatticeState::from_text(&s.to_text()).unwrap();
        prop_assert_eq!(back.amplitudes(), s.amplitudes());
        prop_assert_eq!(back.time, t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn flow_is_time_reversible(seed in any::<u64>()) {
        let geo = BoxGeometry::new(vec![0], vec![31]).unwrap();
        let spec = PotentialSpec::random(&mut rng(seed ^ 3), 1, 1, 1);
        let forward = Integrator::new(&spec, geo.clone(), 0.2, 0.5, 0.01);
        let backward = forward.with_dt(-0.01);
        let start = random_state(seed, geo);
        let mut s = start.clone();
        forward.advance(&mut s, 1000);
        backward.advance(&mut s, 1000);
        let err = s.amplitudes().iter().zip(start.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn resonant_fraction_grows_with_floor(seed in any::<u64>()) {
        let params = ResonanceParams::new(0.1, 1, 1, 4, 1, 1e-6).unwrap();
        let taus = [1e-6, 1e-4, 1e-2, 1e-1, 0.5];
        let est = resonant_fractions(&params, &chain(1.0, 0.0, 0.0), &taus, 200, seed).unwrap();
        for pair in est.windows(2) {
            prop_assert!(pair[0].resonant <= pair[1].resonant);
        }
    }
}
