use nsklim_core::acoustics::{cutoff_projection, kernel_projection, AcousticField};
use nsklim_core::checkpoint;
use nsklim_core::diagnostics::{energy_functional, error_norms, fit_rate, initial_energy};
use nsklim_core::limits::{potential_vorticity, solve_initial_sigma, Field2D, SigmaSign};
use nsklim_core::model::{nsk_rhs, Alpha, NskParams, NskState};
use nsklim_core::spectral::{Parity, ScalarField, SlabGrid, VectorField, VELOCITY_PARITY};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> SlabGrid {
    SlabGrid::with_resolution(16, 8).unwrap()
}

fn random_state(seed: u64, amp: f64) -> NskState {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = |p| ScalarField::random(g, p, 4.0, &mut rng).scale(amp).dealiased();
    let q = f(Parity::Even);
    let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
    NskState::new(q, u, f(Parity::Even), 0.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), odd in any::<bool>()) {
        let g = grid();
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let f = ScalarField::random(g, parity, 2.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = ScalarField::from_physical(g, parity, &f.to_physical()).unwrap();
        prop_assert!((&back - &f).sobolev_norm(0).unwrap() < 1e-12 * f.sobolev_norm(0).unwrap());
    }

    #[test]
    fn parseval(seed in any::<u64>()) {
        let g = grid();
        let f = ScalarField::random(g, Parity::Even, 2.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let cell = (g.side() / g.n_h as f64).powi(2) / g.n_v as f64;
        let quad: f64 = f.to_physical().iter().map(|v| v * v).sum::<f64>() * cell;
        prop_assert!(rel(quad, f.sobolev_norm(0).unwrap().powi(2)) < 1e-10);
    }

    #[test]
    fn wall_conditions(seed in any::<u64>(), x in 0.0..std::f64::consts::TAU, y in 0.0..std::f64::consts::TAU) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = VectorField::new(
            ScalarField::random(g, Parity::Even, 3.0, &mut rng),
            ScalarField::random(g, Parity::Even, 3.0, &mut rng),
            ScalarField::random(g, Parity::Odd, 3.0, &mut rng),
        );
        for z in [0.0, 1.0] {
            prop_assert!(u.c[2].evaluate(x, y, z).abs() < 1e-12);
            prop_assert!(u.c[0].derivative(3).evaluate(x, y, z).abs() < 1e-12);
            prop_assert!(u.c[1].derivative(3).evaluate(x, y, z).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_identities(seed in any::<u64>()) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = ScalarField::random(g, Parity::Even, 4.0, &mut rng);
        let u = VectorField::new(
            ScalarField::random(g, Parity::Even, 4.0, &mut rng),
            ScalarField::random(g, Parity::Even, 4.0, &mut rng),
            ScalarField::random(g, Parity::Odd, 4.0, &mut rng),
        );
        let scale = u.sobolev_norm(2).unwrap() + f.sobolev_norm(2).unwrap();
        prop_assert!(VectorField::gradient(&f).curl().sobolev_norm(0).unwrap() < 1e-12 * scale);
        prop_assert!(u.curl().divergence().sobolev_norm(0).unwrap() < 1e-12 * scale);
        let lhs = u.laplacian();
        let rhs = &VectorField::gradient(&u.divergence()) - &u.curl().curl();
        prop_assert!((&lhs - &rhs).sobolev_norm(0).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn rhs_preserves_parity_and_mass(seed in any::<u64>(), eps in 0.05..1.0f64) {
        let s = random_state(seed, 0.1);
        let p = NskParams::new(eps, Alpha::One).unwrap();
        let r = nsk_rhs(&s, &p).unwrap();
        prop_assert_eq!(r.q.parity(), Parity::Even);
        prop_assert_eq!(r.theta.parity(), Parity::Even);
        prop_assert_eq!(r.u.parities(), VELOCITY_PARITY);
        prop_assert!(r.q.integral().abs() < 1e-12 * r.q.sobolev_norm(0).unwrap().max(1.0));
    }

    #[test]
    fn geostrophic_projection_algebra(seed in any::<u64>(), cutoff in 0.0..12.0f64) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = AcousticField::random(g, 2.0, &mut rng);
        let y = AcousticField::random(g, 2.0, &mut rng);
        let qx = kernel_projection(&x);
        let n = x.norm() * y.norm();
        prop_assert!(kernel_projection(&qx).sub(&qx).norm() < 1e-12 * x.norm());
        prop_assert!((qx.inner(&y) - x.inner(&kernel_projection(&y))).abs() < 1e-12 * n);
        let a = cutoff_projection(&qx, cutoff);
        let b = kernel_projection(&cutoff_projection(&x, cutoff));
        prop_assert!(a.sub(&b).norm() < 1e-12 * x.norm());
    }

    #[test]
    fn error_norm_triangle(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), s in 0u32..3) {
        let (x, y, z) = (random_state(a, 1.0), random_state(b, 1.0), random_state(c, 1.0));
        let xy = error_norms(&x, &y, s, 0.1).unwrap();
        let yz = error_norms(&y, &z, s, 0.1).unwrap();
        let xz = error_norms(&x, &z, s, 0.1).unwrap();
        let tol = 1e-12 * (xy.total() + yz.total());
        prop_assert!(xz.e_q <= xy.e_q + yz.e_q + tol);
        prop_assert!(xz.e_u <= xy.e_u + yz.e_u + tol);
        prop_assert!(xz.e_theta <= xy.e_theta + yz.e_theta + tol);
    }

    #[test]
    fn initial_energy_paths_agree(seed in any::<u64>()) {
        let s = random_state(seed, 0.2);
        let p = NskParams::new(0.2, Alpha::One).unwrap();
        let a = initial_energy(&s, &p).unwrap();
        let b = energy_functional(&s, &p, &nsk_rhs(&s, &p).unwrap());
        for (k, v) in &a.terms {
            prop_assert!(*v >= 0.0 && v.is_finite());
            prop_assert!(rel(*v, b.terms[k]) < 1e-12 || *v == b.terms[k]);
        }
    }

    #[test]
    fn rate_fit_recovers_power(c in 0.01..100.0f64, power in 0.5..3.0f64) {
        let pts: Vec<(f64, f64)> = [0.4f64, 0.2, 0.1, 0.05].iter().map(|e| (*e, c * e.powf(power))).collect();
        let f = fit_rate(&pts).unwrap();
        prop_assert!((f.slope - power).abs() < 1e-10);
        prop_assert!(f.residual < 1e-10);
    }

    #[test]
    fn elliptic_round_trip(seed in any::<u64>()) {
        let g = grid();
        let data = ScalarField::random(g, Parity::Even, 3.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let sigma = solve_initial_sigma(&VectorField::velocity_zeros(g), &data, SigmaSign::MinusConsistent).unwrap();
        let back = potential_vorticity(&sigma);
        let f = Field2D::vertical_mean(&data);
        prop_assert!((&back - &f).sobolev_norm(0) < 1e-12 * f.sobolev_norm(0).max(1e-300));
    }

    #[test]
    fn checkpoint_round_trip(seed in any::<u64>(), t in 0.0..10.0f64) {
        let mut s = random_state(seed, 0.3);
        s.time = t;
        let p = NskParams::new(0.3, Alpha::Zero).unwrap();
        let (back, pb) = checkpoint::decode(&checkpoint::encode(&s, &p), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, s);
        prop_assert_eq!(pb, p);
    }
}
