use nsklim_core::integrator::{Integrator, IntegratorConfig, Scheme};
use nsklim_core::model::{Alpha, NskParams, NskState};
use nsklim_core::spectral::{Parity, ScalarField, SlabGrid, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(g: SlabGrid, amp: f64) -> NskState {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut f = |p| ScalarField::random(g, p, 6.0, &mut rng).scale(amp).dealiased();
    let q = f(Parity::Even);
    let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
    NskState::new(q, u, f(Parity::Even), 0.0).unwrap()
}

fn fixed_steps(it: &Integrator, s0: &NskState, n: usize, t: f64) -> NskState {
    let dt = t / n as f64;
    (0..n).fold(s0.clone(), |s, _| it.try_step(&s, dt).unwrap())
}

fn distance(a: &NskState, b: &NskState) -> f64 {
    a.pack().iter().zip(b.pack()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn observed_order(scheme: Scheme) -> f64 {
    let g = SlabGrid::with_resolution(16, 8).unwrap();
    let p = NskParams::new(0.2, Alpha::One).unwrap();
    let cfg = IntegratorConfig { scheme, ..Default::default() };
    let it = Integrator::new(g, p, cfg).unwrap();
    let s0 = data(g, 0.5);
    let t = 0.1;
    let [a, b, c] = [4, 8, 16].map(|n| fixed_steps(&it, &s0, n, t));
    (distance(&a, &b) / distance(&b, &c)).log2()
}

#[test]
fn self_convergence_at_declared_order() {
    for scheme in [Scheme::Ifrk2, Scheme::Ifrk4] {
        let order = observed_order(scheme);
        println!("{scheme:?}: observed order {order:.3}");
        assert!((order - scheme.order() as f64).abs() < 0.3, "{scheme:?}: {order}");
    }
}

#[test]
fn step_counts_uniform_in_eps() {
    let g = SlabGrid::with_resolution(16, 8).unwrap();
    let s0 = data(g, 0.3);
    let steps: Vec<usize> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&e| {
            let p = NskParams::new(e, Alpha::Zero).unwrap();
            let cfg = IntegratorConfig { t_end: 0.1, ..Default::default() };
            let (_, sum) = Integrator::new(g, p, cfg).unwrap().run(&s0, |_, _| {}).unwrap();
            assert_eq!(sum.rejections, 0);
            sum.steps
        })
        .collect();
    assert!(steps[3] <= 2 * steps[0], "{steps:?}");
}
