use nsklim_core::acoustics::{acoustic_residuals, acoustic_sources, acoustic_variables};
use nsklim_core::integrator::{Integrator, IntegratorConfig};
use nsklim_core::model::{nsk_rhs, Alpha, NskParams, NskState};
use nsklim_core::spectral::{Parity, ScalarField, SlabGrid, VectorField, VELOCITY_PARITY};

const EPS: f64 = 0.1;
const H: f64 = 1e-5;

fn trajectory_point() -> (NskState, NskState, NskState, NskParams) {
    let g = SlabGrid::with_resolution(16, 8).unwrap();
    let pi = std::f64::consts::PI;
    let a = 0.05;
    let q = ScalarField::from_fn(g, Parity::Even, |x, y, z| a * (x.cos() * (pi * z).cos() + 0.5 * y.sin()));
    let theta = ScalarField::from_fn(g, Parity::Even, |x, y, _| a * (y.cos() - 0.3 * x.sin()));
    let u = VectorField::from_fn(g, VELOCITY_PARITY, |x, y, z| {
        [a * y.sin(), a * (x.cos() + 0.4 * (pi * z).cos()), a * (pi * z).sin() * y.cos()]
    });
    let params = NskParams::new(EPS, Alpha::One).unwrap();
    let cfg = IntegratorConfig { t_end: 0.02, dt_max: 0.005, ..Default::default() };
    let it = Integrator::new(g, params, cfg).unwrap();
    let start = NskState::new(q, u, theta, 0.0).unwrap();
    let (mid, _) = it.run(&start, |_, _| {}).unwrap();
    let fwd = it.try_step(&mid, H).unwrap();
    let back = it.try_step(&mid, -H).unwrap();
    (back, mid, fwd, params)
}

#[test]
fn acoustic_form_holds_along_trajectory() {
    let (back, mid, fwd, params) = trajectory_point();
    let (b, f) = (acoustic_variables(&back, EPS), acoustic_variables(&fwd, EPS));
    let sigma_t = (&f.sigma - &b.sigma).scale(0.5 / H);
    let momentum_t = (&f.u - &b.u).scale(0.5 / H);
    let rates = nsk_rhs(&mid, &params).unwrap();
    let sources = acoustic_sources(&mid, &params, &rates).unwrap();
    assert_eq!(sources.f.parity(), Parity::Even);
    assert_eq!(sources.l.parities(), VELOCITY_PARITY);
    let (r1, r2) = acoustic_residuals(&mid, EPS, &sigma_t, &momentum_t, &sources);
    let (n1, n2) = (r1.sobolev_norm(0).unwrap(), r2.sobolev_norm(0).unwrap());
    println!("continuity residual {n1:e}, momentum residual {n2:e}");
    assert!(n1 < 1e-6, "{n1}");
    assert!(n2 < 1e-6, "{n2}");
    // the sources are not trivially zero on this trajectory
    assert!(sources.f.sobolev_norm(0).unwrap() > 1e-3);
}
