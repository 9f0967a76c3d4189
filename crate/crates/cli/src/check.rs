//! Fast invariant suite behind `nsklim check`.

use std::path::Path;

use nsklim_core::acoustics::{cutoff_projection, kernel_projection, spectrum_report, AcousticField};
use nsklim_core::checkpoint;
use nsklim_core::integrator::{Integrator, IntegratorConfig};
use nsklim_core::limits::{euler2d_run, qg_run, qg_energy, EulerState2D, Field2D, QgState};
use nsklim_core::model::{Alpha, NskParams, NskState};
use nsklim_core::spectral::{Parity, ScalarField, SlabGrid, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: f64, tol: f64) -> CheckOutcome {
    CheckOutcome { name, passed: value.is_finite() && value <= tol, detail: format!("{value:.3e} (tol {tol:.0e})") }
}

fn random_velocity(grid: SlabGrid, rng: &mut ChaCha8Rng) -> VectorField {
    let mut f = |p| ScalarField::random(grid, p, 4.0, rng).dealiased();
    VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd))
}

fn vector_identity(grid: SlabGrid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let u = random_velocity(grid, rng);
    let rhs = &VectorField::gradient(&u.divergence()) - &u.curl().curl();
    let scale = u.laplacian().sobolev_norm(0).unwrap_or(1.0).max(1e-300);
    let defect = (&u.laplacian() - &rhs).sobolev_norm(0).unwrap_or(f64::INFINITY) / scale;
    outcome("vector laplacian identity", defect, 1e-12)
}

fn transform_round_trip(grid: SlabGrid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for parity in [Parity::Even, Parity::Odd] {
        let f = ScalarField::random(grid, parity, 3.0, rng).dealiased();
        let back = ScalarField::from_physical(grid, parity, &f.to_physical()).expect("lengths match");
        worst = worst.max((&back - &f).max_coeff() / f.max_coeff().max(1e-300));
    }
    outcome("transform round trip", worst, 1e-13)
}

fn projection_algebra(grid: SlabGrid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x = AcousticField::random(grid, 2.0, rng);
        let y = AcousticField::random(grid, 2.0, rng);
        let qx = kernel_projection(&x);
        worst = worst.max(kernel_projection(&qx).sub(&qx).norm() / x.norm());
        worst = worst.max((kernel_projection(&x).inner(&y) - x.inner(&kernel_projection(&y))).abs() / (x.norm() * y.norm()));
        let px = cutoff_projection(&x, 4.0);
        worst = worst.max(cutoff_projection(&px, 4.0).sub(&px).norm() / x.norm());
    }
    outcome("kernel and cutoff projections", worst, 1e-12)
}

fn spectrum() -> CheckOutcome {
    let report = spectrum_report(8, 1.0);
    let mut o = outcome("acoustic spectrum closed form", report.max_diff, 1e-12);
    o.passed &= report.kernel_zero_at_every_horizontal_mode;
    o
}

fn checkpoint_round_trip(grid: SlabGrid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut f = |p| ScalarField::random(grid, p, 3.0, rng).dealiased().scale(0.1);
    let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
    let state = NskState::new(f(Parity::Even), u, f(Parity::Even), 0.25).expect("parities match");
    let params = NskParams::new(0.1, Alpha::One).expect("valid params");
    let bytes = checkpoint::encode(&state, &params);
    let passed = matches!(checkpoint::decode(&bytes, Path::new("<memory>")), Ok((s, p)) if s == state && p == params);
    CheckOutcome { name: "checkpoint bit-exact round trip", passed, detail: format!("{} bytes", bytes.len()) }
}

fn limit_conservation(grid: SlabGrid, rng: &mut ChaCha8Rng) -> [CheckOutcome; 3] {
    let omega = Field2D::random(grid, 4.0, rng).dealiased();
    let e0 = EulerState2D::from_vorticity(&omega, 0.0);
    let e1 = euler2d_run(&e0, 0.2, 0.005, |_| {});
    let euler = outcome("Euler energy drift", (e1.energy() - e0.energy()).abs() / e0.energy(), 1e-6);
    let q0 = QgState { sigma: Field2D::random(grid, 4.0, rng).dealiased(), time: 0.0 };
    let q1 = qg_run(&q0, 0.2, 0.005, |_| {});
    let qg = outcome("QG energy drift", (qg_energy(&q1.sigma) - qg_energy(&q0.sigma)).abs() / qg_energy(&q0.sigma), 1e-6);
    let tg = EulerState2D::taylor_green(grid);
    let tg1 = euler2d_run(&tg, 0.2, 0.01, |_| {});
    let drift = (0..2).map(|i| (&tg1.w[i] - &tg.w[i]).max_abs()).fold(0.0, f64::max);
    [euler, qg, outcome("Taylor-Green steadiness", drift, 1e-8)]
}

fn integrator_smoke(grid: SlabGrid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut f = |p| ScalarField::random(grid, p, 4.0, rng).dealiased().scale(0.2);
    let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
    let name = "integrator short run";
    let result = NskState::new(f(Parity::Even), u, f(Parity::Even), 0.0)
        .map_err(|e| e.to_string())
        .and_then(|s| {
            let params = NskParams::new(0.2, Alpha::One).map_err(|e| e.to_string())?;
            let config = IntegratorConfig { t_end: 0.05, ..IntegratorConfig::default() };
            let integ = Integrator::new(grid, params, config).map_err(|e| e.to_string())?;
            integ.run(&s, |_, _| {}).map_err(|e| e.to_string())
        });
    match result {
        Ok((end, summary)) => {
            let defect = (end.time - 0.05).abs();
            CheckOutcome { name, passed: defect < 1e-12, detail: format!("{} steps, {} rejections", summary.steps, summary.rejections) }
        }
        Err(e) => CheckOutcome { name, passed: false, detail: e },
    }
}

/// Runs every check on a small grid with a fixed seed.
pub fn run_checks() -> Vec<CheckOutcome> {
    let grid = SlabGrid::with_resolution(16, 8).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut out = vec![
        vector_identity(grid, &mut rng),
        transform_round_trip(grid, &mut rng),
        projection_algebra(grid, &mut rng),
        spectrum(),
        checkpoint_round_trip(grid, &mut rng),
    ];
    out.extend(limit_conservation(SlabGrid::with_resolution(32, 4).expect("valid grid"), &mut rng));
    out.push(integrator_smoke(grid, &mut rng));
    out
}
