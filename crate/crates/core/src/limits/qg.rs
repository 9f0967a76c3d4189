use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Field2D, LimitError};
use crate::spectral::{ScalarField, VectorField};

/// Sign convention of the initial elliptic problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaSign {
    /// `Δσ + σ = f`, resonant at `|ξ| = 1`.
    PaperPlus,
    /// `Δσ - σ = f`, consistent with the evolved potential vorticity.
    MinusConsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QgState {
    pub sigma: Field2D,
    pub time: f64,
}

/// `σ₀` from the vertical means of `curl_h u₀` and of the supplied data.
pub fn solve_initial_sigma(u0: &VectorField, sigma_data: &ScalarField, sign: SigmaSign) -> Result<Field2D, LimitError> {
    u0.grid().check_same(sigma_data.grid())?;
    let curl_h = &u0.c[1].derivative(1) - &u0.c[0].derivative(2);
    let rhs = &Field2D::vertical_mean(&curl_h) + &Field2D::vertical_mean(sigma_data);
    let g = *rhs.grid();
    let n = g.n_h;
    let mut out = Field2D::zeros(g);
    let mut resonant = Vec::new();
    for i1 in 0..n {
        for i2 in 0..n {
            let f = rhs.coeffs()[i1 * n + i2];
            let k2 = g.xi(i1).powi(2) + g.xi(i2).powi(2);
            let s = match sign {
                SigmaSign::MinusConsistent => -f / (1.0 + k2),
                SigmaSign::PaperPlus => {
                    let d = 1.0 - k2;
                    if d.abs() < 1e-12 {
                        if f.norm_sqr() > 1e-14 {
                            resonant.push((g.signed(i1), g.signed(i2)));
                        }
                        Complex64::new(0.0, 0.0)
                    } else {
                        f / d
                    }
                }
            };
            out.coeffs_mut()[i1 * n + i2] = s;
        }
    }
    if !resonant.is_empty() {
        return Err(LimitError::Resonance { modes: resonant });
    }
    Ok(out)
}

/// `P = Δσ - σ`.
pub fn potential_vorticity(sigma: &Field2D) -> Field2D {
    &sigma.laplacian() - sigma
}

/// Inverse of [`potential_vorticity`].
pub fn sigma_from_pv(pv: &Field2D) -> Field2D {
    pv.map_modes(|x1, x2| Complex64::new(-1.0 / (1.0 + x1 * x1 + x2 * x2), 0.0))
}

/// `∂ₜP = -∇^⊥σ · ∇Δσ`.
pub fn qg_rhs(state: &QgState) -> Field2D {
    let sigma = &state.sigma;
    let [a1, a2] = sigma.perp_gradient();
    let [b1, b2] = sigma.laplacian().gradient();
    Field2D::sum_of_products(*sigma.grid(), &[(&a1, &b1), (&a2, &b2)]).scale(-1.0)
}

/// `½∫(|∇σ|² + σ²)`.
pub fn qg_energy(sigma: &Field2D) -> f64 {
    0.5 * sigma.sobolev_norm(1).powi(2)
}

/// `½∫P²`.
pub fn qg_enstrophy(sigma: &Field2D) -> f64 {
    0.5 * potential_vorticity(sigma).sobolev_norm(0).powi(2)
}

fn pv_rhs(pv: &Field2D) -> Field2D {
    qg_rhs(&QgState { sigma: sigma_from_pv(pv), time: 0.0 })
}

/// Classical RK4 on the potential vorticity.
pub fn qg_step(state: &QgState, dt: f64) -> QgState {
    let p0 = potential_vorticity(&state.sigma);
    let stage = |base: &Field2D, k: &Field2D, h: f64| {
        let mut x = base.clone();
        x.axpy(h, k);
        x
    };
    let k1 = pv_rhs(&p0);
    let k2 = pv_rhs(&stage(&p0, &k1, 0.5 * dt));
    let k3 = pv_rhs(&stage(&p0, &k2, 0.5 * dt));
    let k4 = pv_rhs(&stage(&p0, &k3, dt));
    let mut p = p0;
    p.axpy(dt / 6.0, &k1);
    p.axpy(dt / 3.0, &k2);
    p.axpy(dt / 3.0, &k3);
    p.axpy(dt / 6.0, &k4);
    QgState { sigma: sigma_from_pv(&p), time: state.time + dt }
}

/// Fixed-step integration to `t_end` (the last step is shortened to land on
/// it). `observer` sees the initial state and every accepted step.
pub fn qg_run(initial: &QgState, t_end: f64, dt: f64, mut observer: impl FnMut(&QgState)) -> QgState {
    let mut s = initial.clone();
    observer(&s);
    let tol = 1e-12 * t_end.abs().max(1.0);
    while s.time < t_end - tol {
        let h = dt.min(t_end - s.time);
        s = qg_step(&s, h);
        observer(&s);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Parity, SlabGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SlabGrid {
        SlabGrid::with_resolution(32, 4).unwrap()
    }

    fn state(f: impl Fn(f64, f64) -> f64) -> QgState {
        QgState { sigma: Field2D::from_fn(grid(), f), time: 0.0 }
    }

    #[test]
    fn parallel_gradients_give_zero_rhs() {
        let zonal = state(|x, _| x.cos());
        assert!(qg_rhs(&zonal).sobolev_norm(0) < 1e-13 * zonal.sigma.sobolev_norm(0));
        // Δσ = -σ for unit wavenumbers, so ∇^⊥σ ⊥ ∇Δσ
        let cell = state(|x, y| x.cos() + y.cos());
        assert!(qg_rhs(&cell).sobolev_norm(0) < 1e-13 * cell.sigma.sobolev_norm(0).powi(2));
    }

    #[test]
    fn jacobian_closed_form() {
        let s = state(|x, y| x.cos() + (2.0 * y).cos());
        let rhs = qg_rhs(&s);
        let expect = Field2D::from_fn(grid(), |x, y| 6.0 * x.sin() * (2.0 * y).sin());
        assert!((&rhs - &expect).sobolev_norm(0) < 1e-13 * expect.sobolev_norm(0));
        let vals = rhs.to_physical();
        let g = grid();
        for (p1, p2) in [(1, 3), (7, 20), (15, 2), (30, 31), (4, 9)] {
            let (x, y) = (g.x_h(p1), g.x_h(p2));
            assert!((vals[p1 * g.n_h + p2] - 6.0 * x.sin() * (2.0 * y).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_has_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = QgState { sigma: Field2D::random(grid(), 3.0, &mut rng).dealiased(), time: 0.0 };
        assert!(qg_rhs(&s).integral().abs() < 1e-13);
    }

    #[test]
    fn zonal_flow_is_steady() {
        let s0 = state(|_, y| y.cos());
        let s1 = qg_run(&s0, 0.5, 0.05, |_| {});
        assert!((&s1.sigma - &s0.sigma).sobolev_norm(0) < 1e-12);
        assert!((s1.time - 0.5).abs() < 1e-15);
    }

    #[test]
    fn initial_sigma_examples() {
        let g = SlabGrid::with_resolution(16, 4).unwrap();
        let u0 = VectorField::velocity_zeros(g);
        let zero = ScalarField::zeros(g, Parity::Even);
        let s = solve_initial_sigma(&u0, &zero, SigmaSign::MinusConsistent).unwrap();
        assert_eq!(s.sobolev_norm(0), 0.0);

        let f = ScalarField::from_fn(g, Parity::Even, |x, _, _| (2.0 * x).cos());
        let s = solve_initial_sigma(&u0, &f, SigmaSign::MinusConsistent).unwrap();
        let expect = Field2D::vertical_mean(&f).scale(-0.2);
        assert!((&s - &expect).sobolev_norm(0) < 1e-14);
        let back = potential_vorticity(&s);
        assert!((&back - &Field2D::vertical_mean(&f)).sobolev_norm(0) < 1e-13);

        let f = ScalarField::from_fn(g, Parity::Even, |x, _, _| x.cos());
        match solve_initial_sigma(&u0, &f, SigmaSign::PaperPlus) {
            Err(LimitError::Resonance { modes }) => {
                assert!(modes.contains(&(1, 0)) && modes.contains(&(-1, 0)));
            }
            other => panic!("expected resonance, got {other:?}"),
        }
        let f = ScalarField::from_fn(g, Parity::Even, |x, _, _| (2.0 * x).cos());
        let s = solve_initial_sigma(&u0, &f, SigmaSign::PaperPlus).unwrap();
        assert!((&s - &Field2D::vertical_mean(&f).scale(-1.0 / 3.0)).sobolev_norm(0) < 1e-14);
    }

    #[test]
    fn vertical_mean_of_curl_enters() {
        // u = (0, sin x₁, 0): curl_h u = cos x₁, so Δσ - σ = cos x₁
        let g = SlabGrid::with_resolution(16, 4).unwrap();
        let u0 = VectorField::from_fn(g, crate::spectral::VELOCITY_PARITY, |x, _, _| [0.0, x.sin(), 0.0]);
        let s = solve_initial_sigma(&u0, &ScalarField::zeros(g, Parity::Even), SigmaSign::MinusConsistent).unwrap();
        let expect = Field2D::from_fn(g, |x, _| -0.5 * x.cos());
        assert!((&s - &expect).sobolev_norm(0) < 1e-13);
    }
}
