use super::{Field2D, LimitError};
use crate::spectral::SlabGrid;

/// Incompressible 2D flow with its zero-mean pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerState2D {
    pub w: [Field2D; 2],
    pub pi: Field2D,
    pub time: f64,
}

/// Time derivatives of velocity and pressure at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerRates {
    pub dw_dt: [Field2D; 2],
    pub dpi_dt: Field2D,
}

/// `w = ∇^⊥Δ⁻¹ω`; the mean of `ω` carries no velocity on the torus and is
/// dropped.
pub fn velocity_from_vorticity(omega: &Field2D) -> [Field2D; 2] {
    omega.zero_mean_inverse_laplacian().perp_gradient()
}

/// Zero-mean solution of `Δπ = -div(w·∇w)`.
pub fn pressure(w: &[Field2D; 2]) -> Field2D {
    let grid = *w[0].grid();
    let gw = [w[0].gradient(), w[1].gradient()];
    let adv = [0, 1].map(|i| Field2D::sum_of_products(grid, &[(&w[0], &gw[i][0]), (&w[1], &gw[i][1])]));
    let div = &adv[0].derivative(1) + &adv[1].derivative(2);
    div.zero_mean_inverse_laplacian().scale(-1.0)
}

/// `ω_t = -w·∇ω`.
pub fn vorticity_rhs(omega: &Field2D) -> Field2D {
    let w = velocity_from_vorticity(omega);
    let [g1, g2] = omega.gradient();
    Field2D::sum_of_products(*omega.grid(), &[(&w[0], &g1), (&w[1], &g2)]).scale(-1.0)
}

impl EulerState2D {
    pub fn from_vorticity(omega: &Field2D, time: f64) -> Self {
        let w = velocity_from_vorticity(&omega.clone().dealiased());
        let pi = pressure(&w);
        Self { w, pi, time }
    }

    /// Validates `div w = 0` and computes the pressure.
    pub fn from_velocity(w: [Field2D; 2], time: f64) -> Result<Self, LimitError> {
        let div = &w[0].derivative(1) + &w[1].derivative(2);
        let max_div = div.max_abs();
        let scale = w[0].max_abs().max(w[1].max_abs()).max(1.0);
        if max_div > 1e-12 * scale {
            return Err(LimitError::NotDivergenceFree { max_div });
        }
        let pi = pressure(&w);
        Ok(Self { w, pi, time })
    }

    /// `w = (-cos x₁ sin x₂, sin x₁ cos x₂)` in units of the torus scale.
    pub fn taylor_green(grid: SlabGrid) -> Self {
        let l = grid.l_h;
        let omega = Field2D::from_fn(grid, |x, y| 2.0 / l * (x / l).cos() * (y / l).cos());
        Self::from_vorticity(&omega, 0.0)
    }

    pub fn grid(&self) -> &SlabGrid {
        self.w[0].grid()
    }

    pub fn vorticity(&self) -> Field2D {
        &self.w[1].derivative(1) - &self.w[0].derivative(2)
    }

    pub fn divergence(&self) -> Field2D {
        &self.w[0].derivative(1) + &self.w[1].derivative(2)
    }

    /// `½∫|w|²`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.w[0].sobolev_norm(0).powi(2) + self.w[1].sobolev_norm(0).powi(2))
    }

    /// `½∫ω²`.
    pub fn enstrophy(&self) -> f64 {
        0.5 * self.vorticity().sobolev_norm(0).powi(2)
    }
}

fn rk4_vorticity(omega: &Field2D, dt: f64) -> Field2D {
    let stage = |k: &Field2D, h: f64| {
        let mut x = omega.clone();
        x.axpy(h, k);
        x
    };
    let k1 = vorticity_rhs(omega);
    let k2 = vorticity_rhs(&stage(&k1, 0.5 * dt));
    let k3 = vorticity_rhs(&stage(&k2, 0.5 * dt));
    let k4 = vorticity_rhs(&stage(&k3, dt));
    let mut out = omega.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

/// RK4 in vorticity form; `dt` may be negative.
pub fn euler2d_step(state: &EulerState2D, dt: f64) -> EulerState2D {
    let omega = rk4_vorticity(&state.vorticity(), dt);
    EulerState2D::from_vorticity(&omega, state.time + dt)
}

pub fn euler2d_run(
    initial: &EulerState2D,
    t_end: f64,
    dt: f64,
    mut observer: impl FnMut(&EulerState2D),
) -> EulerState2D {
    let mut s = initial.clone();
    observer(&s);
    let tol = 1e-12 * t_end.abs().max(1.0);
    while s.time < t_end - tol {
        let h = dt.min(t_end - s.time);
        s = euler2d_step(&s, h);
        observer(&s);
    }
    s
}

/// Spacing of the centred difference used for `π_t`.
pub const PRESSURE_DT: f64 = 1e-4;

/// `w_t` from the vorticity equation, `π_t` by a centred difference of the
/// pressure solve along the flow.
pub fn time_derivatives(state: &EulerState2D) -> EulerRates {
    let omega_t = vorticity_rhs(&state.vorticity());
    let dw_dt = velocity_from_vorticity(&omega_t);
    let fwd = euler2d_step(state, PRESSURE_DT);
    let back = euler2d_step(state, -PRESSURE_DT);
    let dpi_dt = (&fwd.pi - &back.pi).scale(0.5 / PRESSURE_DT);
    EulerRates { dw_dt, dpi_dt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SlabGrid {
        SlabGrid::with_resolution(32, 4).unwrap()
    }

    #[test]
    fn taylor_green_velocity_and_pressure() {
        let g = grid();
        let s = EulerState2D::taylor_green(g);
        let w1 = Field2D::from_fn(g, |x, y| -x.cos() * y.sin());
        let w2 = Field2D::from_fn(g, |x, y| x.sin() * y.cos());
        assert!((&s.w[0] - &w1).sobolev_norm(0) < 1e-13);
        assert!((&s.w[1] - &w2).sobolev_norm(0) < 1e-13);
        // classical pressure (cos 2x₁ + cos 2x₂)/4 up to sign convention
        let p = Field2D::from_fn(g, |x, y| -0.25 * ((2.0 * x).cos() + (2.0 * y).cos()));
        assert!((&s.pi - &p).sobolev_norm(0) < 1e-13);
        assert!(vorticity_rhs(&s.vorticity()).sobolev_norm(0) < 1e-13);
    }

    #[test]
    fn constant_vorticity_gives_rest() {
        let s = EulerState2D::from_vorticity(&Field2D::from_fn(grid(), |_, _| 3.0), 0.0);
        assert_eq!(s.energy(), 0.0);
        let next = euler2d_step(&s, 0.1);
        assert_eq!(next.energy(), 0.0);
    }

    #[test]
    fn divergence_check() {
        let g = grid();
        let bad = [Field2D::from_fn(g, |x, _| x.sin()), Field2D::zeros(g)];
        assert!(matches!(EulerState2D::from_velocity(bad, 0.0), Err(LimitError::NotDivergenceFree { .. })));
        let tg = EulerState2D::taylor_green(g);
        assert!(EulerState2D::from_velocity(tg.w.clone(), 0.0).is_ok());
    }

    #[test]
    fn pressure_balances_momentum() {
        // w_t + w·∇w + ∇π = 0 with w_t from the vorticity equation
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let omega = Field2D::random(grid(), 4.0, &mut rng);
        let s = EulerState2D::from_vorticity(&omega, 0.0);
        let rates = time_derivatives(&s);
        let g = *s.grid();
        let gw = [s.w[0].gradient(), s.w[1].gradient()];
        let gp = s.pi.gradient();
        for i in 0..2 {
            let adv = Field2D::sum_of_products(g, &[(&s.w[0], &gw[i][0]), (&s.w[1], &gw[i][1])]);
            let res = &(&rates.dw_dt[i] + &adv) + &gp[i];
            assert!(res.sobolev_norm(0) < 1e-10 * adv.sobolev_norm(0), "{}", res.sobolev_norm(0));
        }
        assert!(s.divergence().max_abs() < 1e-13);
    }
}
