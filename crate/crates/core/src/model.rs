//! Scaled rotating Navier-Stokes-Korteweg system in the perturbation variables
//! `ρ = 1 + εq`, `Θ = 1 + εθ`.
//!
//! Momentum and temperature equations are divided by `ρ` pointwise. In that
//! form the Coriolis term is exactly `-(1/ε) e₃ × u` and the capillary force
//! is exactly `κ ε^{2α-1} ∇Δq`, so both sit entirely in the constant
//! coefficient stiff symbol; the explicit remainder collects advection, the
//! `1/ρ` corrections and the heating sources.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CMat;
use crate::spectral::{Parity, ScalarField, SlabGrid, SpectralError, VectorField, VELOCITY_PARITY};

/// Positivity threshold on `ρ`: states with `min ρ ≤ RHO_FLOOR` are rejected.
pub const RHO_FLOOR: f64 = 0.1;

/// Number of unknowns per mode: `(q, u₁, u₂, u₃, θ)`.
pub const NVAR: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alpha {
    One,
    Zero,
}

impl Alpha {
    pub fn value(self) -> i32 {
        match self {
            Alpha::One => 1,
            Alpha::Zero => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("density floor violated: min rho = {min_rho} at x = {location:?}")]
    Positivity { min_rho: f64, location: [f64; 3] },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NskParams {
    pub epsilon: f64,
    pub alpha: Alpha,
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub gas_constant: f64,
    pub heat_capacity: f64,
    /// `1 + R/c_v`, kept in sync by the constructors.
    pub gamma: f64,
    /// Multiplier on the Coriolis term. `1` is the physical system; other
    /// values exist for diagnostic runs only.
    #[serde(default = "one")]
    pub rotation: f64,
}

fn one() -> f64 {
    1.0
}

impl NskParams {
    /// Unit transport coefficients, `R = c_v = 1`.
    pub fn new(epsilon: f64, alpha: Alpha) -> Result<Self, ModelError> {
        let p = Self {
            epsilon,
            alpha,
            mu: 1.0,
            nu: 0.0,
            lambda: 1.0,
            kappa: 1.0,
            gas_constant: 1.0,
            heat_capacity: 1.0,
            gamma: 2.0,
            rotation: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_transport(mut self, mu: f64, nu: f64, lambda: f64, kappa: f64) -> Result<Self, ModelError> {
        self.mu = mu;
        self.nu = nu;
        self.lambda = lambda;
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gas(mut self, gas_constant: f64, heat_capacity: f64) -> Result<Self, ModelError> {
        self.gas_constant = gas_constant;
        self.heat_capacity = heat_capacity;
        self.gamma = 1.0 + gas_constant / heat_capacity;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, ModelError> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidParams(m.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad("epsilon must lie in (0, 1]");
        }
        if !(self.mu > 0.0) {
            return bad("mu must be positive");
        }
        if !(2.0 * self.mu + 3.0 * self.nu > 0.0) {
            return bad("2 mu + 3 nu must be positive");
        }
        if !(self.lambda > 0.0) {
            return bad("lambda must be positive");
        }
        if !(self.kappa > 0.0) {
            return bad("kappa must be positive");
        }
        if !(self.gas_constant > 0.0 && self.heat_capacity > 0.0) {
            return bad("R and c_v must be positive");
        }
        if (self.gamma - (1.0 + self.gas_constant / self.heat_capacity)).abs() > 1e-12 {
            return bad("gamma must equal 1 + R/c_v");
        }
        if !self.rotation.is_finite() {
            return bad("rotation multiplier must be finite");
        }
        Ok(())
    }

    /// `κ ε^{2α-1}`, the coefficient of `∇Δq` in the velocity equation.
    pub fn capillary(&self) -> f64 {
        self.kappa * self.epsilon.powi(2 * self.alpha.value() - 1)
    }
}

/// `(q, u, θ)` at a time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct NskState {
    pub q: ScalarField,
    pub u: VectorField,
    pub theta: ScalarField,
    pub time: f64,
}

/// Time derivative of the state variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub q: ScalarField,
    pub u: VectorField,
    pub theta: ScalarField,
}

impl NskState {
    pub fn rest(grid: SlabGrid) -> Self {
        Self {
            q: ScalarField::zeros(grid, Parity::Even),
            u: VectorField::velocity_zeros(grid),
            theta: ScalarField::zeros(grid, Parity::Even),
            time: 0.0,
        }
    }

    pub fn new(q: ScalarField, u: VectorField, theta: ScalarField, time: f64) -> Result<Self, ModelError> {
        let g = *q.grid();
        g.check_same(u.grid())?;
        g.check_same(theta.grid())?;
        for (f, want) in [(&q, Parity::Even), (&theta, Parity::Even)] {
            if f.parity() != want {
                return Err(SpectralError::ParityMismatch { expected: want, found: f.parity() }.into());
            }
        }
        for (c, w) in u.c.iter().zip(VELOCITY_PARITY) {
            if c.parity() != w {
                return Err(SpectralError::ParityMismatch { expected: w, found: c.parity() }.into());
            }
        }
        Ok(Self { q, u, theta, time })
    }

    pub fn grid(&self) -> &SlabGrid {
        self.q.grid()
    }

    pub fn dealias(&mut self) {
        self.q.dealias();
        self.u.dealias();
        self.theta.dealias();
    }

    /// Minimum of `ρ = 1 + εq` over grid points with its location.
    pub fn min_density(&self, epsilon: f64) -> (f64, [f64; 3]) {
        let g = self.grid();
        let vals = self.q.to_physical();
        let (idx, qmin) = vals
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        let n = g.n_h;
        let (j3, rest) = (idx / (n * n), idx % (n * n));
        (1.0 + epsilon * qmin, [g.x_h(rest / n), g.x_h(rest % n), g.x_v(j3)])
    }

    pub fn check_positivity(&self, epsilon: f64) -> Result<(), ModelError> {
        let (min_rho, location) = self.min_density(epsilon);
        if min_rho <= RHO_FLOOR || !min_rho.is_finite() {
            return Err(ModelError::Positivity { min_rho, location });
        }
        Ok(())
    }

    /// Mode-major packing: entry `idx * NVAR + c` holds component `c` of
    /// spectral slot `idx`.
    pub fn pack(&self) -> Vec<Complex64> {
        pack_fields([&self.q, &self.u.c[0], &self.u.c[1], &self.u.c[2], &self.theta])
    }

    pub fn unpack(grid: SlabGrid, data: &[Complex64], time: f64) -> Self {
        let [q, u1, u2, u3, theta] = unpack_fields(grid, data);
        Self { q, u: VectorField::new(u1, u2, u3), theta, time }
    }

    /// `self + h * d`, keeping the time stamp.
    pub fn add_scaled(&self, h: f64, d: &Tendency) -> Self {
        let mut out = self.clone();
        out.q.axpy(h, &d.q);
        out.u.axpy(h, &d.u);
        out.theta.axpy(h, &d.theta);
        out
    }
}

impl Tendency {
    pub fn zeros(grid: SlabGrid) -> Self {
        let r = NskState::rest(grid);
        Self { q: r.q, u: r.u, theta: r.theta }
    }

    pub fn pack(&self) -> Vec<Complex64> {
        pack_fields([&self.q, &self.u.c[0], &self.u.c[1], &self.u.c[2], &self.theta])
    }

    pub fn unpack(grid: SlabGrid, data: &[Complex64]) -> Self {
        let [q, u1, u2, u3, theta] = unpack_fields(grid, data);
        Self { q, u: VectorField::new(u1, u2, u3), theta }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { q: &self.q + &other.q, u: &self.u + &other.u, theta: &self.theta + &other.theta }
    }

    pub fn sobolev_norm(&self, s: u32) -> f64 {
        let a = self.q.sobolev_norm(s).unwrap_or(f64::NAN);
        let b = self.u.sobolev_norm(s).unwrap_or(f64::NAN);
        let c = self.theta.sobolev_norm(s).unwrap_or(f64::NAN);
        (a * a + b * b + c * c).sqrt()
    }
}

const PARITIES: [Parity; NVAR] = [Parity::Even, Parity::Even, Parity::Even, Parity::Odd, Parity::Even];

fn pack_fields(fields: [&ScalarField; NVAR]) -> Vec<Complex64> {
    let len = fields[0].coeffs().len();
    let mut out = vec![Complex64::new(0.0, 0.0); len * NVAR];
    for (c, f) in fields.iter().enumerate() {
        for (i, v) in f.coeffs().iter().enumerate() {
            out[i * NVAR + c] = *v;
        }
    }
    out
}

fn unpack_fields(grid: SlabGrid, data: &[Complex64]) -> [ScalarField; NVAR] {
    assert_eq!(data.len(), grid.spectral_len() * NVAR, "packed length does not match grid");
    let mut out = PARITIES.map(|p| ScalarField::zeros(grid, p));
    for (c, f) in out.iter_mut().enumerate() {
        for (i, v) in f.coeffs_mut().iter_mut().enumerate() {
            *v = data[i * NVAR + c];
        }
    }
    out
}

/// Per-mode linear operator on `(q̂, û₁, û₂, û₃, θ̂)`.
///
/// `û₃` is the sine coefficient paired with the cosine coefficients of the
/// other unknowns, so `∂₃` contributes the real entries `±k`.
#[derive(Debug, Clone)]
pub struct StiffSymbol {
    pub xi: [f64; 2],
    pub k: f64,
    skew: CMat,
    dissipative: CMat,
}

impl StiffSymbol {
    pub fn assemble(xi: [f64; 2], k: f64, params: &NskParams) -> Self {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let e = params.epsilon;
        let inv = 1.0 / e;
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + k * k;
        let cap = params.capillary();
        let rot = params.rotation * inv;
        // divergence row acting on (u₁, u₂, u₃)
        let div = [c(0.0, xi[0]), c(0.0, xi[1]), c(k, 0.0)];
        // gradient column for a cosine scalar
        let grad = [c(0.0, xi[0]), c(0.0, xi[1]), c(-k, 0.0)];

        let mut skew = CMat::zeros(NVAR);
        for j in 0..3 {
            skew[(0, j + 1)] = -div[j] * inv;
            skew[(4, j + 1)] = -div[j] * inv;
            skew[(j + 1, 0)] = -grad[j] * (inv + cap * k2);
            skew[(j + 1, 4)] = -grad[j] * inv;
        }
        skew[(1, 2)] = c(rot, 0.0);
        skew[(2, 1)] = c(-rot, 0.0);

        let mut dissipative = CMat::zeros(NVAR);
        for i in 0..3 {
            dissipative[(i + 1, i + 1)] = c(-e * params.mu * k2, 0.0);
            for j in 0..3 {
                dissipative[(i + 1, j + 1)] += grad[i] * div[j] * (e * (params.mu + params.nu));
            }
        }
        dissipative[(4, 4)] = c(-params.lambda * k2, 0.0);
        Self { xi, k, skew, dissipative }
    }

    /// Acoustic, rotation and capillary couplings.
    pub fn skew(&self) -> &CMat {
        &self.skew
    }

    /// Viscous and heat-conduction part.
    pub fn dissipative(&self) -> &CMat {
        &self.dissipative
    }

    pub fn matrix(&self) -> CMat {
        self.skew.add(&self.dissipative)
    }
}

/// `exp(dt L)` for a single symbol, eigendecomposition with Padé fallback.
pub fn exp_stiff(symbol: &StiffSymbol, dt: f64) -> CMat {
    crate::integrator::ModeExp::new(&symbol.matrix()).exp(dt)
}

/// Constant-coefficient linear part, evaluated with spectral derivatives.
pub fn linear_rhs(state: &NskState, params: &NskParams) -> Tendency {
    let inv = 1.0 / params.epsilon;
    let u = &state.u;
    let div = u.divergence();
    let sigma = &state.q + &state.theta;
    let grad_sigma = VectorField::gradient(&sigma);
    let grad_div = VectorField::gradient(&div);
    let lap_u = u.laplacian();
    let cap_force = VectorField::gradient(&state.q.laplacian());

    let dq = div.scale(-inv);
    let mut du = grad_sigma.scale(-inv);
    // -(1/ε) e₃ × u = (1/ε)(u₂, -u₁, 0)
    du.c[0].axpy(params.rotation * inv, &u.c[1]);
    du.c[1].axpy(-params.rotation * inv, &u.c[0]);
    du.axpy(params.epsilon * params.mu, &lap_u);
    du.axpy(params.epsilon * (params.mu + params.nu), &grad_div);
    du.axpy(params.capillary(), &cap_force);
    let mut dtheta = div.scale(-inv);
    dtheta.axpy(params.lambda, &state.theta.laplacian());
    Tendency { q: dq, u: du, theta: dtheta }
}

/// Physical-space values needed by the explicit remainder.
struct Gridded {
    q: Vec<f64>,
    theta: Vec<f64>,
    u: [Vec<f64>; 3],
    grad_q: [Vec<f64>; 3],
    grad_theta: [Vec<f64>; 3],
    grad_sigma: [Vec<f64>; 3],
    // grad_u[i][j] = ∂_j u_i
    grad_u: [[Vec<f64>; 3]; 3],
    lap_q: Vec<f64>,
    lap_theta: Vec<f64>,
    lap_u: [Vec<f64>; 3],
    grad_div: [Vec<f64>; 3],
}

impl Gridded {
    fn new(state: &NskState) -> Self {
        let u = &state.u;
        let gq = VectorField::gradient(&state.q);
        let gt = VectorField::gradient(&state.theta);
        let gs = &gq + &gt;
        let grad_u = [0, 1, 2].map(|i| VectorField::gradient(&u.c[i]).to_physical());
        Self {
            q: state.q.to_physical(),
            theta: state.theta.to_physical(),
            u: u.to_physical(),
            grad_q: gq.to_physical(),
            grad_theta: gt.to_physical(),
            grad_sigma: gs.to_physical(),
            grad_u,
            lap_q: state.q.laplacian().to_physical(),
            lap_theta: state.theta.laplacian().to_physical(),
            lap_u: u.laplacian().to_physical(),
            grad_div: VectorField::gradient(&u.divergence()).to_physical(),
        }
    }
}

/// Explicit remainder `N(x) = rhs(x) - L x`, dealiased.
pub fn nonlinear_rhs(state: &NskState, params: &NskParams) -> Result<Tendency, ModelError> {
    state.check_positivity(params.epsilon)?;
    let grid = *state.grid();
    let e = params.epsilon;
    let g = Gridded::new(state);
    let n = grid.physical_len();
    let mut flux = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut nu_out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut ntheta = vec![0.0; n];

    for p in 0..n {
        let q = g.q[p];
        let th = g.theta[p];
        let u = [g.u[0][p], g.u[1][p], g.u[2][p]];
        let rho = 1.0 + e * q;
        let inv_rho = 1.0 / rho;
        let gu = |i: usize, j: usize| g.grad_u[i][j][p];
        let div = gu(0, 0) + gu(1, 1) + gu(2, 2);

        for i in 0..3 {
            flux[i][p] = q * u[i];
            let adv = (0..3).map(|j| u[j] * gu(i, j)).sum::<f64>();
            let grad_qth = q * g.grad_theta[i][p] + th * g.grad_q[i][p];
            let visc = e * params.mu * g.lap_u[i][p] + e * (params.mu + params.nu) * g.grad_div[i][p];
            nu_out[i][p] = -adv + q * inv_rho * g.grad_sigma[i][p] - inv_rho * grad_qth - e * q * inv_rho * visc;
        }

        let adv_th = (0..3).map(|j| u[j] * g.grad_theta[j][p]).sum::<f64>();
        let mut sym = 0.0;
        let mut qq = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                sym += 0.5 * (gu(i, j) + gu(j, i)) * gu(i, j);
                qq += g.grad_q[i][p] * g.grad_q[j][p] * gu(i, j);
            }
        }
        let heating = params.nu * div * div + 2.0 * params.mu * sym;
        let grad_q2 = (0..3).map(|i| g.grad_q[i][p].powi(2)).sum::<f64>();
        let korteweg = params.kappa * (rho * g.lap_q[p] + 0.5 * e * grad_q2) * div - params.kappa * e * qq;
        ntheta[p] = -adv_th - th * div - e * q * inv_rho * params.lambda * g.lap_theta[p]
            + (e * heating + korteweg) * inv_rho;
    }

    let parities = VELOCITY_PARITY;
    let mut flux = VectorField::from_physical(grid, parities, &flux)?;
    flux.dealias();
    let dq = flux.divergence().scale(-1.0);
    let mut du = VectorField::from_physical(grid, parities, &nu_out)?;
    du.dealias();
    let dtheta = ScalarField::from_physical(grid, Parity::Even, &ntheta)?.dealiased();
    Ok(Tendency { q: dq, u: du, theta: dtheta })
}

/// Full time derivative of the scaled system.
pub fn nsk_rhs(state: &NskState, params: &NskParams) -> Result<Tendency, ModelError> {
    let lin = linear_rhs(state, params);
    Ok(lin.add(&nonlinear_rhs(state, params)?))
}
