//! Acoustic-rotation operator `B[σ, U] = [div U, e₃ × U + ∇σ]`.
//!
//! Per Fourier mode `(ξ, k)` the symbol is the anti-Hermitian matrix
//!
//! ```text
//! [ 0    iξ₁  iξ₂  ik ]
//! [ iξ₁  0    -1   0  ]
//! [ iξ₂  1    0    0  ]
//! [ ik   0    0    0  ]
//! ```
//!
//! with characteristic polynomial `λ⁴ + (1 + |ξ|² + k²)λ² + k² = 0`, so
//! `λ² = -μ±` and the spectrum is `±i√μ±`. On the slab, `k = mπ`; slab
//! coefficients store `U₃` as a sine amplitude, which turns the `ik`
//! entries into the real pair `(+k, -k)` (a diagonal similarity).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Subdomain;
use crate::exec;
use crate::linalg::{set_distance, sort_canonical, CMat, Eigen};
use crate::model::{ModelError, NskParams, NskState, Tendency};
use crate::spectral::{Parity, ScalarField, SlabGrid, VectorField, VELOCITY_PARITY};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvector condition number above which averages use quadrature.
pub const RAGE_COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcousticMode {
    pub xi: [f64; 2],
    pub k: f64,
}

impl AcousticMode {
    pub fn new(xi1: f64, xi2: f64, k: f64) -> Self {
        Self { xi: [xi1, xi2], k }
    }

    /// Mode of slot `(i1, i2, m)`, with `k = mπ`.
    pub fn from_grid(grid: &SlabGrid, i1: usize, i2: usize, m: usize) -> Self {
        Self::new(grid.xi(i1), grid.xi(i2), grid.k(m))
    }

    fn xi2(&self) -> f64 {
        self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]
    }
}

#[derive(Debug, Clone)]
pub struct AcousticSymbol {
    pub mode: AcousticMode,
    pub matrix: CMat,
}

impl AcousticSymbol {
    pub fn new(mode: AcousticMode) -> Self {
        let [x1, x2] = mode.xi;
        let k = mode.k;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let matrix = CMat::from_rows(&[
            vec![ZERO, c(0.0, x1), c(0.0, x2), c(0.0, k)],
            vec![c(0.0, x1), ZERO, c(-1.0, 0.0), ZERO],
            vec![c(0.0, x2), c(1.0, 0.0), ZERO, ZERO],
            vec![c(0.0, k), ZERO, ZERO, ZERO],
        ]);
        Self { mode, matrix }
    }

    /// Same operator acting on slab coefficients `(σ̂, Û₁, Û₂, Û₃)` with `Û₃`
    /// a sine amplitude.
    pub fn basis_matrix(&self) -> CMat {
        let mut m = self.matrix.clone();
        m[(0, 3)] = Complex64::new(self.mode.k, 0.0);
        m[(3, 0)] = Complex64::new(-self.mode.k, 0.0);
        m
    }
}

/// `μ± = (S ± √(S² - 4k²))/2` with `S = 1 + |ξ|² + k²`.
pub fn mu_pair(mode: &AcousticMode) -> [f64; 2] {
    let s = 1.0 + mode.xi2() + mode.k * mode.k;
    let plus = 0.5 * (s + (s * s - 4.0 * mode.k * mode.k).max(0.0).sqrt());
    // product of the roots is k², avoiding cancellation in the minus branch
    let minus = mode.k * mode.k / plus;
    [plus, minus]
}

/// `λ² = -μ±`: the squares of the eigenvalues.
pub fn squared_eigenvalues(mode: &AcousticMode) -> [f64; 2] {
    let [p, m] = mu_pair(mode);
    [-p, -m]
}

/// `±i√μ₊, ±i√μ₋`, sorted canonically.
pub fn eigenvalues_closed_form(mode: &AcousticMode) -> Vec<Complex64> {
    let [p, m] = mu_pair(mode);
    let mut v = vec![I * p.sqrt(), -I * p.sqrt(), I * m.sqrt(), -I * m.sqrt()];
    sort_canonical(&mut v);
    v
}

pub fn eigenvalues_numeric(symbol: &AcousticSymbol) -> Vec<Complex64> {
    let mut v = Eigen::new(&symbol.matrix).values;
    sort_canonical(&mut v);
    v
}

/// Spectrum restricted to slab-admissible coefficient vectors: at `k = 0`
/// the sine slot of `U₃` does not exist, leaving a 3×3 block.
pub fn eigenvalues_admissible(mode: &AcousticMode, m: usize) -> Vec<Complex64> {
    let full = AcousticSymbol::new(*mode).basis_matrix();
    let mut v = if m == 0 {
        let rows: Vec<Vec<Complex64>> = (0..3).map(|i| (0..3).map(|j| full[(i, j)]).collect()).collect();
        Eigen::new(&CMat::from_rows(&rows)).values
    } else {
        Eigen::new(&full).values
    };
    sort_canonical(&mut v);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub j: [i64; 2],
    pub m: usize,
    pub xi: [f64; 2],
    pub k: f64,
    pub closed: Vec<[f64; 2]>,
    pub numeric: Vec<[f64; 2]>,
    pub diff: f64,
    /// Per numeric eigenvalue: whether an admissible eigenvector exists.
    pub admissible: Vec<bool>,
    /// The roots `μ±` themselves.
    pub mu: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub max_mode: i64,
    pub l_h: f64,
    pub entries: Vec<SpectrumEntry>,
    pub max_diff: f64,
    /// Every `k = 0` mode carries an admissible zero eigenvalue.
    pub kernel_zero_at_every_horizontal_mode: bool,
    /// `k = 0` modes with admissible nonzero eigenvalues `±i√(1 + |ξ|²)`.
    pub nonzero_admissible_at_k0: usize,
    /// `k = 0` modes whose double zero has one inadmissible direction (`U₃`).
    pub inadmissible_zero_at_k0: usize,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Closed form against dense eigensolver for `|j₁|, |j₂| ≤ M`, `0 ≤ m ≤ M`.
pub fn spectrum_report(max_mode: i64, l_h: f64) -> SpectrumReport {
    let mut keys = Vec::new();
    for j1 in -max_mode..=max_mode {
        for j2 in -max_mode..=max_mode {
            for m in 0..=max_mode as usize {
                keys.push((j1, j2, m));
            }
        }
    }
    let entries = exec::map_range(keys.len(), |n| {
        let (j1, j2, m) = keys[n];
        let mode = AcousticMode::new(j1 as f64 / l_h, j2 as f64 / l_h, m as f64 * std::f64::consts::PI);
        let closed = eigenvalues_closed_form(&mode);
        let numeric = eigenvalues_numeric(&AcousticSymbol::new(mode));
        let diff = set_distance(&closed, &numeric);
        let adm = eigenvalues_admissible(&mode, m);
        let mut used = vec![false; adm.len()];
        let admissible = numeric
            .iter()
            .map(|z| {
                let hit = adm.iter().enumerate().find(|(i, a)| !used[*i] && (*a - z).norm() < 1e-9);
                if let Some((i, _)) = hit {
                    used[i] = true;
                    true
                } else {
                    false
                }
            })
            .collect();
        SpectrumEntry {
            j: [j1, j2],
            m,
            xi: mode.xi,
            k: mode.k,
            closed: pairs(&closed),
            numeric: pairs(&numeric),
            diff,
            admissible,
            mu: mu_pair(&mode),
        }
    });
    let max_diff = entries.iter().fold(0.0f64, |a, e| a.max(e.diff));
    let k0: Vec<&SpectrumEntry> = entries.iter().filter(|e| e.m == 0).collect();
    let is_zero = |p: &[f64; 2]| p[0].hypot(p[1]) < 1e-12;
    let kernel_zero_at_every_horizontal_mode =
        k0.iter().all(|e| e.numeric.iter().zip(&e.admissible).any(|(z, a)| *a && is_zero(z)));
    let nonzero_admissible_at_k0 =
        k0.iter().filter(|e| e.numeric.iter().zip(&e.admissible).any(|(z, a)| *a && !is_zero(z))).count();
    let inadmissible_zero_at_k0 =
        k0.iter().filter(|e| e.numeric.iter().zip(&e.admissible).any(|(z, a)| !*a && is_zero(z))).count();
    SpectrumReport {
        max_mode,
        l_h,
        entries,
        max_diff,
        kernel_zero_at_every_horizontal_mode,
        nonzero_admissible_at_k0,
        inadmissible_zero_at_k0,
    }
}

/// A pair `(σ, U)` with `σ` cosine and `U` velocity parities.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticField {
    pub sigma: ScalarField,
    pub u: VectorField,
}

impl AcousticField {
    pub fn zeros(grid: SlabGrid) -> Self {
        Self { sigma: ScalarField::zeros(grid, Parity::Even), u: VectorField::velocity_zeros(grid) }
    }

    /// `σ = q + θ`, `U = ρu` (product dealiased).
    pub fn from_state(state: &NskState, epsilon: f64) -> Self {
        let sigma = &state.q + &state.theta;
        Self { sigma, u: momentum(state, epsilon) }
    }

    pub fn random<R: rand::Rng + ?Sized>(grid: SlabGrid, decay: f64, rng: &mut R) -> Self {
        let mut f = |p| ScalarField::random(grid, p, decay, rng).dealiased();
        let sigma = f(Parity::Even);
        let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
        Self { sigma, u }
    }

    pub fn grid(&self) -> &SlabGrid {
        self.sigma.grid()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.sigma.inner(&other.sigma) + self.u.inner(&other.u)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { sigma: &self.sigma - &other.sigma, u: &self.u - &other.u }
    }

    /// `∫_K |σ|² + |U|²` by midpoint quadrature over the grid points in `K`.
    pub fn norm_in(&self, k: &Subdomain) -> f64 {
        let g = self.grid();
        let mut acc = 0.0;
        for f in [&self.sigma, &self.u.c[0], &self.u.c[1], &self.u.c[2]] {
            acc += k.integrate_sq(g, &f.to_physical());
        }
        acc.sqrt()
    }

    fn coeffs_at(&self, idx: usize) -> [Complex64; 4] {
        [self.sigma.coeffs()[idx], self.u.c[0].coeffs()[idx], self.u.c[1].coeffs()[idx], self.u.c[2].coeffs()[idx]]
    }

    fn from_mode_fn(grid: SlabGrid, f: impl Fn(usize) -> [Complex64; 4] + Sync + Send) -> Self {
        let vals = exec::map_range(grid.spectral_len(), f);
        let mut out = Self::zeros(grid);
        for (idx, v) in vals.iter().enumerate() {
            out.sigma.coeffs_mut()[idx] = v[0];
            for c in 0..3 {
                out.u.c[c].coeffs_mut()[idx] = v[c + 1];
            }
        }
        out
    }
}

fn momentum(state: &NskState, epsilon: f64) -> VectorField {
    let g = *state.grid();
    let q = state.q.to_physical();
    let u = state.u.to_physical();
    let rho_u = [0, 1, 2].map(|i| u[i].iter().zip(&q).map(|(v, q)| (1.0 + epsilon * q) * v).collect::<Vec<f64>>());
    let mut out = VectorField::from_physical(g, VELOCITY_PARITY, &rho_u).expect("grid lengths match");
    out.dealias();
    out
}

/// Orthogonal projection onto `ker B`: vertically constant, geostrophically
/// balanced pairs `U_h = ∇^⊥σ`, `U₃ = 0`.
pub fn kernel_projection(x: &AcousticField) -> AcousticField {
    let g = *x.grid();
    let plane = g.plane_len();
    let n = g.n_h;
    AcousticField::from_mode_fn(g, |idx| {
        if idx >= plane {
            return [ZERO; 4];
        }
        let (i1, i2) = (idx / n, idx % n);
        let (x1, x2) = (g.xi(i1), g.xi(i2));
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -x2), Complex64::new(0.0, x1)];
        let c = x.coeffs_at(idx);
        let dot: Complex64 = (0..3).map(|i| v[i].conj() * c[i]).sum();
        let a = dot / (1.0 + x1 * x1 + x2 * x2);
        [v[0] * a, v[1] * a, v[2] * a, ZERO]
    })
}

/// Zeroes every mode with `|ξ| + k > cutoff`.
pub fn cutoff_projection(x: &AcousticField, cutoff: f64) -> AcousticField {
    let g = *x.grid();
    let n = g.n_h;
    let plane = g.plane_len();
    AcousticField::from_mode_fn(g, |idx| {
        let m = idx / plane;
        let r = idx % plane;
        let (x1, x2) = (g.xi(r / n), g.xi(r % n));
        if (x1 * x1 + x2 * x2).sqrt() + g.k(m) > cutoff + 1e-12 {
            [ZERO; 4]
        } else {
            x.coeffs_at(idx)
        }
    })
}

/// `(e^z - 1)/z`, equal to 1 at `z = 0`.
fn phi(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        Complex64::new(1.0, 0.0) + z * 0.5 + z * z / 6.0
    } else {
        (z.exp() - 1.0) / z
    }
}

#[derive(Debug, Clone)]
pub struct RageAverage {
    pub average: AcousticField,
    /// `Q^⊥` part of the average.
    pub oscillating: AcousticField,
    /// `H⁰` norm of the oscillating part.
    pub norm: f64,
    pub quadrature_modes: usize,
}

/// `(1/τ)∫₀^τ exp(-tB/ε) x dt` per mode, followed by `Q^⊥`.
pub fn rage_average(x: &AcousticField, tau: f64, eps: f64) -> RageAverage {
    let g = *x.grid();
    let plane = g.plane_len();
    let n = g.n_h;
    let modes = exec::map_range(g.spectral_len(), |idx| {
        let c = x.coeffs_at(idx);
        if c.iter().all(|z| *z == ZERO) {
            return ([ZERO; 4], false);
        }
        let m = idx / plane;
        let r = idx % plane;
        let mode = AcousticMode::from_grid(&g, r / n, r % n, m);
        let b = AcousticSymbol::new(mode).basis_matrix();
        let e = Eigen::new(&b);
        if e.cond.is_finite() && e.cond <= RAGE_COND_LIMIT {
            let mut y = e.inverse.matvec(&c);
            for (yi, l) in y.iter_mut().zip(&e.values) {
                *yi *= phi(-l * tau / eps);
            }
            let out = e.vectors.matvec(&y);
            ([out[0], out[1], out[2], out[3]], false)
        } else {
            (quadrature_average(&b, &c, tau, eps), true)
        }
    });
    let quadrature_modes = modes.iter().filter(|m| m.1).count();
    let average = AcousticField::from_mode_fn(g, |idx| modes[idx].0);
    let oscillating = average.sub(&kernel_projection(&average));
    let norm = oscillating.norm();
    RageAverage { average, oscillating, norm, quadrature_modes }
}

/// Composite Simpson rule refined until successive estimates agree to 1e-10.
fn quadrature_average(b: &CMat, x: &[Complex64; 4], tau: f64, eps: f64) -> [Complex64; 4] {
    let mut intervals = 64usize;
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let h = tau / intervals as f64;
        let step = b.scale(Complex64::new(-h / eps, 0.0)).exp_pade();
        let mut cur = x.to_vec();
        let mut acc = [ZERO; 4];
        for j in 0..=intervals {
            let w = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            for (a, v) in acc.iter_mut().zip(&cur) {
                *a += v * w;
            }
            cur = step.matvec(&cur);
        }
        let est: Vec<Complex64> = acc.iter().map(|a| a * (h / 3.0 / tau)).collect();
        if let Some(p) = &prev {
            let diff = p.iter().zip(&est).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if diff < 1e-10 * scale.max(1e-300) || intervals >= 1 << 18 {
                return [est[0], est[1], est[2], est[3]];
            }
        }
        prev = Some(est);
        intervals *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RagePoint {
    pub tau: f64,
    pub norm: f64,
    /// Norm restricted to the subdomain, when one is given.
    pub local_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RageCurve {
    pub eps: f64,
    pub cutoff: f64,
    pub initial_norm: f64,
    pub points: Vec<RagePoint>,
    pub quadrature_modes: usize,
    /// Log-log slope of the norm against `τ`.
    pub slope: Option<f64>,
    pub nonincreasing: bool,
}

/// Averages of `P_M x` over each `τ` in turn.
pub fn rage_decay(x: &AcousticField, cutoff: f64, taus: &[f64], eps: f64, region: Option<&Subdomain>) -> RageCurve {
    let data = cutoff_projection(x, cutoff);
    let mut quadrature_modes = 0;
    let points: Vec<RagePoint> = taus
        .iter()
        .map(|&tau| {
            let avg = rage_average(&data, tau, eps);
            quadrature_modes = quadrature_modes.max(avg.quadrature_modes);
            RagePoint { tau, norm: avg.norm, local_norm: region.map(|k| avg.oscillating.norm_in(k)) }
        })
        .collect();
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.tau, p.norm)).collect();
    let slope = crate::diagnostics::fit_rate(&pts).ok().map(|f| f.slope);
    let nonincreasing = points.windows(2).all(|w| w[1].norm <= w[0].norm);
    RageCurve { eps, cutoff, initial_norm: data.norm(), points, quadrature_modes, slope, nonincreasing }
}

/// Source terms of the acoustic form of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticSourceTerms {
    pub f: ScalarField,
    pub l: VectorField,
}

/// Evaluates `f` and `l` from a state and its time derivative.
///
/// ```text
/// f = λΔθ + u·∇q + q_t - εqθ_t - ρu·∇θ - θ div u - εqθ div u
///     + ε(ν(div u)² + 2μ D(u):∇u)
///     + κ(ρΔq + (ε/2)|∇q|²) div u - κε(∇q⊗∇q):∇u
/// l = -div(ρu⊗u) - ∇(qθ) + ε(μ+ν)∇div u + εμΔu + κε^{2α-2} ρ∇Δρ
/// ```
pub fn acoustic_sources(state: &NskState, params: &NskParams, rates: &Tendency) -> Result<AcousticSourceTerms, ModelError> {
    let g = *state.grid();
    let e = params.epsilon;
    let u = &state.u;
    let q = state.q.to_physical();
    let th = state.theta.to_physical();
    let up = u.to_physical();
    let gq = VectorField::gradient(&state.q).to_physical();
    let gt = VectorField::gradient(&state.theta).to_physical();
    let gu = [0, 1, 2].map(|i| VectorField::gradient(&u.c[i]).to_physical());
    let lap_q = state.q.laplacian().to_physical();
    let lap_th = state.theta.laplacian().to_physical();
    let q_t = rates.q.to_physical();
    let th_t = rates.theta.to_physical();
    let n = g.physical_len();

    let mut f = vec![0.0; n];
    let mut flux = [[vec![0.0; n], vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n], vec![0.0; n]], [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ]];
    let mut qth = vec![0.0; n];
    let mut rho = vec![0.0; n];
    for p in 0..n {
        let r = 1.0 + e * q[p];
        rho[p] = r;
        let uu = [up[0][p], up[1][p], up[2][p]];
        let d = |i: usize, j: usize| gu[i][j][p];
        let div = d(0, 0) + d(1, 1) + d(2, 2);
        let u_gq: f64 = (0..3).map(|j| uu[j] * gq[j][p]).sum();
        let u_gt: f64 = (0..3).map(|j| uu[j] * gt[j][p]).sum();
        let mut sym = 0.0;
        let mut qq = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                sym += 0.5 * (d(i, j) + d(j, i)) * d(i, j);
                qq += gq[i][p] * gq[j][p] * d(i, j);
            }
        }
        let gq2: f64 = (0..3).map(|i| gq[i][p].powi(2)).sum();
        f[p] = params.lambda * lap_th[p] + u_gq + q_t[p] - e * q[p] * th_t[p] - r * u_gt - th[p] * div
            - e * q[p] * th[p] * div
            + e * (params.nu * div * div + 2.0 * params.mu * sym)
            + params.kappa * (r * lap_q[p] + 0.5 * e * gq2) * div
            - params.kappa * e * qq;
        for i in 0..3 {
            for j in 0..3 {
                flux[i][j][p] = r * uu[i] * uu[j];
            }
        }
        qth[p] = q[p] * th[p];
    }
    let f = ScalarField::from_physical(g, Parity::Even, &f)?.dealiased();

    // -div(ρu⊗u)_i = -Σ_j ∂_j(ρ u_i u_j); the parity of u_i u_j is the product
    // of the factor parities
    let par = VELOCITY_PARITY;
    let prod = |a: Parity, b: Parity| if a == b { Parity::Even } else { Parity::Odd };
    let mut l = VectorField::velocity_zeros(g);
    for i in 0..3 {
        for j in 0..3 {
            let t = ScalarField::from_physical(g, prod(par[i], par[j]), &flux[i][j])?.dealiased();
            l.c[i].axpy(-1.0, &t.derivative(j + 1));
        }
    }
    let qth = ScalarField::from_physical(g, Parity::Even, &qth)?.dealiased();
    l.axpy(-1.0, &VectorField::gradient(&qth));
    l.axpy(e * (params.mu + params.nu), &VectorField::gradient(&u.divergence()));
    l.axpy(e * params.mu, &u.laplacian());
    // ρ∇Δρ = ερ∇Δq
    let gl = VectorField::gradient(&state.q.laplacian()).to_physical();
    let cap = params.kappa * e.powi(2 * params.alpha.value() - 2) * e;
    let kort = gl.map(|c| c.iter().zip(&rho).map(|(v, r)| cap * r * v).collect::<Vec<f64>>());
    let mut kort = VectorField::from_physical(g, par, &kort)?;
    kort.dealias();
    l.axpy(1.0, &kort);
    Ok(AcousticSourceTerms { f, l })
}

/// Defects `εσ_t + div U - εf` and `εU_t + e₃ × U + ∇σ - εl` given time
/// derivatives of `(σ, U)` from outside (e.g. finite differences).
pub fn acoustic_residuals(
    state: &NskState,
    epsilon: f64,
    sigma_t: &ScalarField,
    momentum_t: &VectorField,
    sources: &AcousticSourceTerms,
) -> (ScalarField, VectorField) {
    let x = AcousticField::from_state(state, epsilon);
    let mut r1 = sigma_t.scale(epsilon);
    r1.axpy(1.0, &x.u.divergence());
    r1.axpy(-epsilon, &sources.f);
    let mut r2 = momentum_t.scale(epsilon);
    // e₃ × U = (-U₂, U₁, 0)
    r2.c[0].axpy(-1.0, &x.u.c[1]);
    r2.c[1].axpy(1.0, &x.u.c[0]);
    r2.axpy(1.0, &VectorField::gradient(&x.sigma));
    r2.axpy(-epsilon, &sources.l);
    (r1, r2)
}

/// `(σ, U)` of a state, for finite differencing.
pub fn acoustic_variables(state: &NskState, epsilon: f64) -> AcousticField {
    AcousticField::from_state(state, epsilon)
}
