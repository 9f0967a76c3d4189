use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::{Parity, SlabGrid};
use super::transform;
use super::{SpectralError, MAX_SOBOLEV_ORDER};
use crate::exec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Scalar field on the slab stored as spectral coefficients.
///
/// Arithmetic operators panic when the operands disagree on grid or parity;
/// fallible variants of the same checks live on the transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: SlabGrid,
    parity: Parity,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: SlabGrid, parity: Parity) -> Self {
        Self { grid, parity, coeffs: vec![ZERO; grid.spectral_len()] }
    }

    /// Wraps raw coefficients laid out as `[m][i1][i2]` with `n_v + 1` slots.
    pub fn from_coeffs(grid: SlabGrid, parity: Parity, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.spectral_len() {
            return Err(SpectralError::Length { expected: grid.spectral_len(), found: coeffs.len() });
        }
        Ok(Self { grid, parity, coeffs })
    }

    /// Constant field (zero mode only). Only meaningful for even parity.
    pub fn constant(grid: SlabGrid, value: f64) -> Self {
        let mut f = Self::zeros(grid, Parity::Even);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn grid(&self) -> &SlabGrid {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of signed horizontal mode `(j1, j2)` and vertical index `m`.
    pub fn coeff(&self, j1: i64, j2: i64, m: usize) -> Complex64 {
        let g = &self.grid;
        self.coeffs[g.spectral_index(m, g.slot(j1), g.slot(j2))]
    }

    /// Sets a coefficient together with its conjugate partner so the field
    /// stays real.
    pub fn set_mode(&mut self, j1: i64, j2: i64, m: usize, value: Complex64) {
        let g = self.grid;
        let a = g.spectral_index(m, g.slot(j1), g.slot(j2));
        let b = g.spectral_index(m, g.slot(-j1), g.slot(-j2));
        if a == b {
            self.coeffs[a] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[a] = value;
            self.coeffs[b] = value.conj();
        }
    }

    /// Samples `f(x₁, x₂, x₃)` on the grid and projects onto the basis.
    pub fn from_fn(grid: SlabGrid, parity: Parity, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut vals = vec![0.0; grid.physical_len()];
        for j3 in 0..grid.n_v {
            let z = grid.x_v(j3);
            for p1 in 0..grid.n_h {
                let x = grid.x_h(p1);
                for p2 in 0..grid.n_h {
                    vals[grid.physical_index(j3, p1, p2)] = f(x, grid.x_h(p2), z);
                }
            }
        }
        Self::from_physical(grid, parity, &vals).expect("length matches grid")
    }

    pub fn from_physical(grid: SlabGrid, parity: Parity, values: &[f64]) -> Result<Self, SpectralError> {
        if values.len() != grid.physical_len() {
            return Err(SpectralError::Length { expected: grid.physical_len(), found: values.len() });
        }
        let coeffs = transform::for_grid(&grid).analyze(values, parity);
        Ok(Self { grid, parity, coeffs })
    }

    /// Grid values, laid out `[j3][p1][p2]`.
    pub fn to_physical(&self) -> Vec<f64> {
        transform::for_grid(&self.grid).synthesize(&self.coeffs, self.parity)
    }

    /// Grid values in an explicitly requested vertical basis.
    pub fn to_physical_in(&self, basis: Parity) -> Result<Vec<f64>, SpectralError> {
        if basis != self.parity {
            return Err(SpectralError::ParityMismatch { expected: basis, found: self.parity });
        }
        Ok(self.to_physical())
    }

    /// Direct summation of the basis series at an arbitrary point.
    pub fn evaluate(&self, x1: f64, x2: f64, x3: f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for m in 0..g.slots() {
            let vert = match self.parity {
                Parity::Even => (g.k(m) * x3).cos(),
                Parity::Odd => (g.k(m) * x3).sin(),
            };
            if vert == 0.0 {
                continue;
            }
            for i1 in 0..g.n_h {
                for i2 in 0..g.n_h {
                    let c = self.coeffs[g.spectral_index(m, i1, i2)];
                    if c == ZERO {
                        continue;
                    }
                    let phase = g.xi(i1) * x1 + g.xi(i2) * x2;
                    let e = Complex64::new(0.0, phase).exp();
                    acc += (c * e).re * vert;
                }
            }
        }
        acc
    }

    /// Smooth random admissible field: reality-symmetric, Nyquist-free,
    /// coefficient envelope `(1 + |ξ|² + k²)^(-decay/2)`.
    pub fn random<R: Rng + ?Sized>(grid: SlabGrid, parity: Parity, decay: f64, rng: &mut R) -> Self {
        let mut f = Self::zeros(grid, parity);
        let n = grid.n_h;
        for m in 0..grid.slots() {
            if !admissible_slot(&grid, parity, m) {
                continue;
            }
            for i1 in 0..n {
                for i2 in 0..n {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    if grid.is_nyquist(i1) || grid.is_nyquist(i2) {
                        continue;
                    }
                    let w = weight(&grid, i1, i2, m).powf(-decay / 2.0);
                    f.coeffs[grid.spectral_index(m, i1, i2)] = Complex64::new(re, im) * w;
                }
            }
        }
        f.enforce_reality();
        f
    }

    /// Replaces every coefficient by the average with its conjugate partner.
    pub fn enforce_reality(&mut self) {
        let g = self.grid;
        let n = g.n_h;
        for m in 0..g.slots() {
            for i1 in 0..n {
                for i2 in 0..n {
                    let a = g.spectral_index(m, i1, i2);
                    let b = g.spectral_index(m, (n - i1) % n, (n - i2) % n);
                    if b < a {
                        continue;
                    }
                    let avg = (self.coeffs[a] + self.coeffs[b].conj()) * 0.5;
                    self.coeffs[a] = avg;
                    self.coeffs[b] = avg.conj();
                }
            }
        }
    }

    /// Largest violation of `c(-j) = conj(c(j))`.
    pub fn reality_defect(&self) -> f64 {
        let g = self.grid;
        let n = g.n_h;
        let mut worst: f64 = 0.0;
        for m in 0..g.slots() {
            for i1 in 0..n {
                for i2 in 0..n {
                    let a = self.coeffs[g.spectral_index(m, i1, i2)];
                    let b = self.coeffs[g.spectral_index(m, (n - i1) % n, (n - i2) % n)];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    /// Zeroes every mode outside the dealiasing band.
    pub fn dealias(&mut self) {
        let g = self.grid;
        let plane = g.plane_len();
        let n = g.n_h;
        exec::for_each_chunk_mut(&mut self.coeffs, plane, |m, p| {
            for i1 in 0..n {
                for i2 in 0..n {
                    if !g.retained(i1, i2, m) {
                        p[i1 * n + i2] = ZERO;
                    }
                }
            }
        });
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    /// Multiplies every mode by `symbol(ξ₁, ξ₂, m)`, mapping to `parity`.
    pub(crate) fn map_modes(&self, parity: Parity, symbol: impl Fn(f64, f64, usize) -> Complex64 + Sync) -> Self {
        let g = self.grid;
        let plane = g.plane_len();
        let n = g.n_h;
        let mut out = vec![ZERO; g.spectral_len()];
        exec::for_each_chunk_mut(&mut out, plane, |m, p| {
            if !admissible_slot(&g, parity, m) {
                return;
            }
            let src = &self.coeffs[m * plane..(m + 1) * plane];
            for i1 in 0..n {
                let x1 = g.xi(i1);
                for i2 in 0..n {
                    let c = src[i1 * n + i2];
                    if c != ZERO {
                        p[i1 * n + i2] = c * symbol(x1, g.xi(i2), m);
                    }
                }
            }
        });
        Self { grid: g, parity, coeffs: out }
    }

    /// Exact spectral derivative along `axis ∈ {1, 2, 3}`; `∂₃` flips parity.
    /// The horizontal Nyquist mode has no real derivative and maps to zero.
    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid;
        let nyq = g.n_h as f64 / 2.0 / g.l_h;
        match axis {
            1 => self.map_modes(self.parity, |x1, _, _| {
                if x1.abs() >= nyq - 1e-12 {
                    ZERO
                } else {
                    Complex64::new(0.0, x1)
                }
            }),
            2 => self.map_modes(self.parity, |_, x2, _| {
                if x2.abs() >= nyq - 1e-12 {
                    ZERO
                } else {
                    Complex64::new(0.0, x2)
                }
            }),
            3 => {
                let sign = match self.parity {
                    // ∂₃ cos(kx) = -k sin(kx)
                    Parity::Even => -1.0,
                    // ∂₃ sin(kx) = k cos(kx)
                    Parity::Odd => 1.0,
                };
                self.map_modes(self.parity.flip(), |_, _, m| Complex64::new(sign * g.k(m), 0.0))
            }
            _ => panic!("axis must be 1, 2 or 3, got {axis}"),
        }
    }

    pub fn laplacian(&self) -> Self {
        let g = self.grid;
        self.map_modes(self.parity, |x1, x2, m| Complex64::new(-(x1 * x1 + x2 * x2 + g.k(m).powi(2)), 0.0))
    }

    pub fn horizontal_laplacian(&self) -> Self {
        self.map_modes(self.parity, |x1, x2, _| Complex64::new(-(x1 * x1 + x2 * x2), 0.0))
    }

    /// `(Σ (1 + |ξ|² + k²)^s |c|² w)^{1/2}` with weights making `H⁰ = L²(Ω_L)`.
    pub fn sobolev_norm(&self, s: u32) -> Result<f64, SpectralError> {
        if s > MAX_SOBOLEV_ORDER {
            return Err(SpectralError::SobolevOrder(s));
        }
        Ok(self.sobolev_norm_sq_unchecked(s).sqrt())
    }

    pub(crate) fn sobolev_norm_sq_unchecked(&self, s: u32) -> f64 {
        let g = &self.grid;
        let n = g.n_h;
        let mut acc = 0.0;
        for m in 0..g.slots() {
            let wm = basis_weight(self.parity, m);
            if wm == 0.0 {
                continue;
            }
            for i1 in 0..n {
                for i2 in 0..n {
                    let c = self.coeffs[g.spectral_index(m, i1, i2)];
                    if c == ZERO {
                        continue;
                    }
                    acc += weight(g, i1, i2, m).powi(s as i32) * c.norm_sqr() * wm;
                }
            }
        }
        acc * g.volume()
    }

    /// Real `L²(Ω_L)` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.assert_compatible(other);
        let g = &self.grid;
        let plane = g.plane_len();
        let mut acc = 0.0;
        for m in 0..g.slots() {
            let wm = basis_weight(self.parity, m);
            if wm == 0.0 {
                continue;
            }
            let a = &self.coeffs[m * plane..(m + 1) * plane];
            let b = &other.coeffs[m * plane..(m + 1) * plane];
            acc += wm * a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum::<f64>();
        }
        acc * g.volume()
    }

    /// `∫_Ω f dx`.
    pub fn integral(&self) -> f64 {
        match self.parity {
            Parity::Even => self.coeffs[0].re * self.grid.volume(),
            Parity::Odd => {
                // ∫₀¹ sin(mπx) dx = (1 - (-1)^m)/(mπ)
                let g = &self.grid;
                (1..g.slots())
                    .filter(|m| m % 2 == 1)
                    .map(|m| self.coeffs[g.spectral_index(m, 0, 0)].re * 2.0 / g.k(m))
                    .sum::<f64>()
                    * g.volume()
            }
        }
    }

    /// Cosine coefficient `m = 0`, i.e. the vertical average, as a plane.
    pub fn vertical_mean_plane(&self) -> Vec<Complex64> {
        match self.parity {
            Parity::Even => self.coeffs[..self.grid.plane_len()].to_vec(),
            Parity::Odd => {
                let g = &self.grid;
                let plane = g.plane_len();
                let mut out = vec![ZERO; plane];
                for m in (1..g.slots()).filter(|m| m % 2 == 1) {
                    let f = 2.0 / g.k(m);
                    for (o, c) in out.iter_mut().zip(&self.coeffs[m * plane..(m + 1) * plane]) {
                        *o += c * f;
                    }
                }
                out
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { grid: self.grid, parity: self.parity, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.assert_compatible(other);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<(), SpectralError> {
        self.grid.check_same(&other.grid)?;
        if self.parity != other.parity {
            return Err(SpectralError::ParityMismatch { expected: self.parity, found: other.parity });
        }
        Ok(())
    }

    fn assert_compatible(&self, other: &Self) {
        if let Err(e) = self.check_compatible(other) {
            panic!("incompatible fields: {e}");
        }
    }
}

/// `1 + |ξ|² + k²` for slot `(i1, i2, m)`.
#[inline]
pub(crate) fn weight(g: &SlabGrid, i1: usize, i2: usize, m: usize) -> f64 {
    let x1 = g.xi(i1);
    let x2 = g.xi(i2);
    1.0 + x1 * x1 + x2 * x2 + g.k(m).powi(2)
}

/// `∫₀¹ φ_m² dx₃`.
#[inline]
pub(crate) fn basis_weight(parity: Parity, m: usize) -> f64 {
    match (parity, m) {
        (Parity::Even, 0) => 1.0,
        (Parity::Odd, 0) => 0.0,
        _ => 0.5,
    }
}

/// Slots that may hold nonzero coefficients for the family.
#[inline]
pub(crate) fn admissible_slot(g: &SlabGrid, parity: Parity, m: usize) -> bool {
    match parity {
        Parity::Even => m < g.n_v,
        Parity::Odd => m >= 1 && m < g.n_v,
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.assert_compatible(rhs);
        ScalarField {
            grid: self.grid,
            parity: self.parity,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.assert_compatible(rhs);
        ScalarField {
            grid: self.grid,
            parity: self.parity,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, a: f64) -> ScalarField {
        self.scale(a)
    }
}
