use std::ops::{Add, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::LimitError;
use crate::spectral::transform::plane_fft;
use crate::spectral::{Parity, ScalarField, SlabGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Horizontal field on the torus of side `2πL`, i.e. a vertically constant
/// slice of the slab. Shares the horizontal layout of [`SlabGrid`]; the
/// vertical resolution of the attached grid is irrelevant here.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: SlabGrid,
    coeffs: Vec<Complex64>,
}

impl Field2D {
    pub fn zeros(grid: SlabGrid) -> Self {
        Self { grid, coeffs: vec![ZERO; grid.plane_len()] }
    }

    pub fn from_coeffs(grid: SlabGrid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.plane_len(), "plane length mismatch");
        Self { grid, coeffs }
    }

    pub fn from_fn(grid: SlabGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n_h;
        let mut vals = vec![0.0; n * n];
        for p1 in 0..n {
            for p2 in 0..n {
                vals[p1 * n + p2] = f(grid.x_h(p1), grid.x_h(p2));
            }
        }
        Self::from_physical(grid, &vals)
    }

    pub fn from_physical(grid: SlabGrid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.plane_len(), "plane length mismatch");
        Self { grid, coeffs: plane_fft(grid.n_h).analyze(values) }
    }

    /// Vertical average of a slab field.
    pub fn vertical_mean(f: &ScalarField) -> Self {
        Self { grid: *f.grid(), coeffs: f.vertical_mean_plane() }
    }

    /// Vertically constant cosine field with this plane as its `m = 0` slot.
    pub fn embed(&self, grid: &SlabGrid) -> Result<ScalarField, LimitError> {
        if grid.n_h != self.grid.n_h || grid.l_h != self.grid.l_h {
            return Err(LimitError::GridMismatch);
        }
        let mut out = vec![ZERO; grid.spectral_len()];
        out[..grid.plane_len()].copy_from_slice(&self.coeffs);
        let mut f = ScalarField::from_coeffs(*grid, Parity::Even, out)?;
        f.dealias();
        Ok(f)
    }

    pub fn grid(&self) -> &SlabGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, j1: i64, j2: i64) -> Complex64 {
        self.coeffs[self.grid.slot(j1) * self.grid.n_h + self.grid.slot(j2)]
    }

    pub fn to_physical(&self) -> Vec<f64> {
        plane_fft(self.grid.n_h).synthesize(&self.coeffs)
    }

    pub fn random<R: Rng + ?Sized>(grid: SlabGrid, decay: f64, rng: &mut R) -> Self {
        let n = grid.n_h;
        let mut f = Self::zeros(grid);
        for i1 in 0..n {
            for i2 in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                if grid.is_nyquist(i1) || grid.is_nyquist(i2) {
                    continue;
                }
                let (x1, x2) = (grid.xi(i1), grid.xi(i2));
                let w = (1.0 + x1 * x1 + x2 * x2).powf(-decay / 2.0);
                f.coeffs[i1 * n + i2] = Complex64::new(re, im) * w;
            }
        }
        f.enforce_reality();
        f
    }

    pub fn enforce_reality(&mut self) {
        let n = self.grid.n_h;
        for i1 in 0..n {
            for i2 in 0..n {
                let a = i1 * n + i2;
                let b = ((n - i1) % n) * n + (n - i2) % n;
                if b < a {
                    continue;
                }
                let avg = (self.coeffs[a] + self.coeffs[b].conj()) * 0.5;
                self.coeffs[a] = avg;
                self.coeffs[b] = avg.conj();
            }
        }
    }

    pub fn dealias(&mut self) {
        let g = self.grid;
        let n = g.n_h;
        for i1 in 0..n {
            for i2 in 0..n {
                if !g.retained(i1, i2, 0) {
                    self.coeffs[i1 * n + i2] = ZERO;
                }
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    pub(crate) fn map_modes(&self, symbol: impl Fn(f64, f64) -> Complex64) -> Self {
        let g = self.grid;
        let n = g.n_h;
        let mut out = vec![ZERO; n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let c = self.coeffs[i1 * n + i2];
                if c != ZERO {
                    out[i1 * n + i2] = c * symbol(g.xi(i1), g.xi(i2));
                }
            }
        }
        Self { grid: g, coeffs: out }
    }

    /// `∂₁` or `∂₂`; Nyquist modes map to zero.
    pub fn derivative(&self, axis: usize) -> Self {
        let nyq = self.grid.n_h as f64 / 2.0 / self.grid.l_h;
        let pick = move |x1: f64, x2: f64| match axis {
            1 => x1,
            2 => x2,
            _ => panic!("axis must be 1 or 2, got {axis}"),
        };
        self.map_modes(|x1, x2| {
            let x = pick(x1, x2);
            if x.abs() >= nyq - 1e-12 {
                ZERO
            } else {
                Complex64::new(0.0, x)
            }
        })
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|x1, x2| Complex64::new(-(x1 * x1 + x2 * x2), 0.0))
    }

    /// `Δ⁻¹` on zero-mean fields.
    pub fn inverse_laplacian(&self) -> Result<Self, LimitError> {
        let mean = self.coeffs[0].norm();
        let scale = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        if mean > 1e-12 * scale.max(1.0) {
            return Err(LimitError::NonzeroMean { mean: self.coeffs[0].re });
        }
        Ok(self.zero_mean_inverse_laplacian())
    }

    /// `Δ⁻¹` after discarding the mean.
    pub fn zero_mean_inverse_laplacian(&self) -> Self {
        self.map_modes(|x1, x2| {
            let k2 = x1 * x1 + x2 * x2;
            if k2 == 0.0 {
                ZERO
            } else {
                Complex64::new(-1.0 / k2, 0.0)
            }
        })
    }

    /// `∇^⊥ f = (-∂₂f, ∂₁f)`.
    pub fn perp_gradient(&self) -> [Self; 2] {
        [self.derivative(2).scale(-1.0), self.derivative(1)]
    }

    pub fn gradient(&self) -> [Self; 2] {
        [self.derivative(1), self.derivative(2)]
    }

    /// Area of the torus.
    pub fn area(&self) -> f64 {
        self.grid.volume()
    }

    pub fn integral(&self) -> f64 {
        self.coeffs[0].re * self.area()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * self.area()
    }

    /// `H^s(T²)` norm with weight `(1 + |ξ|²)^s`.
    pub fn sobolev_norm(&self, s: u32) -> f64 {
        let g = &self.grid;
        let n = g.n_h;
        let mut acc = 0.0;
        for i1 in 0..n {
            for i2 in 0..n {
                let (x1, x2) = (g.xi(i1), g.xi(i2));
                acc += (1.0 + x1 * x1 + x2 * x2).powi(s as i32) * self.coeffs[i1 * n + i2].norm_sqr();
            }
        }
        (acc * self.area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    /// Dealiased pointwise product of sums of products, assembled in physical
    /// space: `Σ_k a_k b_k`.
    pub fn sum_of_products(grid: SlabGrid, pairs: &[(&Field2D, &Field2D)]) -> Self {
        let n = grid.plane_len();
        let mut acc = vec![0.0; n];
        for (a, b) in pairs {
            let (pa, pb) = (a.to_physical(), b.to_physical());
            for i in 0..n {
                acc[i] += pa[i] * pb[i];
            }
        }
        Self::from_physical(grid, &acc).dealiased()
    }
}

impl Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        Field2D { grid: self.grid, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        Field2D { grid: self.grid, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
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
    fn roundtrip_and_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Field2D::random(grid(), 2.0, &mut rng);
        let back = Field2D::from_physical(grid(), &f.to_physical());
        let err = back.coeffs().iter().zip(f.coeffs()).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(err < 1e-14);
        let s = Field2D::from_fn(grid(), |x, y| (2.0 * x).sin() * y.cos());
        let d = s.derivative(1);
        let e = Field2D::from_fn(grid(), |x, y| 2.0 * (2.0 * x).cos() * y.cos());
        assert!((&d - &e).sobolev_norm(0) < 1e-12);
    }

    #[test]
    fn inverse_laplacian_contract() {
        let c = Field2D::from_fn(grid(), |_, _| 1.0);
        assert!(matches!(c.inverse_laplacian(), Err(LimitError::NonzeroMean { .. })));
        let f = Field2D::from_fn(grid(), |x, y| (x + 2.0 * y).cos());
        let g = f.inverse_laplacian().unwrap();
        assert!((&g.laplacian() - &f).sobolev_norm(0) < 1e-12);
    }

    #[test]
    fn embedding_and_vertical_mean_agree() {
        let slab = SlabGrid::with_resolution(32, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Field2D::random(slab, 3.0, &mut rng).dealiased();
        let e = f.embed(&slab).unwrap();
        assert!(e.coeffs()[slab.plane_len()..].iter().all(|c| *c == ZERO));
        assert_eq!(Field2D::vertical_mean(&e), f);
        assert!((e.sobolev_norm(2).unwrap() - f.sobolev_norm(2)).abs() < 1e-12 * f.sobolev_norm(2));
        let other = SlabGrid::with_resolution(16, 8).unwrap();
        assert!(f.embed(&other).is_err());
    }
}
