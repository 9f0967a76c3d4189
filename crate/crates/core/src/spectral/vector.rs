use std::ops::{Add, Sub};

use super::field::ScalarField;
use super::grid::{Parity, SlabGrid};
use super::{SpectralError, MAX_SOBOLEV_ORDER};

/// Three-component field; each component keeps its own vertical parity.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub c: [ScalarField; 3],
}

/// Parities of a velocity-like field.
pub const VELOCITY_PARITY: [Parity; 3] = [Parity::Even, Parity::Even, Parity::Odd];

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField, c3: ScalarField) -> Self {
        assert!(c1.grid() == c2.grid() && c2.grid() == c3.grid(), "components live on different grids");
        Self { c: [c1, c2, c3] }
    }

    pub fn zeros(grid: SlabGrid, parities: [Parity; 3]) -> Self {
        Self::new(
            ScalarField::zeros(grid, parities[0]),
            ScalarField::zeros(grid, parities[1]),
            ScalarField::zeros(grid, parities[2]),
        )
    }

    /// Zero velocity-like field with parities `(Even, Even, Odd)`.
    pub fn velocity_zeros(grid: SlabGrid) -> Self {
        Self::zeros(grid, VELOCITY_PARITY)
    }

    pub fn from_fn(grid: SlabGrid, parities: [Parity; 3], f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        Self::new(
            ScalarField::from_fn(grid, parities[0], |x, y, z| f(x, y, z)[0]),
            ScalarField::from_fn(grid, parities[1], |x, y, z| f(x, y, z)[1]),
            ScalarField::from_fn(grid, parities[2], |x, y, z| f(x, y, z)[2]),
        )
    }

    pub fn grid(&self) -> &SlabGrid {
        self.c[0].grid()
    }

    pub fn parities(&self) -> [Parity; 3] {
        [self.c[0].parity(), self.c[1].parity(), self.c[2].parity()]
    }

    pub fn gradient(f: &ScalarField) -> Self {
        Self::new(f.derivative(1), f.derivative(2), f.derivative(3))
    }

    /// `∂₁v₁ + ∂₂v₂ + ∂₃v₃`; panics unless the components are
    /// parity-consistent (`∂₃` of the third must match the first).
    pub fn divergence(&self) -> ScalarField {
        let a = self.c[0].derivative(1);
        let b = self.c[1].derivative(2);
        let d = self.c[2].derivative(3);
        &(&a + &b) + &d
    }

    pub fn curl(&self) -> Self {
        let [v1, v2, v3] = &self.c;
        Self::new(
            &v3.derivative(2) - &v2.derivative(3),
            &v1.derivative(3) - &v3.derivative(1),
            &v2.derivative(1) - &v1.derivative(2),
        )
    }

    pub fn laplacian(&self) -> Self {
        Self::new(self.c[0].laplacian(), self.c[1].laplacian(), self.c[2].laplacian())
    }

    pub fn dealias(&mut self) {
        self.c.iter_mut().for_each(ScalarField::dealias);
    }

    /// `(Σᵢ ‖vᵢ‖²_{H^s})^{1/2}`.
    pub fn sobolev_norm(&self, s: u32) -> Result<f64, SpectralError> {
        if s > MAX_SOBOLEV_ORDER {
            return Err(SpectralError::SobolevOrder(s));
        }
        Ok(self.c.iter().map(|f| f.sobolev_norm_sq_unchecked(s)).sum::<f64>().sqrt())
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.c.iter().zip(&other.c).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { c: [self.c[0].scale(a), self.c[1].scale(a), self.c[2].scale(a)] }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.c.iter_mut().zip(&other.c) {
            x.axpy(a, y);
        }
    }

    /// Physical values of each component.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        [self.c[0].to_physical(), self.c[1].to_physical(), self.c[2].to_physical()]
    }

    pub fn from_physical(grid: SlabGrid, parities: [Parity; 3], values: &[Vec<f64>; 3]) -> Result<Self, SpectralError> {
        Ok(Self::new(
            ScalarField::from_physical(grid, parities[0], &values[0])?,
            ScalarField::from_physical(grid, parities[1], &values[1])?,
            ScalarField::from_physical(grid, parities[2], &values[2])?,
        ))
    }

    /// Pointwise maximum of `|v|` on the grid.
    pub fn max_magnitude(&self) -> f64 {
        let [a, b, c] = self.to_physical();
        a.iter().zip(&b).zip(&c).fold(0.0, |m, ((x, y), z)| m.max((x * x + y * y + z * z).sqrt()))
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField { c: [&self.c[0] + &rhs.c[0], &self.c[1] + &rhs.c[1], &self.c[2] + &rhs.c[2]] }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField { c: [&self.c[0] - &rhs.c[0], &self.c[1] - &rhs.c[1], &self.c[2] - &rhs.c[2]] }
    }
}
