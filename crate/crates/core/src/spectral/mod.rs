//! Spectral discretisation of the slab `[0, 2πL)² × (0, 1)`.
//!
//! Horizontally every field is a Fourier series on the torus of side `2πL`.
//! Vertically a field is either a cosine series (`Parity::Even`, zero normal
//! derivative at the walls) or a sine series (`Parity::Odd`, vanishing at the
//! walls), sampled on the midpoint grid `x₃ = (j + ½)/n_v`. Velocities carry
//! parities `(Even, Even, Odd)`, which makes `u·n = 0` and `n × curl u = 0`
//! hold identically on both walls.
//!
//! Coefficients are plain amplitudes of the basis functions
//! `exp(i ξ·x_h) cos(mπx₃)` / `exp(i ξ·x_h) sin(mπx₃)`; norms weight them so
//! that `H⁰` coincides with `L²(Ω_L)`.

mod field;
mod grid;
pub(crate) mod transform;
mod vector;

pub use field::ScalarField;
pub use grid::{Parity, SlabGrid};
pub use vector::{VectorField, VELOCITY_PARITY};

use thiserror::Error;

/// Highest Sobolev order supported by [`ScalarField::sobolev_norm`].
pub const MAX_SOBOLEV_ORDER: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("parity mismatch: field is {found:?}, requested {expected:?}")]
    ParityMismatch { expected: Parity, found: Parity },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("sobolev order {0} outside supported range 0..={MAX_SOBOLEV_ORDER}")]
    SobolevOrder(u32),
    #[error("expected {expected} values, got {found}")]
    Length { expected: usize, found: usize },
}
