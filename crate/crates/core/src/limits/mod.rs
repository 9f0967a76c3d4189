//! Limit systems: the quasi-geostrophic potential-vorticity equation, 2D
//! incompressible Euler and the corrector built from an Euler solution.

mod corrector;
mod euler;
mod plane;
mod qg;

pub use corrector::{corrector, corrector_residuals, r2_floor_ratio, Residuals};
pub use euler::{
    euler2d_run, euler2d_step, pressure, time_derivatives, velocity_from_vorticity, vorticity_rhs, EulerRates,
    EulerState2D,
};
pub use plane::Field2D;
pub use qg::{
    potential_vorticity, qg_energy, qg_enstrophy, qg_rhs, qg_run, qg_step, sigma_from_pv, solve_initial_sigma,
    QgState, SigmaSign,
};

use thiserror::Error;

use crate::spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("resonant modes |xi| = 1 carry data: {modes:?}")]
    Resonance { modes: Vec<(i64, i64)> },
    #[error("inverse Laplacian needs zero mean, got mean coefficient {mean}")]
    NonzeroMean { mean: f64 },
    #[error("velocity is not divergence free (max |div| = {max_div})")]
    NotDivergenceFree { max_div: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
