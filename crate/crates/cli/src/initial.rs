//! Initial data for the sweeps.

use nsklim_core::checkpoint;
use nsklim_core::limits::{EulerState2D, Field2D};
use nsklim_core::model::NskState;
use nsklim_core::spectral::{Parity, ScalarField, SlabGrid, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, InitialData};

fn normalized(f: ScalarField, peak: f64) -> ScalarField {
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(peak / m)
    } else {
        f
    }
}

fn random_field(grid: SlabGrid, parity: Parity, decay: f64, rng: &mut ChaCha8Rng, peak: f64) -> ScalarField {
    normalized(ScalarField::random(grid, parity, decay, rng).dealiased(), peak)
}

/// Divergence-free horizontal flow from a random vorticity field.
pub fn geostrophic_base(grid: SlabGrid, seed: u64, decay: f64, amplitude: f64) -> EulerState2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Field2D::random(grid, decay, &mut rng).dealiased();
    let s = EulerState2D::from_vorticity(&omega, 0.0);
    let speed = s.w[0].max_abs().max(s.w[1].max_abs());
    let k = if speed > 0.0 { amplitude / speed } else { 1.0 };
    EulerState2D::from_vorticity(&omega.scale(k), 0.0)
}

/// The incompressible flow the well-prepared data are built on, if any.
pub fn base_flow(spec: &InitialData, grid: SlabGrid) -> Option<EulerState2D> {
    match spec {
        InitialData::WellPreparedGeostrophic { seed, spectrum_decay, amplitude, .. } => {
            Some(geostrophic_base(grid, *seed, *spectrum_decay, *amplitude))
        }
        InitialData::TaylorGreen => Some(EulerState2D::taylor_green(grid)),
        _ => None,
    }
}

fn embed_flow(base: &EulerState2D, grid: &SlabGrid, eps: f64) -> Result<(ScalarField, VectorField, ScalarField), ConfigError> {
    let lift = |f: &Field2D| f.embed(grid).map_err(|e| ConfigError::Invalid(e.to_string()));
    let pi = lift(&base.pi)?;
    let u = VectorField::new(lift(&base.w[0])?, lift(&base.w[1])?, ScalarField::zeros(*grid, Parity::Odd));
    Ok((pi.scale(eps * eps), u, pi.scale(eps)))
}

/// Deterministic initial state for one `ε`.
pub fn generate_initial(spec: &InitialData, grid: SlabGrid, eps: f64) -> Result<NskState, ConfigError> {
    let build = |q, u, theta| NskState::new(q, u, theta, 0.0).map_err(|e| ConfigError::Invalid(e.to_string()));
    match spec {
        InitialData::IllPreparedRandom { seed, spectrum_decay, amplitude } => {
            if *spectrum_decay < 2.0 {
                return Err(ConfigError::Invalid("spectrum_decay below 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut f = |p| random_field(grid, p, *spectrum_decay, &mut rng, *amplitude);
            let q = f(Parity::Even);
            let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
            build(q, u, f(Parity::Even))
        }
        InitialData::WellPreparedGeostrophic { seed, spectrum_decay, perturbation, .. } => {
            let base = base_flow(spec, grid).expect("geostrophic data has a base flow");
            let (q, mut u, theta) = embed_flow(&base, &grid, eps)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let mut f = |p| random_field(grid, p, *spectrum_decay, &mut rng, *perturbation);
            let du = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
            u.axpy(eps, &du);
            build(q, u, theta)
        }
        InitialData::TaylorGreen => {
            let base = EulerState2D::taylor_green(grid);
            let (q, u, theta) = embed_flow(&base, &grid, eps)?;
            build(q, u, theta)
        }
        InitialData::FromCheckpoint { path } => {
            let (state, params) = checkpoint::read(path).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if *state.grid() != grid {
                return Err(ConfigError::Invalid(format!("checkpoint {} was written on a different grid", path.display())));
            }
            if params.epsilon != eps {
                log::warn!("checkpoint {} was written at eps = {}, reused at eps = {eps}", path.display(), params.epsilon);
            }
            Ok(state)
        }
    }
}
