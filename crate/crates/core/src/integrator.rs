//! Integrating-factor Runge-Kutta stepping.
//!
//! The stiff symbol of every retained mode is diagonalised once; `exp(hL)` for
//! any `h` is then `V e^{hΛ} V⁻¹`. Modes whose eigenvector basis is too badly
//! conditioned fall back to a Padé exponential of the stored matrix.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint;
use crate::exec;
use crate::linalg::{CMat, Eigen};
use crate::model::{nonlinear_rhs, ModelError, NskParams, NskState, StiffSymbol, NVAR};
use crate::spectral::SlabGrid;

/// Eigenvector condition number above which the Padé path is used.
pub const COND_LIMIT: f64 = 1e8;

/// Step halvings attempted before a step is declared failed.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "IFRK2")]
    Ifrk2,
    #[serde(rename = "IFRK4")]
    Ifrk4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Ifrk2 => 2,
            Scheme::Ifrk4 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Steps between checkpoints; 0 disables them.
    #[serde(default)]
    pub checkpoint_every: usize,
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Steps between observer calls (the initial state is always observed).
    #[serde(default = "default_observe")]
    pub observe_every: usize,
}

fn default_observe() -> usize {
    10
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Ifrk4,
            cfl: 0.5,
            dt_max: 0.005,
            t_end: 0.5,
            checkpoint_every: 0,
            checkpoint_dir: None,
            observe_every: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(IntegratorError::Config("cfl must lie in (0, 1]".into()));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(IntegratorError::Config("dt_max must be positive".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(IntegratorError::Config("t_end must be nonnegative".into()));
        }
        if self.observe_every == 0 {
            return Err(IntegratorError::Config("observe_every must be at least 1".into()));
        }
        if self.checkpoint_every > 0 && self.checkpoint_dir.is_none() {
            return Err(IntegratorError::Config("checkpoint_every needs checkpoint_dir".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("integrator configuration: {0}")]
    Config(String),
    #[error("step failed at t = {time} after {halvings} halvings (dt = {dt}): {source}")]
    StepFailed { time: f64, dt: f64, halvings: u32, source: ModelError },
    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },
    #[error(transparent)]
    Checkpoint(#[from] checkpoint::CheckpointError),
}

/// `exp(hL)` for one mode.
#[derive(Debug, Clone)]
pub enum ModeExp {
    Diagonal { vectors: CMat, inverse: CMat, values: Vec<Complex64> },
    Pade { matrix: CMat },
}

impl ModeExp {
    pub fn new(matrix: &CMat) -> Self {
        let e = Eigen::new(matrix);
        if e.cond.is_finite() && e.cond <= COND_LIMIT {
            ModeExp::Diagonal { vectors: e.vectors, inverse: e.inverse, values: e.values }
        } else {
            ModeExp::Pade { matrix: matrix.clone() }
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, ModeExp::Pade { .. })
    }

    pub fn exp(&self, h: f64) -> CMat {
        match self {
            ModeExp::Diagonal { vectors, inverse, values } => {
                let d: Vec<Complex64> = values.iter().map(|l| (l * h).exp()).collect();
                vectors.mul(&CMat::from_diagonal(&d)).mul(inverse)
            }
            ModeExp::Pade { matrix } => matrix.scale(Complex64::new(h, 0.0)).exp_pade(),
        }
    }

    /// `x ← exp(hL) x`.
    pub fn apply(&self, h: f64, x: &mut [Complex64]) {
        match self {
            ModeExp::Diagonal { vectors, inverse, values } => {
                let mut y = inverse.matvec(x);
                for (yi, l) in y.iter_mut().zip(values) {
                    *yi *= (l * h).exp();
                }
                vectors.apply(&y, x);
            }
            ModeExp::Pade { matrix } => {
                let e = matrix.scale(Complex64::new(h, 0.0)).exp_pade();
                let y = e.matvec(x);
                x.copy_from_slice(&y);
            }
        }
    }
}

/// Cached exponentials for every retained mode of a grid.
pub struct Propagator {
    grid: SlabGrid,
    // slot index → position in `modes`
    lookup: Vec<Option<usize>>,
    modes: Vec<ModeExp>,
}

impl Propagator {
    pub fn new(grid: SlabGrid, params: &NskParams) -> Self {
        let mut lookup = vec![None; grid.spectral_len()];
        let mut keys = Vec::new();
        for m in 0..grid.slots() {
            for i1 in 0..grid.n_h {
                for i2 in 0..grid.n_h {
                    if grid.retained(i1, i2, m) {
                        let idx = grid.spectral_index(m, i1, i2);
                        lookup[idx] = Some(keys.len());
                        keys.push((i1, i2, m));
                    }
                }
            }
        }
        let modes = exec::map_range(keys.len(), |n| {
            let (i1, i2, m) = keys[n];
            ModeExp::new(&StiffSymbol::assemble([grid.xi(i1), grid.xi(i2)], grid.k(m), params).matrix())
        });
        Self { grid, lookup, modes }
    }

    pub fn grid(&self) -> &SlabGrid {
        &self.grid
    }

    /// Number of modes using the Padé fallback.
    pub fn fallback_count(&self) -> usize {
        self.modes.iter().filter(|m| m.is_fallback()).count()
    }

    /// `exp(hL)` applied to a packed state; unretained modes are zeroed.
    pub fn apply(&self, h: f64, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = x.to_vec();
        exec::for_each_chunk_mut(&mut out, NVAR, |idx, v| match self.lookup[idx] {
            Some(n) => self.modes[n].apply(h, v),
            None => v.fill(Complex64::new(0.0, 0.0)),
        });
        out
    }
}

/// Result of a single accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    pub halvings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub rejections: usize,
    pub observations: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_final: f64,
    pub fallback_modes: usize,
}

pub struct Integrator {
    params: NskParams,
    config: IntegratorConfig,
    propagator: Propagator,
    nonlinear: bool,
}

fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * a;
    }
}

impl Integrator {
    pub fn new(grid: SlabGrid, params: NskParams, config: IntegratorConfig) -> Result<Self, IntegratorError> {
        config.validate()?;
        params.validate().map_err(|e| IntegratorError::Config(e.to_string()))?;
        let propagator = Propagator::new(grid, &params);
        Ok(Self { params, config, propagator, nonlinear: true })
    }

    /// Disables the explicit remainder, leaving the exact linear flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn params(&self) -> &NskParams {
        &self.params
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    fn remainder(&self, x: &[Complex64]) -> Result<Vec<Complex64>, ModelError> {
        let grid = *self.propagator.grid();
        if !self.nonlinear {
            return Ok(vec![Complex64::new(0.0, 0.0); x.len()]);
        }
        let state = NskState::unpack(grid, x, 0.0);
        Ok(nonlinear_rhs(&state, &self.params)?.pack())
    }

    // the density floor only constrains the full nonlinear system
    fn guard(&self, state: &NskState) -> Result<(), ModelError> {
        if self.nonlinear {
            state.check_positivity(self.params.epsilon)
        } else {
            Ok(())
        }
    }

    /// One integrating-factor step of size `dt` without retries.
    pub fn try_step(&self, state: &NskState, dt: f64) -> Result<NskState, ModelError> {
        let grid = *state.grid();
        let p = &self.propagator;
        let x = state.pack();
        let next = match self.config.scheme {
            Scheme::Ifrk2 => {
                let k1 = self.remainder(&x)?;
                let mut a = x.clone();
                axpy(&mut a, dt, &k1);
                let k2 = self.remainder(&p.apply(dt, &a))?;
                let mut b = x;
                axpy(&mut b, 0.5 * dt, &k1);
                let mut out = p.apply(dt, &b);
                axpy(&mut out, 0.5 * dt, &k2);
                out
            }
            Scheme::Ifrk4 => {
                let h = dt;
                let ex_half = p.apply(0.5 * h, &x);
                let k1 = self.remainder(&x)?;
                let mut a = x.clone();
                axpy(&mut a, 0.5 * h, &k1);
                let k2 = self.remainder(&p.apply(0.5 * h, &a))?;
                let mut b = ex_half.clone();
                axpy(&mut b, 0.5 * h, &k2);
                let k3 = self.remainder(&b)?;
                let mut c = p.apply(0.5 * h, &ex_half);
                let e_k3 = p.apply(0.5 * h, &k3);
                axpy(&mut c, h, &e_k3);
                let k4 = self.remainder(&c)?;
                let mut k23 = k2;
                axpy(&mut k23, 1.0, &k3);
                let mut out = p.apply(h, &x);
                axpy(&mut out, h / 6.0, &p.apply(h, &k1));
                axpy(&mut out, h / 3.0, &p.apply(0.5 * h, &k23));
                axpy(&mut out, h / 6.0, &k4);
                out
            }
        };
        let out = NskState::unpack(grid, &next, state.time + dt);
        self.guard(&out)?;
        Ok(out)
    }

    /// Step with halving on positivity failure.
    pub fn step(&self, state: &NskState, dt: f64) -> Result<(NskState, StepInfo), IntegratorError> {
        if let Err(e) = self.guard(state) {
            return Err(IntegratorError::StepFailed { time: state.time, dt, halvings: 0, source: e });
        }
        let mut h = dt;
        let mut halvings = 0;
        loop {
            match self.try_step(state, h) {
                Ok(s) => return Ok((s, StepInfo { dt: h, halvings })),
                Err(e @ ModelError::Positivity { .. }) => {
                    if halvings == MAX_HALVINGS {
                        return Err(IntegratorError::StepFailed { time: state.time, dt: h, halvings, source: e });
                    }
                    halvings += 1;
                    h *= 0.5;
                }
                Err(e) => return Err(IntegratorError::StepFailed { time: state.time, dt: h, halvings, source: e }),
            }
        }
    }

    /// Advective step size `min(dt_max, cfl Δx / max|u|)`.
    pub fn stable_dt(&self, state: &NskState) -> f64 {
        let vmax = state.u.max_magnitude();
        let dx = state.grid().min_spacing();
        if vmax > 0.0 {
            self.config.dt_max.min(self.config.cfl * dx / vmax)
        } else {
            self.config.dt_max
        }
    }

    /// Integrates to `t_end`, calling `observer` on the initial state, every
    /// `observe_every` steps and the final state.
    pub fn run(
        &self,
        initial: &NskState,
        mut observer: impl FnMut(&NskState, usize),
    ) -> Result<(NskState, RunSummary), IntegratorError> {
        let t_end = self.config.t_end;
        let mut state = initial.clone();
        let mut summary = RunSummary {
            steps: 0,
            rejections: 0,
            observations: 0,
            dt_min: f64::INFINITY,
            dt_max: 0.0,
            t_final: state.time,
            fallback_modes: self.propagator.fallback_count(),
        };
        observer(&state, 0);
        summary.observations += 1;
        let tol = 1e-12 * t_end.abs().max(1.0);
        while state.time < t_end - tol {
            let mut dt = self.stable_dt(&state);
            if state.time + dt > t_end - tol {
                dt = t_end - state.time;
            }
            let (next, info) = self.step(&state, dt)?;
            if !next.u.c[0].coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(IntegratorError::NonFinite { time: next.time });
            }
            state = next;
            summary.steps += 1;
            summary.rejections += info.halvings as usize;
            summary.dt_min = summary.dt_min.min(info.dt);
            summary.dt_max = summary.dt_max.max(info.dt);
            if summary.steps.is_multiple_of(self.config.observe_every) {
                observer(&state, summary.steps);
                summary.observations += 1;
            }
            if self.config.checkpoint_every > 0 && summary.steps.is_multiple_of(self.config.checkpoint_every) {
                if let Some(dir) = &self.config.checkpoint_dir {
                    let path = dir.join(format!("checkpoint_{:06}.nskc", summary.steps));
                    checkpoint::write(&path, &state, &self.params)?;
                }
            }
        }
        if summary.steps == 0 {
            summary.dt_min = 0.0;
        } else if !summary.steps.is_multiple_of(self.config.observe_every) {
            observer(&state, summary.steps);
            summary.observations += 1;
        }
        summary.t_final = state.time;
        Ok((state, summary))
    }
}
