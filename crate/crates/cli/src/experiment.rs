//! Sweep orchestration.

use std::time::Instant;

use nsklim_core::acoustics::{rage_decay, spectrum_report, AcousticField, RageCurve, SpectrumReport};
use nsklim_core::diagnostics::{compact_l2_error, error_norms, fit_rate, EnergySeries, EnergyTimeline, ErrorRecord};
use nsklim_core::integrator::{Integrator, RunSummary};
use nsklim_core::limits::{
    corrector, corrector_residuals, euler2d_run, euler2d_step, qg_run, qg_step, r2_floor_ratio, solve_initial_sigma,
    time_derivatives, EulerState2D, QgState, SigmaSign,
};
use nsklim_core::model::{nsk_rhs, NskState};
use nsklim_core::spectral::SlabGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, Experiment, RunConfig};
use crate::initial::{base_flow, generate_initial};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactSample {
    pub t: f64,
    pub value: f64,
}

/// Everything measured for one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRun {
    pub eps: f64,
    pub status: RunStatus,
    pub failure: Option<String>,
    pub solver: Option<RunSummary>,
    /// Error norms at every observation.
    pub errors: Vec<ErrorRecord>,
    /// Observation with the largest total error.
    pub sup_error: Option<ErrorRecord>,
    /// `‖u^ε - (∇^⊥σ, 0)‖_{L²(K)}` at every observation.
    pub compact: Vec<CompactSample>,
    /// The same error in `L²((0, T) × K)`.
    pub compact_l2: Option<f64>,
    pub energy: Option<EnergySeries>,
}

impl EpsRun {
    fn new(eps: f64) -> Self {
        Self {
            eps,
            status: RunStatus::Ok,
            failure: None,
            solver: None,
            errors: Vec::new(),
            sup_error: None,
            compact: Vec::new(),
            compact_l2: None,
            energy: None,
        }
    }

    fn fail(mut self, msg: String) -> Self {
        log::error!("eps = {}: {msg}", self.eps);
        self.status = RunStatus::Failed;
        self.failure = Some(msg);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub eps: f64,
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// Wall-clock data, kept out of the deterministic record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub threads: usize,
    pub total_seconds: f64,
    pub per_eps_seconds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub experiment: Experiment,
    pub eps_list: Vec<f64>,
    pub sobolev_order: u32,
    pub runs: Vec<EpsRun>,
    pub rates: Vec<RateRow>,
    pub residuals: Vec<ResidualRow>,
    pub r2_floor_ratio: Option<f64>,
    pub spectrum: Option<SpectrumReport>,
    pub rage: Option<RageCurve>,
    #[serde(skip)]
    pub timings: Timings,
}

impl SweepRecord {
    pub fn empty(config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash: config.hash(),
            experiment: config.experiment,
            eps_list: config.eps_list.clone(),
            sobolev_order: config.diagnostics.sobolev_order,
            runs: Vec::new(),
            rates: Vec::new(),
            residuals: Vec::new(),
            r2_floor_ratio: None,
            spectrum: None,
            rage: None,
            timings: Timings::default(),
        }
    }

    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.status == RunStatus::Failed)
    }

    pub fn rate(&self, quantity: &str) -> Option<&RateRow> {
        self.rates.iter().find(|r| r.quantity == quantity)
    }
}

fn threads() -> usize {
    nsklim_core::exec::threads()
}

fn map_eps<T: Send>(eps: &[f64], f: impl Fn(f64) -> T + Send + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        eps.par_iter().map(|e| f(*e)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        eps.iter().map(|e| f(*e)).collect()
    }
}

/// Stored trajectory of a limit model at its own fixed step; intermediate
/// times are reached by one partial step from the preceding sample.
struct Track<S> {
    samples: Vec<S>,
    time: fn(&S) -> f64,
    step: fn(&S, f64) -> S,
}

impl<S: Clone> Track<S> {
    fn at(&self, t: f64) -> S {
        let i = self.samples.partition_point(|s| (self.time)(s) <= t + 1e-14).max(1) - 1;
        let s = &self.samples[i];
        let gap = t - (self.time)(s);
        if gap.abs() <= 1e-14 {
            s.clone()
        } else {
            (self.step)(s, gap)
        }
    }
}

fn euler_track(initial: &EulerState2D, t_end: f64, dt: f64) -> Track<EulerState2D> {
    let mut samples = Vec::new();
    euler2d_run(initial, t_end, dt, |s| samples.push(s.clone()));
    Track { samples, time: |s| s.time, step: euler2d_step }
}

fn qg_track(initial: &QgState, t_end: f64, dt: f64) -> Track<QgState> {
    let mut samples = Vec::new();
    qg_run(initial, t_end, dt, |s| samples.push(s.clone()));
    Track { samples, time: |s| s.time, step: qg_step }
}

fn push_rate(rates: &mut Vec<RateRow>, quantity: &str, points: &[(f64, f64)]) {
    match fit_rate(points) {
        Ok(f) => rates.push(RateRow { quantity: quantity.into(), slope: f.slope, intercept: f.intercept, residual: f.residual }),
        Err(e) => log::warn!("no rate for {quantity}: {e}"),
    }
}

/// Runs the configured experiment. Per-`ε` failures are recorded, not
/// returned.
pub fn run_experiment(config: &RunConfig) -> Result<SweepRecord, ConfigError> {
    config.validate()?;
    let start = Instant::now();
    let mut record = SweepRecord::empty(config);
    match config.experiment {
        Experiment::AlphaZeroRate => alpha_zero(config, &mut record)?,
        Experiment::AlphaOneLimit => alpha_one(config, &mut record)?,
        Experiment::ResidualScaling => residual_scaling(config, &mut record)?,
        Experiment::AcousticSpectrum => {
            let report = spectrum_report(config.spectrum.max_mode, config.grid.l_h);
            if report.max_diff > 1e-12 {
                log::warn!("closed form and eigensolver differ by {:e}", report.max_diff);
            }
            record.spectrum = Some(report);
        }
        Experiment::RageDecay => {
            let grid = config.grid.build()?;
            let r = &config.rage;
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            let x = AcousticField::random(grid, r.spectrum_decay, &mut rng);
            let region = r.subdomain_x3.map(|[lo, hi]| nsklim_core::diagnostics::Subdomain::cross_section(&grid, lo, hi));
            let curve = rage_decay(&x, r.cutoff, &r.taus, r.eps, region.as_ref());
            let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.tau, p.norm)).collect();
            push_rate(&mut record.rates, "rage_norm", &pts);
            record.rage = Some(curve);
        }
    }
    record.timings.threads = threads();
    record.timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

struct RunOutput {
    run: EpsRun,
    seconds: f64,
}

/// One NSK trajectory with a per-observation callback.
fn simulate(
    config: &RunConfig,
    grid: SlabGrid,
    eps: f64,
    mut measure: impl FnMut(&NskState, &mut EpsRun) -> Result<(), String>,
) -> RunOutput {
    let start = Instant::now();
    let mut run = EpsRun::new(eps);
    let outcome = (|| -> Result<RunSummary, String> {
        let params = config.model_params(eps).map_err(|e| e.to_string())?;
        let init = generate_initial(&config.initial_data, grid, eps).map_err(|e| e.to_string())?;
        let mut ic = config.integrator.clone();
        if let Some(dir) = &ic.checkpoint_dir {
            ic.checkpoint_dir = Some(dir.join(format!("eps_{eps}")));
            std::fs::create_dir_all(ic.checkpoint_dir.as_ref().unwrap()).map_err(|e| e.to_string())?;
        }
        let integ = Integrator::new(grid, params, ic).map_err(|e| e.to_string())?;
        let mut timeline = EnergyTimeline::new(params);
        let mut inner: Result<(), String> = Ok(());
        let result = integ.run(&init, |state, _| {
            if inner.is_err() {
                return;
            }
            inner = nsk_rhs(state, &params)
                .map_err(|e| e.to_string())
                .map(|r| timeline.push(state, &r))
                .and_then(|_| measure(state, &mut run));
        });
        inner?;
        let (_, summary) = result.map_err(|e| e.to_string())?;
        run.energy = Some(timeline.finish());
        Ok(summary)
    })();
    let run = match outcome {
        Ok(summary) => {
            run.solver = Some(summary);
            run
        }
        Err(msg) => run.fail(msg),
    };
    RunOutput { run, seconds: start.elapsed().as_secs_f64() }
}

fn collect(record: &mut SweepRecord, outputs: Vec<RunOutput>) {
    for o in outputs {
        record.timings.per_eps_seconds.push((o.run.eps, o.seconds));
        record.runs.push(o.run);
    }
}

fn residual_rows(config: &RunConfig, base: &EulerState2D, record: &mut SweepRecord) -> Result<(), ConfigError> {
    let t_end = config.integrator.t_end;
    let last = if t_end > 0.0 { euler_track(base, t_end, config.diagnostics.limit_dt).at(t_end) } else { base.clone() };
    let rates = time_derivatives(&last);
    let p = &config.params;
    let s = config.diagnostics.sobolev_order;
    for &eps in &config.eps_list {
        let [r1, r2, r3] = corrector_residuals(&last, &rates, eps, p.mu, p.lambda).norms(s);
        record.residuals.push(ResidualRow { eps, t: last.time, r1, r2, r3 });
    }
    let col = |f: fn(&ResidualRow) -> f64| record.residuals.iter().map(|r| (r.eps, f(r))).collect::<Vec<_>>();
    let (c1, c2, c3) = (col(|r| r.r1), col(|r| r.r2), col(|r| r.r3));
    push_rate(&mut record.rates, "r1", &c1);
    push_rate(&mut record.rates, "r2", &c2);
    push_rate(&mut record.rates, "r3", &c3);
    let eps: Vec<f64> = c2.iter().map(|p| p.0).collect();
    let norms: Vec<f64> = c2.iter().map(|p| p.1).collect();
    record.r2_floor_ratio = r2_floor_ratio(&eps, &norms);
    Ok(())
}

fn base_or_error(config: &RunConfig, grid: SlabGrid) -> Result<EulerState2D, ConfigError> {
    base_flow(&config.initial_data, grid).ok_or_else(|| {
        ConfigError::Invalid("this experiment needs well_prepared_geostrophic or taylor_green initial data".into())
    })
}

fn alpha_zero(config: &RunConfig, record: &mut SweepRecord) -> Result<(), ConfigError> {
    let grid = config.grid.build()?;
    let base = base_or_error(config, grid)?;
    let track = euler_track(&base, config.integrator.t_end, config.diagnostics.limit_dt);
    let s = config.diagnostics.sobolev_order;
    let outputs = map_eps(&config.eps_list, |eps| {
        simulate(config, grid, eps, |state, run| {
            let reference = corrector(&track.at(state.time), eps, &grid).map_err(|e| e.to_string())?;
            let rec = error_norms(state, &reference, s, eps).map_err(|e| e.to_string())?;
            if run.sup_error.is_none_or(|m| rec.total() > m.total()) {
                run.sup_error = Some(rec);
            }
            run.errors.push(rec);
            Ok(())
        })
    });
    collect(record, outputs);
    let ok: Vec<&ErrorRecord> = record.runs.iter().filter_map(|r| r.sup_error.as_ref()).collect();
    let series = |f: fn(&ErrorRecord) -> f64| ok.iter().map(|r| (r.eps, f(r))).collect::<Vec<_>>();
    push_rate(&mut record.rates, "e_total", &series(|r| r.total()));
    push_rate(&mut record.rates, "e_q", &series(|r| r.e_q));
    push_rate(&mut record.rates, "e_u", &series(|r| r.e_u));
    push_rate(&mut record.rates, "e_theta", &series(|r| r.e_theta));
    residual_rows(config, &base, record)
}

fn alpha_one(config: &RunConfig, record: &mut SweepRecord) -> Result<(), ConfigError> {
    let grid = config.grid.build()?;
    // the data do not depend on ε, so one limit solution serves the sweep
    let init = generate_initial(&config.initial_data, grid, config.eps_list[0])?;
    let sigma_data = &init.q + &init.theta;
    let sigma0 = solve_initial_sigma(&init.u, &sigma_data, SigmaSign::MinusConsistent)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let track = qg_track(&QgState { sigma: sigma0, time: 0.0 }, config.integrator.t_end, config.diagnostics.limit_dt);
    let region = config.subdomain(&grid);
    let outputs = map_eps(&config.eps_list, |eps| {
        let mut out = simulate(config, grid, eps, |state, run| {
            let value = compact_l2_error(&state.u, &track.at(state.time), &region).map_err(|e| e.to_string())?;
            run.compact.push(CompactSample { t: state.time, value });
            Ok(())
        });
        out.run.compact_l2 = time_l2(&out.run.compact);
        out
    });
    collect(record, outputs);
    let pts: Vec<(f64, f64)> = record.runs.iter().filter_map(|r| r.compact_l2.map(|v| (r.eps, v))).collect();
    push_rate(&mut record.rates, "compact_l2", &pts);
    Ok(())
}

/// `(∫ v² dt)^{1/2}` by the trapezoid rule; the instantaneous value when the
/// samples span no time.
fn time_l2(samples: &[CompactSample]) -> Option<f64> {
    let first = samples.first()?;
    if samples.len() == 1 {
        return Some(first.value);
    }
    let acc: f64 = samples.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].value.powi(2) + w[1].value.powi(2))).sum();
    Some(acc.sqrt())
}

fn residual_scaling(config: &RunConfig, record: &mut SweepRecord) -> Result<(), ConfigError> {
    let grid = config.grid.build()?;
    let base = base_or_error(config, grid)?;
    residual_rows(config, &base, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InitialData;

    fn small(experiment: Experiment) -> RunConfig {
        let mut c = RunConfig::new(experiment);
        c.grid.n_h = 16;
        c.grid.n_v = 4;
        c.eps_list = vec![0.4, 0.2, 0.1];
        c.integrator.t_end = 0.02;
        c.integrator.observe_every = 1;
        c
    }

    #[test]
    fn zero_horizon_records_initial_diagnostics_only() {
        let mut c = small(Experiment::AlphaZeroRate);
        c.eps_list = vec![0.3];
        c.integrator.t_end = 0.0;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.runs.len(), 1);
        let run = &r.runs[0];
        assert_eq!(run.status, RunStatus::Ok);
        assert_eq!(run.errors.len(), 1);
        assert_eq!(run.errors[0].t, 0.0);
        assert_eq!(run.energy.as_ref().unwrap().reports.len(), 1);
        assert_eq!(run.solver.as_ref().unwrap().steps, 0);
    }

    #[test]
    fn alpha_zero_small_sweep() {
        let r = run_experiment(&small(Experiment::AlphaZeroRate)).unwrap();
        assert!(!r.any_failed());
        assert!(r.rate("e_total").is_some());
        assert_eq!(r.residuals.len(), 3);
        assert!(r.r2_floor_ratio.is_some());
        for run in &r.runs {
            assert!(run.errors.len() >= 2);
            assert_eq!(run.errors[0].t, 0.0);
        }
    }

    #[test]
    fn alpha_one_small_sweep() {
        let mut c = small(Experiment::AlphaOneLimit);
        c.initial_data = InitialData::IllPreparedRandom { seed: 3, spectrum_decay: 4.0, amplitude: 0.3 };
        let r = run_experiment(&c).unwrap();
        assert!(!r.any_failed());
        assert!(r.runs.iter().all(|x| x.compact_l2.is_some() && !x.compact.is_empty()));
    }

    #[test]
    fn failures_are_isolated() {
        let mut c = small(Experiment::AlphaOneLimit);
        // large data at ε = 1 violate the density floor, smaller ε do not
        c.eps_list = vec![1.0, 0.05];
        c.initial_data = InitialData::IllPreparedRandom { seed: 3, spectrum_decay: 4.0, amplitude: 3.0 };
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.runs[0].status, RunStatus::Failed);
        assert!(r.runs[0].failure.as_ref().unwrap().contains("density"));
        assert_eq!(r.runs[1].status, RunStatus::Ok);
        assert!(r.any_failed());
    }

    #[test]
    fn limit_track_interpolates_by_partial_steps() {
        let g = SlabGrid::with_resolution(16, 4).unwrap();
        let base = EulerState2D::taylor_green(g);
        let track = euler_track(&base, 0.1, 0.02);
        assert_eq!(track.samples.len(), 6);
        let mid = track.at(0.03);
        assert!((mid.time - 0.03).abs() < 1e-15);
        assert_eq!(track.at(0.04), track.samples[2]);
    }

    #[test]
    fn time_l2_trapezoid() {
        let s = [CompactSample { t: 0.0, value: 1.0 }, CompactSample { t: 2.0, value: 1.0 }];
        assert!((time_l2(&s).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(time_l2(&s[..1]), Some(1.0));
        assert_eq!(time_l2(&[]), None);
    }
}
