//! Measured quantities: energy telemetry, error norms against a corrector,
//! compact-set convergence and log-log rate fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::{LimitError, QgState};
use crate::model::{nsk_rhs, ModelError, NskParams, NskState, Tendency};
use crate::spectral::{ScalarField, SlabGrid, SpectralError, VectorField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("subdomain {0}")]
    Subdomain(String),
    #[error("rate fit needs at least 3 usable points, got {usable}")]
    TooFewPoints { usable: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Limit(#[from] LimitError),
}

/// Growth factor above which a term is flagged.
pub const GROWTH_LIMIT: f64 = 10.0;
/// Smallest horizontal resolution at which `H⁴` terms are reported.
pub const H4_MIN_RESOLUTION: usize = 64;

pub mod term {
    pub const H2_STATE: &str = "h2_u_rho_epsq_epstheta";
    pub const H1_Q_THETA: &str = "h1_q_theta";
    pub const H1_EPS_RATES: &str = "h1_eps_rates";
    pub const L2_EPS2_SECOND_RATES: &str = "l2_eps2_second_rates";
    pub const H3_SCALED: &str = "h3_epsu_eps2q_eps2theta";
    pub const LINF_RHO: &str = "linf_rho_inv_rho";
    pub const INT_H2_Q_THETA: &str = "int_h2_q_theta";
    pub const INT_H3_SCALED: &str = "int_h3_epsq_epsu_epstheta";
    pub const INT_H2_EPS_RATES: &str = "int_h2_eps_rates";
    pub const INT_H1_U_TT: &str = "int_eps_h1_eps2_u_tt";
    pub const INT_H1_THETA_TT: &str = "int_h1_eps2_theta_tt";
    pub const INT_H4_U: &str = "int_eps_h4_eps2_u";
    pub const INT_H4_Q_THETA: &str = "int_h4_eps2q_eps2theta";
}

/// Terms of the weighted energy at one time. Supremum-type terms hold their
/// running maximum, integral terms their accumulated value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub time: f64,
    pub terms: BTreeMap<String, f64>,
    /// Terms built from finite differences in time.
    pub approximate: Vec<String>,
    /// Terms not computed, with the reason.
    pub omitted: BTreeMap<String, String>,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.terms.values().sum()
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn norm2(f: &ScalarField, s: u32) -> f64 {
    f.sobolev_norm_sq_unchecked(s)
}

fn vnorm2(u: &VectorField, s: u32) -> f64 {
    u.c.iter().map(|c| norm2(c, s)).sum()
}

/// Instantaneous terms that need no time history.
fn instantaneous(state: &NskState, params: &NskParams, rates: &Tendency) -> BTreeMap<String, f64> {
    let e = params.epsilon;
    let e2 = e * e;
    let mut t = BTreeMap::new();
    // ρ - 1 = εq carries the H² content of ρ
    let h2 = vnorm2(&state.u, 2) + 2.0 * e2 * norm2(&state.q, 2) + e2 * norm2(&state.theta, 2);
    t.insert(term::H2_STATE.into(), h2);
    t.insert(term::H1_Q_THETA.into(), norm2(&state.q, 1) + norm2(&state.theta, 1));
    let r1 = norm2(&rates.q, 1) + vnorm2(&rates.u, 1) + norm2(&rates.theta, 1);
    t.insert(term::H1_EPS_RATES.into(), e2 * r1);
    let h3 = e2 * vnorm2(&state.u, 3) + e2 * e2 * (norm2(&state.q, 3) + norm2(&state.theta, 3));
    t.insert(term::H3_SCALED.into(), h3);
    let q = state.q.to_physical();
    let (mut hi, mut lo) = (f64::MIN, f64::MAX);
    for v in &q {
        let r = 1.0 + e * v;
        hi = hi.max(r);
        lo = lo.min(r);
    }
    t.insert(term::LINF_RHO.into(), sq(hi.max(1.0 / lo)));
    t
}

struct Integrands {
    h2_q_theta: f64,
    h3: f64,
    h2_rates: f64,
    h4: Option<(f64, f64)>,
}

fn integrands(state: &NskState, params: &NskParams, rates: &Tendency) -> Integrands {
    let e = params.epsilon;
    let e2 = e * e;
    let h4 = (state.grid().n_h >= H4_MIN_RESOLUTION).then(|| {
        let u = e * sq(e2) * vnorm2(&state.u, 4);
        let qt = sq(e2) * (norm2(&state.q, 4) + norm2(&state.theta, 4));
        (u, qt)
    });
    Integrands {
        h2_q_theta: norm2(&state.q, 2) + norm2(&state.theta, 2),
        h3: e2 * (norm2(&state.q, 3) + vnorm2(&state.u, 3) + norm2(&state.theta, 3)),
        h2_rates: e2 * (norm2(&rates.q, 2) + vnorm2(&rates.u, 2) + norm2(&rates.theta, 2)),
        h4,
    }
}

/// Terms available from a single state and its rates. Second time
/// derivatives and time integrals need an [`EnergyTimeline`].
pub fn energy_functional(state: &NskState, params: &NskParams, rates: &Tendency) -> EnergyReport {
    let mut omitted = BTreeMap::new();
    for k in [term::L2_EPS2_SECOND_RATES, term::INT_H1_U_TT, term::INT_H1_THETA_TT] {
        omitted.insert(k.to_string(), "needs time history".to_string());
    }
    let mut terms = instantaneous(state, params, rates);
    for k in [term::INT_H2_Q_THETA, term::INT_H3_SCALED, term::INT_H2_EPS_RATES] {
        terms.insert(k.to_string(), 0.0);
    }
    add_h4_markers(state.grid(), &mut terms, &mut omitted);
    EnergyReport { time: state.time, terms, approximate: Vec::new(), omitted }
}

fn add_h4_markers(grid: &SlabGrid, terms: &mut BTreeMap<String, f64>, omitted: &mut BTreeMap<String, String>) {
    for k in [term::INT_H4_U, term::INT_H4_Q_THETA] {
        if grid.n_h >= H4_MIN_RESOLUTION {
            terms.insert(k.to_string(), 0.0);
        } else {
            omitted.insert(k.to_string(), format!("n_h < {H4_MIN_RESOLUTION}"));
        }
    }
}

/// Energy at `t = 0` from the data alone (rates evaluated internally).
pub fn initial_energy(state: &NskState, params: &NskParams) -> Result<EnergyReport, ModelError> {
    Ok(energy_functional(state, params, &nsk_rhs(state, params)?))
}

struct Sample {
    time: f64,
    inst: BTreeMap<String, f64>,
    integrand: Integrands,
    rates: Tendency,
}

/// Accumulates observer samples into a time series of [`EnergyReport`]s.
pub struct EnergyTimeline {
    params: NskParams,
    grid: Option<SlabGrid>,
    samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySeries {
    pub reports: Vec<EnergyReport>,
    /// Per term: largest value over the run divided by its first value (for
    /// integral terms the integrand is compared).
    pub growth: BTreeMap<String, f64>,
    /// Terms whose growth exceeds [`GROWTH_LIMIT`].
    pub flagged: Vec<String>,
}

impl EnergyTimeline {
    pub fn new(params: NskParams) -> Self {
        Self { params, grid: None, samples: Vec::new() }
    }

    pub fn push(&mut self, state: &NskState, rates: &Tendency) {
        self.grid = Some(*state.grid());
        self.samples.push(Sample {
            time: state.time,
            inst: instantaneous(state, &self.params, rates),
            integrand: integrands(state, &self.params, rates),
            rates: rates.clone(),
        });
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Second derivatives by centred differences of neighbouring rates;
    /// `None` at the ends of the series.
    fn second_rates(&self, i: usize) -> Option<Tendency> {
        if i == 0 || i + 1 >= self.samples.len() {
            return None;
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i + 1]);
        let h = b.time - a.time;
        if h <= 0.0 {
            return None;
        }
        let diff = |x: &ScalarField, y: &ScalarField| (y - x).scale(1.0 / h);
        Some(Tendency {
            q: diff(&a.rates.q, &b.rates.q),
            u: VectorField::new(
                diff(&a.rates.u.c[0], &b.rates.u.c[0]),
                diff(&a.rates.u.c[1], &b.rates.u.c[1]),
                diff(&a.rates.u.c[2], &b.rates.u.c[2]),
            ),
            theta: diff(&a.rates.theta, &b.rates.theta),
        })
    }

    pub fn finish(&self) -> EnergySeries {
        let e = self.params.epsilon;
        let e4 = e.powi(4);
        let n = self.samples.len();
        let tt: Vec<Option<[f64; 3]>> = (0..n)
            .map(|i| {
                self.second_rates(i).map(|r| {
                    let l2 = e4 * (norm2(&r.q, 0) + vnorm2(&r.u, 0) + norm2(&r.theta, 0));
                    let u1 = e * e4 * vnorm2(&r.u, 1);
                    let th1 = e4 * norm2(&r.theta, 1);
                    [l2, u1, th1]
                })
            })
            .collect();

        let mut reports = Vec::with_capacity(n);
        let mut running: BTreeMap<String, f64> = BTreeMap::new();
        let mut integral: BTreeMap<&str, f64> = BTreeMap::new();
        let mut growth_series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for i in 0..n {
            let s = &self.samples[i];
            let mut record = |k: &str, v: f64| growth_series.entry(k.to_string()).or_default().push(v);
            for (k, v) in &s.inst {
                let r = running.entry(k.clone()).or_insert(0.0);
                *r = r.max(*v);
                record(k, *v);
            }
            if let Some([l2, u1, th1]) = tt[i] {
                let r = running.entry(term::L2_EPS2_SECOND_RATES.into()).or_insert(0.0);
                *r = r.max(l2);
                record(term::L2_EPS2_SECOND_RATES, l2);
                record(term::INT_H1_U_TT, u1);
                record(term::INT_H1_THETA_TT, th1);
            }
            let cur = &s.integrand;
            record(term::INT_H2_Q_THETA, cur.h2_q_theta);
            record(term::INT_H3_SCALED, cur.h3);
            record(term::INT_H2_EPS_RATES, cur.h2_rates);
            if let Some((a, b)) = cur.h4 {
                record(term::INT_H4_U, a);
                record(term::INT_H4_Q_THETA, b);
            }
            if i > 0 {
                let p = &self.samples[i - 1];
                let h = 0.5 * (s.time - p.time);
                let prev = &p.integrand;
                let mut acc = |k: &'static str, a: f64, b: f64| *integral.entry(k).or_insert(0.0) += h * (a + b);
                acc(term::INT_H2_Q_THETA, prev.h2_q_theta, cur.h2_q_theta);
                acc(term::INT_H3_SCALED, prev.h3, cur.h3);
                acc(term::INT_H2_EPS_RATES, prev.h2_rates, cur.h2_rates);
                if let (Some((a0, b0)), Some((a1, b1))) = (prev.h4, cur.h4) {
                    acc(term::INT_H4_U, a0, a1);
                    acc(term::INT_H4_Q_THETA, b0, b1);
                }
                if let (Some(x), Some(y)) = (tt[i - 1], tt[i]) {
                    acc(term::INT_H1_U_TT, x[1], y[1]);
                    acc(term::INT_H1_THETA_TT, x[2], y[2]);
                }
            }

            let mut terms = running.clone();
            for k in [term::INT_H2_Q_THETA, term::INT_H3_SCALED, term::INT_H2_EPS_RATES] {
                terms.insert(k.to_string(), integral.get(k).copied().unwrap_or(0.0));
            }
            let mut omitted = BTreeMap::new();
            let mut approximate = Vec::new();
            for k in [term::L2_EPS2_SECOND_RATES, term::INT_H1_U_TT, term::INT_H1_THETA_TT] {
                let available = if k == term::L2_EPS2_SECOND_RATES { running.contains_key(k) } else { integral.contains_key(k) };
                if available {
                    let v = if k == term::L2_EPS2_SECOND_RATES { running[k] } else { integral[k] };
                    terms.insert(k.to_string(), v);
                    approximate.push(k.to_string());
                } else {
                    omitted.insert(k.to_string(), "needs neighbouring samples".to_string());
                }
            }
            if let Some(g) = &self.grid {
                add_h4_markers(g, &mut terms, &mut omitted);
                for k in [term::INT_H4_U, term::INT_H4_Q_THETA] {
                    if let Some(v) = integral.get(k) {
                        terms.insert(k.to_string(), *v);
                    }
                }
            }
            reports.push(EnergyReport { time: s.time, terms, approximate, omitted });
        }

        let mut growth = BTreeMap::new();
        let mut flagged = Vec::new();
        for (k, series) in growth_series {
            let g = growth_factor(&series);
            if g > GROWTH_LIMIT {
                flagged.push(k.clone());
            }
            growth.insert(k, g);
        }
        EnergySeries { reports, growth, flagged }
    }
}

/// `max/first`, with `0/0 = 1`.
pub fn growth_factor(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else { return 1.0 };
    let max = series.iter().copied().fold(first, f64::max);
    if max == 0.0 {
        1.0
    } else if first == 0.0 {
        f64::INFINITY
    } else {
        max / first
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub eps: f64,
    pub t: f64,
    pub e_q: f64,
    pub e_u: f64,
    pub e_theta: f64,
    pub s: u32,
}

impl ErrorRecord {
    pub fn total(&self) -> f64 {
        self.e_q + self.e_u + self.e_theta
    }
}

/// `‖q - q_c‖_{H^{s+1}}`, `‖u - u_c‖_{H^s}`, `‖θ - θ_c‖_{H^s}`.
pub fn error_norms(state: &NskState, reference: &NskState, s: u32, eps: f64) -> Result<ErrorRecord, DiagnosticsError> {
    state.grid().check_same(reference.grid())?;
    Ok(ErrorRecord {
        eps,
        t: state.time,
        e_q: (&state.q - &reference.q).sobolev_norm(s + 1)?,
        e_u: (&state.u - &reference.u).sobolev_norm(s)?,
        e_theta: (&state.theta - &reference.theta).sobolev_norm(s)?,
        s,
    })
}

/// Axis-aligned box; horizontal ranges are taken modulo the period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subdomain {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub x3: [f64; 2],
}

impl Subdomain {
    /// Whole horizontal cross-section over `x₃ ∈ (lo, hi)`.
    pub fn cross_section(grid: &SlabGrid, lo: f64, hi: f64) -> Self {
        let side = grid.side();
        Self { x1: [0.0, side], x2: [0.0, side], x3: [lo, hi] }
    }

    /// The box stays away from the walls `x₃ = 0, 1`.
    pub fn check_interior(&self) -> Result<(), DiagnosticsError> {
        let [lo, hi] = self.x3;
        if !(lo > 0.0 && hi < 1.0 && lo < hi) {
            return Err(DiagnosticsError::Subdomain(format!("x3 range ({lo}, {hi}) must lie strictly inside (0, 1)")));
        }
        if self.x1[0] >= self.x1[1] || self.x2[0] >= self.x2[1] {
            return Err(DiagnosticsError::Subdomain("empty horizontal range".into()));
        }
        Ok(())
    }

    fn inside_h(range: [f64; 2], x: f64, side: f64) -> bool {
        if range[1] - range[0] >= side {
            return true;
        }
        let t = (x - range[0]).rem_euclid(side);
        t <= range[1] - range[0]
    }

    pub fn contains(&self, grid: &SlabGrid, x1: f64, x2: f64, x3: f64) -> bool {
        let side = grid.side();
        Self::inside_h(self.x1, x1, side) && Self::inside_h(self.x2, x2, side) && x3 >= self.x3[0] && x3 <= self.x3[1]
    }

    /// `∫_K v²` by the midpoint rule on the collocation grid.
    pub fn integrate_sq(&self, grid: &SlabGrid, values: &[f64]) -> f64 {
        let n = grid.n_h;
        let cell = sq(grid.side() / n as f64) / grid.n_v as f64;
        let mut acc = 0.0;
        for j3 in 0..grid.n_v {
            let x3 = grid.x_v(j3);
            if x3 < self.x3[0] || x3 > self.x3[1] {
                continue;
            }
            for p1 in 0..n {
                for p2 in 0..n {
                    if self.contains(grid, grid.x_h(p1), grid.x_h(p2), x3) {
                        acc += sq(values[grid.physical_index(j3, p1, p2)]);
                    }
                }
            }
        }
        acc * cell
    }
}

/// `‖u - (∇^⊥σ, 0)‖_{L²(K)}`.
pub fn compact_l2_error(u: &VectorField, limit: &QgState, k: &Subdomain) -> Result<f64, DiagnosticsError> {
    k.check_interior()?;
    let grid = *u.grid();
    grid.check_same(limit.sigma.grid())?;
    let [a, b] = limit.sigma.perp_gradient();
    let diff = [&u.c[0] - &a.embed(&grid)?, &u.c[1] - &b.embed(&grid)?, u.c[2].clone()];
    let total: f64 = diff.iter().map(|f| k.integrate_sq(&grid, &f.to_physical())).sum();
    Ok(total.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Ordinary least squares of `ln(error)` against `ln(ε)`.
pub fn fit_rate(records: &[(f64, f64)]) -> Result<RateFit, DiagnosticsError> {
    let usable: Vec<(f64, f64)> = records
        .iter()
        .filter(|(e, v)| {
            let ok = *e > 0.0 && *v > 0.0 && v.is_finite() && e.is_finite();
            if !ok {
                log::warn!("excluding point (eps = {e}, error = {v}) from rate fit");
            }
            ok
        })
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    let n = usable.len();
    if n < 3 {
        return Err(DiagnosticsError::TooFewPoints { usable: n });
    }
    let nf = n as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = usable.iter().map(|p| sq(p.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(DiagnosticsError::TooFewPoints { usable: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (usable.iter().map(|p| sq(p.1 - intercept - slope * p.0)).sum::<f64>() / nf).sqrt();
    Ok(RateFit { slope, intercept, residual, used: n, excluded: records.len() - n })
}
