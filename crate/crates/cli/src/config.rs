//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use nsklim_core::diagnostics::Subdomain;
use nsklim_core::integrator::IntegratorConfig;
use nsklim_core::model::{Alpha, NskParams};
use nsklim_core::spectral::SlabGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    AlphaOneLimit,
    AlphaZeroRate,
    AcousticSpectrum,
    RageDecay,
    ResidualScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_h: usize,
    pub n_v: usize,
    pub l_h: f64,
    pub dealias_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_h: 32, n_v: 8, l_h: 1.0, dealias_fraction: 2.0 / 3.0 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<SlabGrid, ConfigError> {
        SlabGrid::new(self.n_h, self.n_v, self.l_h, self.dealias_fraction).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

/// Physical parameters except `ε`, which comes from the sweep list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    /// Capillarity regime, 0 or 1; defaults by experiment.
    pub alpha: Option<u8>,
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub gas_constant: f64,
    pub heat_capacity: f64,
    /// Coriolis multiplier (1 is the physical system).
    pub rotation: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { alpha: None, mu: 1.0, nu: 0.0, lambda: 1.0, kappa: 1.0, gas_constant: 1.0, heat_capacity: 1.0, rotation: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    IllPreparedRandom {
        seed: u64,
        spectrum_decay: f64,
        /// Largest pointwise value of each generated field.
        #[serde(default = "default_ill_amplitude")]
        amplitude: f64,
    },
    WellPreparedGeostrophic {
        seed: u64,
        #[serde(default = "default_decay")]
        spectrum_decay: f64,
        /// Largest pointwise speed of the base flow.
        #[serde(default = "default_one")]
        amplitude: f64,
        /// Largest pointwise value of the O(ε) velocity perturbation before
        /// scaling by ε.
        #[serde(default = "default_one")]
        perturbation: f64,
    },
    TaylorGreen,
    FromCheckpoint {
        path: PathBuf,
    },
}

fn default_ill_amplitude() -> f64 {
    0.5
}

fn default_decay() -> f64 {
    4.0
}

fn default_one() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::WellPreparedGeostrophic { seed: 1, spectrum_decay: 4.0, amplitude: 1.0, perturbation: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Surrogate Sobolev order of the error norms.
    pub sobolev_order: u32,
    /// Vertical extent of the compact set; the horizontal extent is the full
    /// period.
    pub subdomain_x3: [f64; 2],
    /// Fixed step of the reference limit solvers.
    pub limit_dt: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { sobolev_order: 2, subdomain_x3: [0.25, 0.75], limit_dt: 0.005 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RageConfig {
    pub eps: f64,
    pub cutoff: f64,
    pub taus: Vec<f64>,
    pub seed: u64,
    pub spectrum_decay: f64,
    /// Optional vertical window `χ` for a localized norm.
    pub subdomain_x3: Option<[f64; 2]>,
}

impl Default for RageConfig {
    fn default() -> Self {
        Self { eps: 0.1, cutoff: 4.0, taus: vec![1.0, 2.0, 4.0, 8.0], seed: 3, spectrum_decay: 2.0, subdomain_x3: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub max_mode: i64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { max_mode: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub rage: RageConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
}

fn default_eps_list() -> Vec<f64> {
    vec![0.4, 0.2, 0.1, 0.05]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("nsklim_out")
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            eps_list: default_eps_list(),
            output_dir: default_output_dir(),
            grid: GridConfig::default(),
            params: ParamsConfig::default(),
            integrator: IntegratorConfig::default(),
            initial_data: InitialData::default(),
            diagnostics: DiagnosticsConfig::default(),
            rage: RageConfig::default(),
            spectrum: SpectrumConfig::default(),
        }
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read { path: path.to_path_buf(), source: e })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("configuration serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn alpha(&self) -> Alpha {
        match self.params.alpha {
            Some(0) => Alpha::Zero,
            Some(_) => Alpha::One,
            None => match self.experiment {
                Experiment::AlphaZeroRate | Experiment::ResidualScaling => Alpha::Zero,
                _ => Alpha::One,
            },
        }
    }

    pub fn model_params(&self, eps: f64) -> Result<NskParams, ConfigError> {
        let p = &self.params;
        let mut out = NskParams::new(eps, self.alpha())
            .and_then(|x| x.with_transport(p.mu, p.nu, p.lambda, p.kappa))
            .and_then(|x| x.with_gas(p.gas_constant, p.heat_capacity))
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        out.rotation = p.rotation;
        out.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(out)
    }

    pub fn subdomain(&self, grid: &SlabGrid) -> Subdomain {
        let [lo, hi] = self.diagnostics.subdomain_x3;
        Subdomain::cross_section(grid, lo, hi)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid.build()?;
        if self.eps_list.is_empty() {
            return invalid("eps_list must not be empty");
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return invalid("every eps must lie in (0, 1]");
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return invalid("eps_list must be strictly decreasing");
        }
        if let Some(a) = self.params.alpha {
            if a > 1 {
                return invalid("params.alpha must be 0 or 1");
            }
        }
        for e in &self.eps_list {
            self.model_params(*e)?;
        }
        self.integrator.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        match &self.initial_data {
            InitialData::IllPreparedRandom { spectrum_decay, amplitude, .. } => {
                if !(*spectrum_decay >= 2.0) {
                    return invalid("spectrum_decay below 2 gives data too rough for H^3 control");
                }
                if !(*amplitude > 0.0) {
                    return invalid("amplitude must be positive");
                }
            }
            InitialData::WellPreparedGeostrophic { spectrum_decay, amplitude, perturbation, .. } => {
                if !(*spectrum_decay >= 2.0) {
                    return invalid("spectrum_decay below 2 gives data too rough for H^3 control");
                }
                if !(*amplitude > 0.0 && *perturbation >= 0.0) {
                    return invalid("amplitude must be positive and perturbation nonnegative");
                }
            }
            InitialData::TaylorGreen | InitialData::FromCheckpoint { .. } => {}
        }
        let d = &self.diagnostics;
        if d.sobolev_order + 1 > nsklim_core::spectral::MAX_SOBOLEV_ORDER {
            return invalid("diagnostics.sobolev_order too large");
        }
        self.subdomain(&grid).check_interior().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(d.limit_dt > 0.0 && d.limit_dt.is_finite()) {
            return invalid("diagnostics.limit_dt must be positive");
        }
        let r = &self.rage;
        if !(r.eps > 0.0 && r.eps <= 1.0) {
            return invalid("rage.eps must lie in (0, 1]");
        }
        if !(r.cutoff >= 0.0) {
            return invalid("rage.cutoff must be nonnegative");
        }
        if r.taus.is_empty() || r.taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return invalid("rage.taus must be positive");
        }
        if !(r.spectrum_decay >= 0.0) {
            return invalid("rage.spectrum_decay must be nonnegative");
        }
        if self.spectrum.max_mode < 0 {
            return invalid("spectrum.max_mode must be nonnegative");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse("experiment = \"alpha_zero_rate\"").unwrap();
        assert_eq!(c.eps_list, vec![0.4, 0.2, 0.1, 0.05]);
        assert_eq!(c.integrator.t_end, 0.5);
        assert_eq!(c.integrator.observe_every, 10);
        assert_eq!(c.alpha(), Alpha::Zero);
    }

    #[test]
    fn dotted_sections() {
        let c = parse(
            "experiment = \"alpha_one_limit\"\neps_list = [0.5, 0.25]\ngrid.n_h = 16\nintegrator.scheme = \"IFRK2\"\n\
             [initial_data]\nkind = \"ill_prepared_random\"\nseed = 9\nspectrum_decay = 4.0\n",
        )
        .unwrap();
        assert_eq!(c.grid.n_h, 16);
        assert_eq!(c.alpha(), Alpha::One);
        assert!(matches!(c.initial_data, InitialData::IllPreparedRandom { seed: 9, .. }));
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            "experiment = \"nope\"",
            "experiment = \"alpha_zero_rate\"\neps_list = []",
            "experiment = \"alpha_zero_rate\"\neps_list = [0.1, 0.2]",
            "experiment = \"alpha_zero_rate\"\neps_list = [1.5]",
            "experiment = \"alpha_zero_rate\"\nunknown = 1",
            "experiment = \"alpha_zero_rate\"\ngrid.n_h = 12",
            "experiment = \"alpha_zero_rate\"\n[initial_data]\nkind = \"ill_prepared_random\"\nseed = 1\nspectrum_decay = 1.5",
            "experiment = \"alpha_zero_rate\"\ndiagnostics.subdomain_x3 = [0.0, 0.5]",
        ];
        for text in bad {
            assert!(parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn round_trip_and_hash() {
        let c = RunConfig::new(Experiment::RageDecay);
        let back = parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.rage.eps = 0.2;
        assert_ne!(d.hash(), c.hash());
    }
}
