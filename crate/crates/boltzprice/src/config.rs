//! Experiment configuration files (TOML) with strict schema validation.
//!
//! A file declares exactly one experiment section — `[sde]`,
//! `[sampling_const_spread]`, `[sampling_varying_spread]`, `[impact]`, or
//! `[toy_microprice]` — plus a seed and a run count. Unknown keys are
//! rejected. Command-line flags override file values.

use boltzprice_core::dynamics::{ModelKind, SimConfig, SpreadModel};
use boltzprice_core::microprice::ToyModelConfig;
use boltzprice_core::stochastics::{DistributionSpec, RngSpec};
use serde::Deserialize;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Toml(toml::de::Error),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "config io error: {e}"),
            ConfigError::Toml(e) => write!(f, "config parse error: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistConfig {
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, scale: f64 },
    Constant { value: f64 },
    Normal { mean: f64, std_dev: f64 },
}

impl DistConfig {
    fn to_spec(&self) -> Result<DistributionSpec, ConfigError> {
        let spec = match *self {
            DistConfig::Beta { alpha, beta } => DistributionSpec::Beta { alpha, beta },
            DistConfig::Gamma { shape, scale } => DistributionSpec::Gamma { shape, scale },
            DistConfig::Constant { value } => DistributionSpec::Constant { value },
            DistConfig::Normal { mean, std_dev } => DistributionSpec::Normal { mean, std_dev },
        };
        spec.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadConfig {
    pub dist: DistConfig,
    pub tick: Option<f64>,
}

impl SpreadConfig {
    fn to_model(&self) -> Result<SpreadModel, ConfigError> {
        Ok(SpreadModel {
            dist: self.dist.to_spec()?,
            tick: self.tick,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub initial_price: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub mu: f64,
    pub imbalance: Option<DistConfig>,
    pub spread: Option<SpreadConfig>,
}

impl ModelConfig {
    pub fn to_sim_config(
        &self,
        steps: usize,
        dt: Option<f64>,
        rng: RngSpec,
    ) -> Result<SimConfig, ConfigError> {
        let imbalance_model = match &self.imbalance {
            Some(d) => d.to_spec()?,
            None => DistributionSpec::Constant { value: 0.5 },
        };
        let spread_model = self.spread.as_ref().map(|s| s.to_model()).transpose()?;
        let cfg = SimConfig {
            model_kind: self.kind,
            initial_price: self.initial_price,
            beta: self.beta,
            sigma: self.sigma,
            eta: self.eta,
            mu: self.mu,
            steps,
            dt,
            imbalance_model,
            spread_model,
            rng,
        };
        cfg.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeSection {
    pub steps: usize,
    pub dt: Option<f64>,
    pub model: ModelConfig,
    /// Optional second model simulated on the same noise.
    pub paired: Option<ModelConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConstSpreadSection {
    pub n: usize,
    pub beta: f64,
    pub eta: f64,
    pub mu_tilde: f64,
    pub sigma_tilde: f64,
    pub imbalance: DistConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingVaryingSpreadSection {
    pub n: usize,
    pub beta: f64,
    pub eta: f64,
    pub imbalance: DistConfig,
    pub spread: SpreadConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactSection {
    pub spread: f64,
    pub beta: f64,
    #[serde(default = "default_theta_min")]
    pub theta_min: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_theta_min() -> f64 {
    -0.5
}

fn default_theta_max() -> f64 {
    0.5
}

fn default_grid_points() -> usize {
    101
}

impl ImpactSection {
    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        let bounds_ok = self.theta_min.is_finite()
            && self.theta_max.is_finite()
            && self.theta_min < self.theta_max;
        if self.grid_points < 2 || !bounds_ok {
            return Err(ConfigError::Invalid(format!(
                "impact grid needs at least 2 points and theta_min < theta_max, got {} points on [{}, {}]",
                self.grid_points, self.theta_min, self.theta_max
            )));
        }
        let n = self.grid_points;
        Ok((0..n)
            .map(|i| {
                self.theta_min + (self.theta_max - self.theta_min) * i as f64 / (n - 1) as f64
            })
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyMicropriceSection {
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tick")]
    pub tick: f64,
    #[serde(default = "default_events")]
    pub events: usize,
    #[serde(default = "default_buckets")]
    pub buckets: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn default_epsilon() -> f64 {
    0.49
}

fn default_tick() -> f64 {
    0.01
}

fn default_events() -> usize {
    200_000
}

fn default_buckets() -> usize {
    10
}

fn default_iterations() -> usize {
    6
}

impl ToyMicropriceSection {
    pub fn to_toy_config(&self, rng: RngSpec) -> ToyModelConfig {
        ToyModelConfig {
            alpha: self.alpha,
            epsilon_perturb: self.epsilon,
            tick: self.tick,
            events: self.events,
            rng,
        }
    }
}

/// Top-level experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub sde: Option<SdeSection>,
    pub sampling_const_spread: Option<SamplingConstSpreadSection>,
    pub sampling_varying_spread: Option<SamplingVaryingSpreadSection>,
    pub impact: Option<ImpactSection>,
    pub toy_microprice: Option<ToyMicropriceSection>,
}

fn default_runs() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(ConfigError::Toml)?;
        config.check_sections()?;
        Ok(config)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_toml(&text)
    }

    fn check_sections(&self) -> Result<(), ConfigError> {
        let sections = [
            self.sde.is_some(),
            self.sampling_const_spread.is_some(),
            self.sampling_varying_spread.is_some(),
            self.impact.is_some(),
            self.toy_microprice.is_some(),
        ];
        let count = sections.iter().filter(|&&s| s).count();
        if count != 1 {
            return Err(ConfigError::Invalid(format!(
                "exactly one experiment section required, found {count}"
            )));
        }
        if self.runs == 0 {
            return Err(ConfigError::Invalid("runs must be >= 1".to_string()));
        }
        Ok(())
    }

    pub fn rng(&self) -> RngSpec {
        RngSpec::new(self.seed, 0)
    }
}
