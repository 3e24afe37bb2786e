//! Simulation configuration shared by the network model and the harness.

use crate::bayes::Estimator;
use crate::geometry::NodeId;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid `{param}`: {reason}")]
    Invalid { param: &'static str, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown scheme `{0}` (expected centralized, diffusion, bounding_box or hybrid)")]
    UnknownScheme(String),
}

fn invalid(param: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        param,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Default for Area {
    fn default() -> Self {
        Self {
            width: 100.0,
            height: 100.0,
        }
    }
}

/// How unknown nodes are scattered over the area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    Random,
    /// Regular lattice with each node displaced by up to a quarter spacing.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Centralized,
    Diffusion,
    BoundingBox,
    Hybrid,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Centralized,
        Scheme::Diffusion,
        Scheme::BoundingBox,
        Scheme::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Centralized => "centralized",
            Scheme::Diffusion => "diffusion",
            Scheme::BoundingBox => "bounding_box",
            Scheme::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| ConfigError::UnknownScheme(s.to_string()))
    }
}

/// Parses a comma separated scheme list such as `hybrid,bounding_box`.
pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>, ConfigError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Energy accounting. Units are arbitrary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyModel {
    pub initial: f64,
    pub tx_cost: f64,
    pub rx_cost: f64,
    pub threshold: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            initial: 1.0,
            tx_cost: 1e-3,
            rx_cost: 5e-4,
            threshold: 0.2,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold < self.initial) {
            return Err(invalid("energy.threshold", "must satisfy 0 < threshold < initial"));
        }
        if !(self.tx_cost > 0.0 && self.rx_cost > 0.0) {
            return Err(invalid("energy", "tx_cost and rx_cost must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub diffusion_iterations: usize,
    pub diffusion_convergence_eps: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            diffusion_iterations: 50,
            diffusion_convergence_eps: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureInjection {
    pub node: NodeId,
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub area: Area,
    /// Sinks plus unknown nodes.
    pub node_count: usize,
    pub sink_count: usize,
    pub comm_range: f64,
    pub placement: Placement,
    pub grid_resolution: f64,
    /// Ranging stdev as a fraction of `comm_range`.
    pub noise_fraction: f64,
    pub max_hops: usize,
    pub reps: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub estimator: Estimator,
    pub energy: EnergyModel,
    pub duty_cycle_fraction: f64,
    /// Mirror databases to backups every this many rounds.
    pub sync_every: u32,
    pub rounds: u32,
    pub failure_injections: Vec<FailureInjection>,
    pub baselines: BaselineConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            area: Area::default(),
            node_count: 85,
            sink_count: 9,
            comm_range: 30.0,
            placement: Placement::Random,
            grid_resolution: 2.0,
            noise_fraction: 0.05,
            max_hops: 3,
            reps: 20,
            seed: 42,
            schemes: Scheme::ALL.to_vec(),
            estimator: Estimator::Mean,
            energy: EnergyModel::default(),
            duty_cycle_fraction: 1.0,
            sync_every: 1,
            rounds: 10,
            failure_injections: Vec::new(),
            baselines: BaselineConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.area.width) || !positive(self.area.height) {
            return Err(invalid("area", "width and height must be positive"));
        }
        if self.sink_count < 1 {
            return Err(invalid("sink_count", "must be at least 1"));
        }
        if self.node_count < 1 {
            return Err(invalid("node_count", "must be at least 1"));
        }
        if self.sink_count > self.node_count {
            return Err(invalid(
                "sink_count",
                format!(
                    "{} sinks exceed node_count {}",
                    self.sink_count, self.node_count
                ),
            ));
        }
        if !positive(self.comm_range) {
            return Err(invalid("comm_range", "must be positive"));
        }
        if !positive(self.grid_resolution) {
            return Err(invalid("grid_resolution", "must be positive"));
        }
        if !(self.noise_fraction >= 0.0 && self.noise_fraction < 1.0) {
            return Err(invalid("noise_fraction", "must lie in [0, 1)"));
        }
        if self.max_hops < 1 {
            return Err(invalid("max_hops", "must be at least 1"));
        }
        if self.reps < 1 {
            return Err(invalid("reps", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "at least one scheme is required"));
        }
        if !(self.duty_cycle_fraction > 0.0 && self.duty_cycle_fraction <= 1.0) {
            return Err(invalid("duty_cycle_fraction", "must lie in (0, 1]"));
        }
        if self.sync_every < 1 {
            return Err(invalid("sync_every", "must be at least 1"));
        }
        if self.rounds < 1 {
            return Err(invalid("rounds", "must be at least 1"));
        }
        if self.baselines.diffusion_iterations < 1 {
            return Err(invalid("baselines.diffusion_iterations", "must be at least 1"));
        }
        if !(self.baselines.diffusion_convergence_eps > 0.0) {
            return Err(invalid("baselines.diffusion_convergence_eps", "must be positive"));
        }
        self.energy.validate()
    }

    pub fn unknown_count(&self) -> usize {
        self.node_count.saturating_sub(self.sink_count)
    }

    /// Ranging stdev applied to every hop measurement.
    pub fn ranging_sigma(&self) -> f64 {
        self.noise_fraction * self.comm_range
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
