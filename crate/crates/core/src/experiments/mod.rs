//! Sweep harness: runs every requested scheme on the same simulated network
//! instance, scores estimates by range-normalized error, and writes CSV.

mod output;

pub use output::{format_g6, write_csv, CSV_HEADER};

use crate::baselines::{bounding_box, diffusion};
use crate::bayes::{BayesError, Localizer};
use crate::config::{ConfigError, Scheme, SimConfig};
use crate::geometry::{euclidean, NodeId, Point};
use crate::grid::{GridError, GridSpec};
use crate::mdsmap::localize_components;
use crate::network::{localize_hybrid, NetworkError, NetworkState, Simulation};
use crate::rng::RngSeed;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

/// Estimate-to-truth distance in units of the communication range.
pub fn localization_error(truth: Point, est: Point, cr: f64) -> f64 {
    euclidean(truth, est) / cr
}

/// Per-run counters reported in the `flags` column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub uncovered: usize,
    pub contradictions: usize,
    pub orphaned: usize,
    /// Nodes given a fallback estimate (empty log, no sink heard, no anchor).
    pub fallback: usize,
    pub error: Option<String>,
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in [
            ("uncovered", self.uncovered),
            ("contradictions", self.contradictions),
            ("orphaned", self.orphaned),
            ("fallback", self.fallback),
        ] {
            if v > 0 {
                parts.push(format!("{k}={v}"));
            }
        }
        if let Some(e) = &self.error {
            parts.push(format!("error={}", e.replace([',', '\n'], " ")));
        }
        f.write_str(&parts.join(";"))
    }
}

/// One scheme's result on one network instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub scheme: Scheme,
    pub param: String,
    pub value: f64,
    pub rep: usize,
    pub seed: u64,
    /// Normalized error per unknown node, in id order.
    pub per_node: Vec<f64>,
    pub mean_err_norm: f64,
    pub mean_err_m: f64,
    /// Population standard deviation of `per_node`.
    pub std_err_norm: f64,
    pub n_unknown: usize,
    pub n_sink: usize,
    pub comm_range: f64,
    pub flags: Flags,
}

impl ErrorRecord {
    fn score(
        scheme: Scheme,
        cfg: &SimConfig,
        network: &NetworkState,
        estimates: &BTreeMap<NodeId, Point>,
        flags: Flags,
    ) -> Self {
        let cr = cfg.comm_range;
        let ids = network.unknown_ids();
        let per_node: Vec<f64> = ids
            .iter()
            .map(|id| {
                let est = estimates.get(id).copied().unwrap_or(network.area_center());
                localization_error(network.position(*id), est, cr)
            })
            .collect();
        let n = per_node.len().max(1) as f64;
        let mean = per_node.iter().sum::<f64>() / n;
        let var = per_node.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        ErrorRecord {
            scheme,
            param: "none".into(),
            value: 0.0,
            rep: 0,
            seed: 0,
            n_unknown: per_node.len(),
            per_node,
            mean_err_norm: mean,
            mean_err_m: mean * cr,
            std_err_norm: var.sqrt(),
            n_sink: cfg.sink_count,
            comm_range: cr,
            flags,
        }
    }

    fn failed(scheme: Scheme, cfg: &SimConfig, err: &ExperimentError) -> Self {
        ErrorRecord {
            scheme,
            param: "none".into(),
            value: 0.0,
            rep: 0,
            seed: 0,
            per_node: Vec::new(),
            mean_err_norm: f64::NAN,
            mean_err_m: f64::NAN,
            std_err_norm: f64::NAN,
            n_unknown: cfg.unknown_count(),
            n_sink: cfg.sink_count,
            comm_range: cfg.comm_range,
            flags: Flags {
                error: Some(err.to_string()),
                ..Flags::default()
            },
        }
    }
}

/// Runs a scheme on a finished network snapshot.
pub fn run_scheme(
    scheme: Scheme,
    cfg: &SimConfig,
    network: &NetworkState,
    localizer: &mut Localizer,
) -> Result<ErrorRecord, ExperimentError> {
    let (estimates, flags) = match scheme {
        Scheme::Hybrid => {
            let spec = GridSpec::new(cfg.area.width, cfg.area.height, cfg.grid_resolution)?;
            let out = localize_hybrid(network, &spec, cfg.estimator, localizer)?;
            let flags = Flags {
                uncovered: out.uncovered,
                contradictions: out.contradictions,
                orphaned: out.orphaned,
                fallback: out.empty_logs,
                error: None,
            };
            (out.estimates, flags)
        }
        Scheme::Centralized => {
            let out = localize_components(network);
            let flags = Flags {
                fallback: out.unresolved.len() + out.translation_only.len(),
                ..Flags::default()
            };
            (out.estimates, flags)
        }
        Scheme::Diffusion => {
            let out = diffusion(network, &cfg.baselines);
            let flags = Flags {
                fallback: out.isolated.len(),
                ..Flags::default()
            };
            (out.estimates, flags)
        }
        Scheme::BoundingBox => {
            let out = bounding_box(network);
            let flags = Flags {
                fallback: out.flagged.len(),
                ..Flags::default()
            };
            (out.estimates, flags)
        }
    };
    Ok(ErrorRecord::score(scheme, cfg, network, &estimates, flags))
}

/// Simulates `cfg.rounds` rounds (including scheduled failures) and scores
/// every scheme in `cfg.schemes` on the resulting network.
pub fn run_once(cfg: &SimConfig, seed: RngSeed) -> Result<Vec<ErrorRecord>, ExperimentError> {
    cfg.validate()?;
    let mut sim = Simulation::new(cfg, seed)?;
    sim.run(cfg.rounds);
    let network = sim.network();
    let spec = GridSpec::new(cfg.area.width, cfg.area.height, cfg.grid_resolution)?;
    let mut localizer = Localizer::new(spec);
    cfg.schemes
        .iter()
        .map(|&s| {
            let mut r = run_scheme(s, cfg, network, &mut localizer)?;
            r.seed = seed.0;
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SinkCount,
    CommRange,
    NodeCount,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::SinkCount => "sink_count",
            SweepParam::CommRange => "comm_range",
            SweepParam::NodeCount => "node_count",
        }
    }
}

impl FromStr for SweepParam {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [SweepParam::SinkCount, SweepParam::CommRange, SweepParam::NodeCount]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ExperimentError::Sweep(format!("unknown swept parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Result<Self, ExperimentError> {
        if values.is_empty() {
            return Err(ExperimentError::Sweep("no values".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ExperimentError::Sweep("values must be strictly increasing".into()));
        }
        Ok(Self { param, values })
    }

    /// `fig4`, `fig5` or `fig6`.
    pub fn preset(name: &str) -> Result<Self, ExperimentError> {
        let v = |xs: &[u32]| xs.iter().map(|&x| x as f64).collect();
        match name {
            "fig4" => Self::new(SweepParam::SinkCount, v(&[4, 9, 16, 25, 30, 49, 100])),
            "fig5" => Self::new(SweepParam::CommRange, (2..=10).map(|i| i as f64 * 10.0).collect()),
            "fig6" => Self::new(SweepParam::NodeCount, v(&[50, 60, 70, 80, 90])),
            other => Err(ExperimentError::Sweep(format!("unknown preset `{other}`"))),
        }
    }

    /// `base` with the swept parameter set to `value`. Sink sweeps keep the
    /// number of unknown nodes fixed, so `node_count` grows with the sinks.
    pub fn apply(&self, base: &SimConfig, value: f64) -> SimConfig {
        let mut cfg = base.clone();
        match self.param {
            SweepParam::SinkCount => {
                cfg.sink_count = value as usize;
                cfg.node_count = base.unknown_count() + cfg.sink_count;
            }
            SweepParam::CommRange => cfg.comm_range = value,
            SweepParam::NodeCount => cfg.node_count = value as usize,
        }
        cfg
    }
}

/// Seed of repetition `rep`; shared by every sweep value so points are
/// compared on paired random streams.
pub fn rep_seed(base: u64, rep: usize) -> RngSeed {
    RngSeed(base).substream(rep as u64)
}

/// Every value × rep × scheme, in that order. Failed runs become rows with
/// NaN errors and an `error=` flag.
pub fn run_sweep(base: &SimConfig, sweep: &SweepSpec) -> Result<Vec<ErrorRecord>, ExperimentError> {
    base.validate()?;
    let mut rows = Vec::with_capacity(sweep.values.len() * base.reps * base.schemes.len());
    for &value in &sweep.values {
        let cfg = sweep.apply(base, value);
        for rep in 0..base.reps {
            let seed = rep_seed(base.seed, rep);
            let records = run_once(&cfg, seed).unwrap_or_else(|e| {
                cfg.schemes.iter().map(|&s| ErrorRecord::failed(s, &cfg, &e)).collect()
            });
            rows.extend(records.into_iter().map(|mut r| {
                r.param = sweep.param.name().into();
                r.value = value;
                r.rep = rep;
                r.seed = seed.0;
                r
            }));
        }
    }
    Ok(rows)
}

/// `cfg.reps` repetitions of a single configuration.
pub fn run_reps(cfg: &SimConfig) -> Result<Vec<ErrorRecord>, ExperimentError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for rep in 0..cfg.reps {
        let seed = rep_seed(cfg.seed, rep);
        for mut r in run_once(cfg, seed)? {
            r.rep = rep;
            rows.push(r);
        }
    }
    Ok(rows)
}

/// Mean of `mean_err_norm` over reps, per (scheme, value), in sweep order.
pub fn summarize(rows: &[ErrorRecord]) -> BTreeMap<Scheme, Vec<(f64, f64)>> {
    let mut acc: BTreeMap<Scheme, Vec<(f64, f64, usize)>> = BTreeMap::new();
    for r in rows {
        let series = acc.entry(r.scheme).or_default();
        match series.iter_mut().find(|(v, _, _)| *v == r.value) {
            Some(slot) => {
                slot.1 += r.mean_err_norm;
                slot.2 += 1;
            }
            None => series.push((r.value, r.mean_err_norm, 1)),
        }
    }
    acc.into_iter()
        .map(|(s, v)| (s, v.into_iter().map(|(x, sum, n)| (x, sum / n as f64)).collect()))
        .collect()
}
