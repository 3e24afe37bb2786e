//! Grid-based Bayesian constraint processing.
//!
//! Every unknown node keeps a log of beacon rows. A row is a beacon position
//! followed by one `(mean, stdev)` range measurement per hop from the beacon
//! to the node. The first hop yields a Gaussian ring around the beacon; each
//! further hop marginalizes the previous constraint through another distance
//! kernel. The resulting constraint is multiplied into the running position
//! estimate and renormalized.

mod convolve;

pub use convolve::{ConvolutionMethod, DistanceConvolver};

use crate::geometry::{euclidean, Point};
use crate::grid::{Constraint, GridError, GridEstimate, GridSpec};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("invalid range measurement (mean {mean}, stdev {stdev})")]
    InvalidMeasurement { mean: f64, stdev: f64 },
    #[error("beacon row has no hops")]
    EmptyRow,
    #[error("constraint is identically zero")]
    DegenerateConstraint,
    #[error("constraint is incompatible with the current estimate")]
    Contradiction,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A Gaussian distance measurement for one hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeMeasurement {
    pub mean: f64,
    pub stdev: f64,
}

impl RangeMeasurement {
    pub fn new(mean: f64, stdev: f64) -> Result<Self, BayesError> {
        let m = Self { mean, stdev };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), BayesError> {
        if self.mean.is_finite() && self.mean >= 0.0 && self.stdev.is_finite() && self.stdev > 0.0
        {
            Ok(())
        } else {
            Err(BayesError::InvalidMeasurement {
                mean: self.mean,
                stdev: self.stdev,
            })
        }
    }

    /// Normal density of `distance` under this measurement.
    pub fn density(&self, distance: f64) -> f64 {
        gauss(distance, self.mean, self.stdev)
    }
}

/// One-dimensional normal density.
pub fn gauss(x: f64, mean: f64, stdev: f64) -> f64 {
    let z = (x - mean) / stdev;
    (-0.5 * z * z).exp() / (stdev * (2.0 * PI).sqrt())
}

/// One row of an unknown node's log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconLogRow {
    pub beacon_position: Point,
    /// Hop measurements in path order, beacon first. One hop means the node
    /// heard the beacon directly.
    pub hops: Vec<RangeMeasurement>,
}

impl BeaconLogRow {
    pub fn direct(beacon_position: Point, m: RangeMeasurement) -> Self {
        Self {
            beacon_position,
            hops: vec![m],
        }
    }

    pub fn validate(&self) -> Result<(), BayesError> {
        if self.hops.is_empty() {
            return Err(BayesError::EmptyRow);
        }
        self.hops.iter().try_for_each(|m| m.validate())
    }

    fn prefix_key(&self, len: usize) -> Vec<u64> {
        let mut key = Vec::with_capacity(2 + 2 * len);
        key.push(self.beacon_position.x.to_bits());
        key.push(self.beacon_position.y.to_bits());
        for m in &self.hops[..len] {
            key.push(m.mean.to_bits());
            key.push(m.stdev.to_bits());
        }
        key
    }
}

/// Gaussian ring around `beacon`: each cell holds the density of its center's
/// distance to the beacon.
pub fn direct_constraint(
    spec: &GridSpec,
    beacon: Point,
    m: RangeMeasurement,
) -> Result<Constraint, BayesError> {
    m.validate()?;
    let cells = spec
        .centers()
        .map(|p| m.density(euclidean(p, beacon)))
        .collect();
    Constraint::new(*spec, cells).map_err(|e| match e {
        GridError::ZeroMass => BayesError::DegenerateConstraint,
        e => e.into(),
    })
}

/// Pushes `prev` through one more hop:
/// `out(p) = sum_q prev_n(q) * gauss(d(p, q); m) * cell_area`, where `prev_n`
/// is `prev` scaled to unit mass.
pub fn cascade(
    spec: &GridSpec,
    prev: &Constraint,
    m: RangeMeasurement,
) -> Result<Constraint, BayesError> {
    cascade_with(&DistanceConvolver::new(*spec), prev, m, ConvolutionMethod::Auto)
}

pub fn cascade_with(
    conv: &DistanceConvolver,
    prev: &Constraint,
    m: RangeMeasurement,
    method: ConvolutionMethod,
) -> Result<Constraint, BayesError> {
    m.validate()?;
    let spec = conv.spec();
    if prev.spec() != spec {
        return Err(GridError::SpecMismatch.into());
    }
    let total: f64 = prev.cells().iter().sum();
    if !(total > 0.0) {
        return Err(BayesError::DegenerateConstraint);
    }
    // Unit mass means dividing by total * cell_area; the kernel sum carries
    // another cell_area, so the two cancel.
    let weights: Vec<f64> = prev.cells().iter().map(|v| v / total).collect();
    let cells = conv.convolve(&weights, |d| m.density(d), method);
    Constraint::new(*spec, cells).map_err(|e| match e {
        GridError::ZeroMass => BayesError::DegenerateConstraint,
        e => e.into(),
    })
}

/// Bayesian update: pointwise product renormalized to unit mass.
pub fn intersect(prior: &GridEstimate, c: &Constraint) -> Result<GridEstimate, BayesError> {
    if prior.spec() != c.spec() {
        return Err(GridError::SpecMismatch.into());
    }
    let cells = prior
        .cells()
        .iter()
        .zip(c.cells())
        .map(|(p, l)| p * l)
        .collect();
    GridEstimate::from_unnormalized(*prior.spec(), cells).map_err(|e| match e {
        GridError::ZeroMass => BayesError::Contradiction,
        e => e.into(),
    })
}

/// Starting estimate: every position equally likely.
pub fn uniform_prior(spec: &GridSpec) -> GridEstimate {
    GridEstimate::uniform(*spec)
}

/// How a posterior is reduced to a single position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Mean,
    Argmax,
}

/// Mean of the distribution.
pub fn point_estimate(p: &GridEstimate) -> Point {
    let spec = p.spec();
    let area = spec.cell_area();
    let (mut x, mut y) = (0.0, 0.0);
    for (c, &d) in spec.centers().zip(p.cells()) {
        let w = d * area;
        x += c.x * w;
        y += c.y * w;
    }
    Point::new(x, y)
}

pub fn reduce(p: &GridEstimate, estimator: Estimator) -> Point {
    match estimator {
        Estimator::Mean => point_estimate(p),
        Estimator::Argmax => {
            let (r, c) = p.argmax();
            p.spec().center_unchecked(r, c)
        }
    }
}

/// Fold state while consuming one row's hops.
#[derive(Debug, Clone, Default)]
pub enum CascadeState {
    #[default]
    Null,
    Partial {
        current: Constraint,
        hops_consumed: usize,
    },
}

impl CascadeState {
    pub fn push(
        self,
        conv: &DistanceConvolver,
        beacon: Point,
        m: RangeMeasurement,
    ) -> Result<Self, BayesError> {
        let (current, hops_consumed) = match self {
            CascadeState::Null => (direct_constraint(conv.spec(), beacon, m)?, 1),
            CascadeState::Partial {
                current,
                hops_consumed,
            } => (
                cascade_with(conv, &current, m, ConvolutionMethod::Auto)?,
                hops_consumed + 1,
            ),
        };
        Ok(CascadeState::Partial {
            current,
            hops_consumed,
        })
    }

    pub fn into_constraint(self) -> Option<Constraint> {
        match self {
            CascadeState::Null => None,
            CascadeState::Partial { current, .. } => Some(current),
        }
    }
}

/// Result of processing a full log.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub estimate: GridEstimate,
    /// Rows dropped because they contradicted the estimate or were degenerate.
    pub skipped_rows: usize,
}

/// Runs every row of a log against a uniform prior. Rows whose constraint
/// annihilates the estimate are skipped and counted.
pub fn process_log(spec: &GridSpec, rows: &[BeaconLogRow]) -> Result<Posterior, BayesError> {
    Localizer::new(*spec).process_log(rows)
}

/// Reusable processing context. Holds FFT plans and memoizes multi-hop
/// constraints by their exact row prefix, so rows that share a relay path
/// reuse the same cascade. Results are bit-identical to [`process_log`].
#[derive(Debug)]
pub struct Localizer {
    conv: DistanceConvolver,
    cache: HashMap<Vec<u64>, Arc<Constraint>>,
    cache_cap: usize,
    cascades: usize,
}

/// Default bound on cached constraints, in grid cells.
const CACHE_CELLS: usize = 1 << 24;

impl Localizer {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            conv: DistanceConvolver::new(spec),
            cache: HashMap::new(),
            cache_cap: (CACHE_CELLS / spec.n_cells().max(1)).max(1),
            cascades: 0,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.conv.spec()
    }

    /// Number of cascade convolutions actually evaluated.
    pub fn cascades_computed(&self) -> usize {
        self.cascades
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }

    /// Constraint of a full row.
    pub fn row_constraint(&mut self, row: &BeaconLogRow) -> Result<Arc<Constraint>, BayesError> {
        row.validate()?;
        // Longest cached multi-hop prefix, if any.
        let mut start = 0;
        let mut state = CascadeState::Null;
        for len in (2..=row.hops.len()).rev() {
            if let Some(c) = self.cache.get(&row.prefix_key(len)) {
                state = CascadeState::Partial {
                    current: (**c).clone(),
                    hops_consumed: len,
                };
                start = len;
                break;
            }
        }
        if start == row.hops.len() {
            if let CascadeState::Partial { current, .. } = state {
                return Ok(Arc::new(current));
            }
        }
        for (i, m) in row.hops.iter().enumerate().skip(start) {
            state = state.push(&self.conv, row.beacon_position, *m)?;
            if i >= 1 {
                self.cascades += 1;
                if let CascadeState::Partial { current, .. } = &state {
                    if self.cache.len() >= self.cache_cap {
                        self.cache.clear();
                    }
                    self.cache
                        .insert(row.prefix_key(i + 1), Arc::new(current.clone()));
                }
            }
        }
        state
            .into_constraint()
            .map(Arc::new)
            .ok_or(BayesError::EmptyRow)
    }

    pub fn process_log(&mut self, rows: &[BeaconLogRow]) -> Result<Posterior, BayesError> {
        let mut estimate = uniform_prior(self.spec());
        let mut skipped_rows = 0;
        for row in rows {
            let c = match self.row_constraint(row) {
                Ok(c) => c,
                Err(BayesError::DegenerateConstraint) => {
                    skipped_rows += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            match intersect(&estimate, &c) {
                Ok(next) => estimate = next,
                Err(BayesError::Contradiction) => skipped_rows += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(Posterior {
            estimate,
            skipped_rows,
        })
    }
}

#[cfg(test)]
mod tests;
