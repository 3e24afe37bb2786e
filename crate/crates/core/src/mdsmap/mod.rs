//! Centralized MDS-MAP: shortest-path completion of measured ranges,
//! classical scaling to a relative map, and a least-squares rigid fit of that
//! map onto anchors of known position.

mod eigen;

pub use eigen::symmetric_eigen;

use crate::geometry::{centroid, NodeId, Point};
use crate::network::{NetworkState, NodeRole, SubRegion};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdsError {
    #[error("invalid distance {value} between entries {i} and {j}")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("measurement graph is disconnected: components {components:?}")]
    Disconnected { components: Vec<Vec<NodeId>> },
    #[error("distance matrix has missing entries")]
    Incomplete,
    #[error("degenerate geometry: fewer than two positive eigenvalues")]
    DegenerateGeometry,
    #[error("no anchors present in the map")]
    NoAnchors,
    #[error("anchors are collinear; reflection is ambiguous")]
    CollinearAnchors,
}

/// Symmetric matrix of pairwise distances; `None` marks an unmeasured pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<NodeId>,
    entries: Vec<Option<f64>>,
}

impl DistanceMatrix {
    /// All pairs missing except the zero diagonal.
    pub fn new(ids: Vec<NodeId>) -> Self {
        let n = ids.len();
        let mut entries = vec![None; n * n];
        for i in 0..n {
            entries[i * n + i] = Some(0.0);
        }
        Self { ids, entries }
    }

    /// Ids `0..n`.
    pub fn with_len(n: usize) -> Self {
        Self::new((0..n as u32).map(NodeId).collect())
    }

    /// Exact Euclidean distances between `points`, ids `0..n`.
    pub fn from_points(points: &[Point]) -> Self {
        let mut d = Self::with_len(points.len());
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                d.set(i, j, points[i].distance_to(points[j])).unwrap();
            }
        }
        d
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<(), MdsError> {
        if !value.is_finite() || value < 0.0 || (i == j && value != 0.0) {
            return Err(MdsError::InvalidEntry { i, j, value });
        }
        let n = self.len();
        self.entries[i * n + j] = Some(value);
        self.entries[j * n + i] = Some(value);
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }
}

/// Relative coordinates from classical scaling; frame is arbitrary.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub node_ids: Vec<NodeId>,
    pub coords: Vec<Point>,
}

/// Fills every missing entry with the shortest path over measured pairs.
/// Measured entries are kept as they are.
pub fn complete_distances(d: &DistanceMatrix) -> Result<DistanceMatrix, MdsError> {
    let n = d.len();
    let mut out = d.clone();
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for s in 0..n {
        // Dense Dijkstra; n is at most a few hundred.
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        loop {
            let u = (0..n)
                .filter(|&u| !done[u] && dist[u].is_finite())
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]));
            let Some(u) = u else { break };
            done[u] = true;
            for v in 0..n {
                if let (false, Some(w)) = (done[v], d.get(u, v)) {
                    if dist[u] + w < dist[v] {
                        dist[v] = dist[u] + w;
                    }
                }
            }
        }
        if component[s] == usize::MAX {
            for v in (0..n).filter(|&v| done[v]) {
                component[v] = n_components;
            }
            n_components += 1;
        }
        for v in 0..n {
            if out.get(s, v).is_none() && dist[v].is_finite() {
                out.entries[s * n + v] = Some(dist[v]);
            }
        }
    }
    if n_components > 1 {
        let mut components = vec![Vec::new(); n_components];
        for (i, &c) in component.iter().enumerate() {
            components[c].push(d.ids[i]);
        }
        return Err(MdsError::Disconnected { components });
    }
    Ok(out)
}

/// Classical scaling: double-center the squared distances and keep the two
/// leading eigenpairs.
pub fn classical_mds(d: &DistanceMatrix) -> Result<LocalMap, MdsError> {
    if !d.is_complete() {
        return Err(MdsError::Incomplete);
    }
    let n = d.len();
    if n < 3 {
        return Err(MdsError::DegenerateGeometry);
    }
    let sq: Vec<f64> = d.entries.iter().map(|e| e.unwrap().powi(2)).collect();
    let row: Vec<f64> = (0..n)
        .map(|i| sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (sq[i * n + j] - row[i] - row[j] + grand);
        }
    }
    let trace: f64 = (0..n).map(|i| b[i * n + i]).sum();
    let (vals, vecs) = symmetric_eigen(&b, n);
    let floor = 1e-9 * trace;
    if !(trace > 0.0) || vals[1] <= floor {
        return Err(MdsError::DegenerateGeometry);
    }
    let (s1, s2) = (vals[0].sqrt(), vals[1].sqrt());
    Ok(LocalMap {
        node_ids: d.ids.clone(),
        coords: (0..n)
            .map(|i| Point::new(s1 * vecs[0][i], s2 * vecs[1][i]))
            .collect(),
    })
}

/// Result of fitting a relative map onto anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub positions: BTreeMap<NodeId, Point>,
    /// Fewer than three anchors: only a translation was fitted.
    pub translation_only: bool,
    pub reflected: bool,
    /// Root-mean-square anchor residual after the fit.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct Rigid {
    reflect: bool,
    cos: f64,
    sin: f64,
    from: Point,
    to: Point,
}

impl Rigid {
    fn apply(&self, p: Point) -> Point {
        let (x, y) = (p.x - self.from.x, p.y - self.from.y);
        let y = if self.reflect { -y } else { y };
        Point::new(
            self.cos * x - self.sin * y + self.to.x,
            self.sin * x + self.cos * y + self.to.y,
        )
    }
}

fn collinear(points: &[Point]) -> bool {
    let c = centroid(points).unwrap();
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (x, y) = (p.x - c.x, p.y - c.y);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let small = 0.5 * (tr - disc);
    tr <= 0.0 || small <= 1e-9 * tr || det <= 0.0
}

/// Least-squares rigid fit (rotation, optional reflection, translation) of
/// `map` onto the anchors it contains; with one or two anchors only the
/// translation is fitted.
pub fn align_to_anchors(map: &LocalMap, anchors: &[(NodeId, Point)]) -> Result<Alignment, MdsError> {
    let index: BTreeMap<NodeId, usize> =
        map.node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let pairs: Vec<(Point, Point)> = anchors
        .iter()
        .filter_map(|(id, p)| index.get(id).map(|&i| (map.coords[i], *p)))
        .collect();
    if pairs.is_empty() {
        return Err(MdsError::NoAnchors);
    }
    let local: Vec<Point> = pairs.iter().map(|p| p.0).collect();
    let truth: Vec<Point> = pairs.iter().map(|p| p.1).collect();
    let (from, to) = (centroid(&local).unwrap(), centroid(&truth).unwrap());

    let residual = |r: &Rigid| {
        let ss: f64 = pairs
            .iter()
            .map(|(a, b)| r.apply(*a).distance_to(*b).powi(2))
            .sum();
        (ss / pairs.len() as f64).sqrt()
    };

    let translation_only = pairs.len() < 3;
    let rigid = if translation_only {
        Rigid { reflect: false, cos: 1.0, sin: 0.0, from, to }
    } else {
        if collinear(&truth) {
            return Err(MdsError::CollinearAnchors);
        }
        let fit = |reflect: bool| {
            let (mut dot, mut cross) = (0.0, 0.0);
            for (a, b) in &pairs {
                let (ax, ay) = (a.x - from.x, a.y - from.y);
                let ay = if reflect { -ay } else { ay };
                let (bx, by) = (b.x - to.x, b.y - to.y);
                dot += ax * bx + ay * by;
                cross += ax * by - ay * bx;
            }
            let theta = cross.atan2(dot);
            Rigid { reflect, cos: theta.cos(), sin: theta.sin(), from, to }
        };
        let (plain, mirrored) = (fit(false), fit(true));
        if residual(&mirrored) < residual(&plain) {
            mirrored
        } else {
            plain
        }
    };
    Ok(Alignment {
        positions: map
            .node_ids
            .iter()
            .zip(&map.coords)
            .map(|(&id, &p)| (id, rigid.apply(p)))
            .collect(),
        translation_only,
        reflected: rigid.reflect,
        residual: residual(&rigid),
    })
}

/// Measured ranges between on-air nodes in `ids` that share a link.
fn measured_matrix(network: &NetworkState, ids: &[NodeId]) -> DistanceMatrix {
    let mut d = DistanceMatrix::new(ids.to_vec());
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    for (i, &a) in ids.iter().enumerate() {
        for b in network.graph().neighbors(a) {
            if let Some(&j) = index.get(b) {
                if j > i {
                    d.set(i, j, network.measured_range(a, *b).mean).unwrap();
                }
            }
        }
    }
    d
}

fn is_sink(network: &NetworkState, id: NodeId) -> bool {
    network.node(id).is_some_and(|n| n.role == NodeRole::Sink)
}

/// Global MDS-MAP over every on-air node, aligned to all active sinks.
/// Returns estimates for the unknown nodes.
pub fn localize_centralized(network: &NetworkState) -> Result<BTreeMap<NodeId, Point>, MdsError> {
    let ids: Vec<NodeId> = network.graph().vertices().collect();
    let d = complete_distances(&measured_matrix(network, &ids))?;
    let map = classical_mds(&d)?;
    let anchors: Vec<(NodeId, Point)> = ids
        .iter()
        .filter(|&&id| is_sink(network, id))
        .map(|&id| (id, network.position(id)))
        .collect();
    let aligned = align_to_anchors(&map, &anchors)?;
    Ok(aligned
        .positions
        .into_iter()
        .filter(|(id, _)| !is_sink(network, *id))
        .collect())
}

/// Estimates from [`localize_components`], with the nodes whose fix is
/// weaker than a full rigid alignment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CentralizedOutcome {
    pub estimates: BTreeMap<NodeId, Point>,
    /// Unknowns whose component had fewer than three usable anchors.
    pub translation_only: BTreeSet<NodeId>,
    /// Unknowns with no anchor or a degenerate component; placed at the
    /// anchor centroid or the area center.
    pub unresolved: BTreeSet<NodeId>,
}

/// MDS-MAP run separately over each connected component, so a split network
/// still yields an estimate for every unknown.
pub fn localize_components(network: &NetworkState) -> CentralizedOutcome {
    let mut out = CentralizedOutcome::default();
    let center = network.area_center();
    for comp in network.graph().components() {
        let unknowns: Vec<NodeId> = comp.iter().copied().filter(|&id| !is_sink(network, id)).collect();
        if unknowns.is_empty() {
            continue;
        }
        let anchors: Vec<(NodeId, Point)> = comp
            .iter()
            .filter(|&&id| is_sink(network, id))
            .map(|&id| (id, network.position(id)))
            .collect();
        let fix = complete_distances(&measured_matrix(network, &comp))
            .and_then(|d| classical_mds(&d))
            .and_then(|map| match align_to_anchors(&map, &anchors) {
                Err(MdsError::CollinearAnchors) => {
                    let some: Vec<_> = anchors.iter().take(2).copied().collect();
                    align_to_anchors(&map, &some)
                }
                r => r,
            });
        match fix {
            Ok(a) => {
                for u in unknowns {
                    out.estimates.insert(u, a.positions[&u]);
                    if a.translation_only {
                        out.translation_only.insert(u);
                    }
                }
            }
            Err(_) => {
                let pts: Vec<Point> = anchors.iter().map(|a| a.1).collect();
                let fallback = centroid(&pts).unwrap_or(center);
                for u in unknowns {
                    out.estimates.insert(u, fallback);
                    out.unresolved.insert(u);
                }
            }
        }
    }
    out
}

/// MDS-MAP restricted to one sub-region. Anchors are the region's sink plus
/// any member already present in `known` (overlap with earlier regions).
pub fn localize_region(
    network: &NetworkState,
    region: &SubRegion,
    known: &BTreeMap<NodeId, Point>,
) -> Result<Alignment, MdsError> {
    let ids: Vec<NodeId> = region
        .members
        .iter()
        .copied()
        .filter(|&id| network.graph().contains(id))
        .collect();
    let d = complete_distances(&measured_matrix(network, &ids))?;
    let map = classical_mds(&d)?;
    let mut anchors = vec![(region.sink, network.position(region.sink))];
    anchors.extend(
        ids.iter()
            .filter(|&&id| id != region.sink)
            .filter_map(|id| known.get(id).map(|p| (*id, *p))),
    );
    match align_to_anchors(&map, &anchors) {
        Err(MdsError::CollinearAnchors) => align_to_anchors(&map, &anchors[..2]),
        r => r,
    }
}
