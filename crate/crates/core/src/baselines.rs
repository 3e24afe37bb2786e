//! Decentralized baselines: neighbor-centroid diffusion and sink bounding
//! boxes.

use crate::config::BaselineConfig;
use crate::geometry::{centroid, NodeId, Point};
use crate::network::{NetworkState, NodeRole};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOutcome {
    pub estimates: BTreeMap<NodeId, Point>,
    /// Unknowns with no neighbor; left at the area center.
    pub isolated: BTreeSet<NodeId>,
    pub iterations: usize,
    pub converged: bool,
}

/// Sinks stay at their true positions; every unknown starts at the area
/// center and is moved, synchronously each round, to the centroid of its
/// neighbors' current positions.
pub fn diffusion(network: &NetworkState, cfg: &BaselineConfig) -> DiffusionOutcome {
    let graph = network.graph();
    let center = network.area_center();
    let unknowns = network.unknown_ids();
    let mut pos: BTreeMap<NodeId, Point> = graph
        .vertices()
        .map(|id| match network.node(id).map(|n| n.role) {
            Some(NodeRole::Unknown) => (id, center),
            _ => (id, network.position(id)),
        })
        .collect();
    let isolated: BTreeSet<NodeId> = unknowns
        .iter()
        .copied()
        .filter(|&u| !graph.contains(u) || graph.neighbors(u).is_empty())
        .collect();
    let movers: Vec<NodeId> = unknowns
        .iter()
        .copied()
        .filter(|u| !isolated.contains(u))
        .collect();

    let mut iterations = 0;
    let mut converged = movers.is_empty();
    while !converged && iterations < cfg.diffusion_iterations {
        iterations += 1;
        let next: Vec<Point> = movers
            .iter()
            .map(|&u| {
                let nbrs: Vec<Point> = graph.neighbors(u).iter().map(|v| pos[v]).collect();
                centroid(&nbrs).unwrap()
            })
            .collect();
        let mut moved: f64 = 0.0;
        for (&u, p) in movers.iter().zip(next) {
            moved = moved.max(pos[&u].distance_to(p));
            pos.insert(u, p);
        }
        converged = moved < cfg.diffusion_convergence_eps;
    }

    DiffusionOutcome {
        estimates: unknowns
            .iter()
            .map(|&u| (u, pos.get(&u).copied().unwrap_or(center)))
            .collect(),
        isolated,
        iterations,
        converged,
    }
}

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Aabb {
    pub fn around(c: Point, half_width: f64) -> Self {
        Self {
            x0: c.x - half_width,
            x1: c.x + half_width,
            y0: c.y - half_width,
            y1: c.y + half_width,
        }
    }

    pub fn intersect(&self, o: &Aabb) -> Option<Aabb> {
        let b = Aabb {
            x0: self.x0.max(o.x0),
            x1: self.x1.min(o.x1),
            y0: self.y0.max(o.y0),
            y1: self.y1.min(o.y1),
        };
        (b.x0 <= b.x1 && b.y0 <= b.y1).then_some(b)
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxOutcome {
    pub estimates: BTreeMap<NodeId, Point>,
    /// Unknowns that heard no sink, or whose boxes had no consistent pair.
    pub flagged: BTreeSet<NodeId>,
    /// Unknowns estimated from a two-box fallback.
    pub fallback: BTreeSet<NodeId>,
}

/// Intersection of the boxes (half-width = range) around the sinks each node
/// hears directly; empty intersections fall back to the smallest non-empty
/// pairwise intersection.
pub fn bounding_box_of(boxes: &[Aabb]) -> Option<(Aabb, bool)> {
    let (first, rest) = boxes.split_first()?;
    if let Some(b) = rest.iter().try_fold(*first, |acc, b| acc.intersect(b)) {
        return Some((b, false));
    }
    let mut best: Option<Aabb> = None;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if let Some(b) = boxes[i].intersect(&boxes[j]) {
                if best.is_none_or(|c| b.area() < c.area()) {
                    best = Some(b);
                }
            }
        }
    }
    best.map(|b| (b, true))
}

pub fn bounding_box(network: &NetworkState) -> BoxOutcome {
    let graph = network.graph();
    let r = network.comm_range();
    let center = network.area_center();
    let mut out = BoxOutcome {
        estimates: BTreeMap::new(),
        flagged: BTreeSet::new(),
        fallback: BTreeSet::new(),
    };
    for u in network.unknown_ids() {
        let boxes: Vec<Aabb> = if graph.contains(u) {
            graph
                .neighbors(u)
                .iter()
                .filter(|&&v| network.node(v).is_some_and(|n| n.role == NodeRole::Sink))
                .map(|&v| Aabb::around(network.position(v), r))
                .collect()
        } else {
            Vec::new()
        };
        let est = match bounding_box_of(&boxes) {
            Some((b, used_fallback)) => {
                if used_fallback {
                    out.fallback.insert(u);
                }
                b.center()
            }
            None => {
                out.flagged.insert(u);
                center
            }
        };
        out.estimates.insert(u, est);
    }
    out
}
