use super::{Graph, NetworkState, NodeRole};
use crate::bayes::{BeaconLogRow, RangeMeasurement};
use crate::geometry::NodeId;
use crate::rng::RngSeed;
use rand_distr::{Distribution, StandardNormal};

/// Smallest reported range; noisy means are clamped up to it.
pub const MIN_RANGE: f64 = 0.1;

/// Per-link ranging model. Each undirected link has one fixed measurement,
/// drawn from a stream keyed by the link's endpoints, so it does not depend
/// on how many other links exist or in which order they are queried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranging {
    seed: RngSeed,
    sigma: f64,
    min_stdev: f64,
}

impl Ranging {
    pub fn new(seed: RngSeed, sigma: f64, min_stdev: f64) -> Self {
        Self {
            seed,
            sigma,
            min_stdev,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Stdev reported with each measurement. With zero ranging noise the
    /// kernel still needs a positive width.
    pub fn reported_stdev(&self) -> f64 {
        self.sigma.max(self.min_stdev)
    }

    pub fn measure(&self, a: NodeId, b: NodeId, true_distance: f64) -> RangeMeasurement {
        let mean = if self.sigma > 0.0 {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let key = ((lo.0 as u64) << 32) | hi.0 as u64;
            let z: f64 = StandardNormal.sample(&mut self.seed.substream(key).rng());
            (true_distance + self.sigma * z).max(MIN_RANGE)
        } else {
            true_distance
        };
        RangeMeasurement {
            mean,
            stdev: self.reported_stdev(),
        }
    }
}

/// A log row travelling to an unknown node. It arrives in round `depth`
/// (one hop per round) over the link `relay -> target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub origin: NodeId,
    pub target: NodeId,
    pub relay: NodeId,
    pub depth: u32,
    pub row: BeaconLogRow,
}

/// One row per (unknown node, active sink within `max_hops`) pair, following
/// the breadth-first shortest path from the sink. Ordered by depth, then
/// target, then origin.
pub fn synthesize_logs(network: &NetworkState, graph: &Graph, max_hops: usize) -> Vec<Delivery> {
    let mut out = Vec::new();
    for s in network.active_sinks() {
        let bfs = graph.bfs(s, Some(max_hops as u32));
        let origin_pos = network.position(s);
        for node in network.nodes() {
            if node.role != NodeRole::Unknown {
                continue;
            }
            let Some(depth) = bfs.depth[node.id.index()] else {
                continue;
            };
            if depth == 0 {
                continue;
            }
            let path = bfs.path_to(node.id).expect("reached node has a path");
            let hops = path
                .windows(2)
                .map(|w| network.measured_range(w[0], w[1]))
                .collect();
            out.push(Delivery {
                origin: s,
                target: node.id,
                relay: path[path.len() - 2],
                depth,
                row: BeaconLogRow {
                    beacon_position: origin_pos,
                    hops,
                },
            });
        }
    }
    out.sort_by_key(|d| (d.depth, d.target, d.origin));
    out
}

/// Writes every delivery straight into its target's log.
pub fn populate_logs(network: &mut NetworkState, deliveries: &[Delivery]) {
    for d in deliveries {
        network.nodes[d.target.index()]
            .log
            .insert(d.origin, d.row.clone());
    }
}
