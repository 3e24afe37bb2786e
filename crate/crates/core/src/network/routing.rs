use super::{Graph, NetworkState};
use crate::geometry::NodeId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// First relay after the source and total hop count of a shortest path.
    Reachable { next_hop: NodeId, hops: u32 },
    Unreachable,
}

/// Super-sink lookup table: shortest hop paths between every ordered pair of
/// active sinks over the full relay graph.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoutingTable {
    entries: BTreeMap<(NodeId, NodeId), Route>,
    version: u64,
}

impl RoutingTable {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn route(&self, from: NodeId, to: NodeId) -> Option<Route> {
        self.entries.get(&(from, to)).copied()
    }

    pub fn entries(&self) -> &BTreeMap<(NodeId, NodeId), Route> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sinks that appear as a source in the table.
    pub fn sinks(&self) -> Vec<NodeId> {
        let mut s: Vec<NodeId> = self.entries.keys().map(|(a, _)| *a).collect();
        s.dedup();
        s
    }
}

/// Recomputes the table for the current topology. Ties between equal-length
/// paths go to the lowest-id next hop.
pub fn rebuild_routing_table(
    network: &NetworkState,
    graph: &Graph,
    previous_version: u64,
) -> RoutingTable {
    let sinks: Vec<NodeId> = network
        .active_sinks()
        .into_iter()
        .filter(|s| graph.contains(*s))
        .collect();
    let mut entries = BTreeMap::new();
    for &t in &sinks {
        let to_t = graph.bfs(t, None);
        for &s in &sinks {
            if s == t {
                continue;
            }
            let route = match to_t.depth[s.index()] {
                Some(hops) => {
                    let next_hop = graph
                        .neighbors(s)
                        .iter()
                        .copied()
                        .find(|n| to_t.depth[n.index()] == Some(hops - 1))
                        .expect("a shortest path has a first hop");
                    Route::Reachable { next_hop, hops }
                }
                None => Route::Unreachable,
            };
            entries.insert((s, t), route);
        }
    }
    RoutingTable {
        entries,
        version: previous_version + 1,
    }
}
