//! Simulated sensor network: deployment, unit-disk connectivity, ranging and
//! log synthesis, sink sub-regions, the super-sink routing table, and the
//! energy / power-state machine with backup failover.

mod deploy;
mod graph;
mod hybrid;
mod logs;
mod regions;
mod roles;
mod routing;
mod sim;

pub use deploy::{deploy, sink_lattice};
pub use graph::{connectivity, Graph};
pub use hybrid::{localize_hybrid, HybridOutcome};
pub use logs::{populate_logs, synthesize_logs, Delivery, Ranging};
pub use regions::{mirror_sync, partition, uncovered};
pub use roles::{step_energy_and_roles, StepOutcome};
pub use routing::{rebuild_routing_table, Route, RoutingTable};
pub use sim::{Simulation, TraceRecord};

use crate::bayes::BeaconLogRow;
use crate::config::{ConfigError, EnergyModel};
use crate::geometry::{NodeId, Point};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no node with id {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Unknown,
    Sink,
    Backup,
    SuperSink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerState {
    Awake,
    Sleep,
}

/// Rows held for one node, keyed by originating sink so iteration order is
/// independent of arrival order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeLog(BTreeMap<NodeId, BeaconLogRow>);

impl NodeLog {
    pub fn insert(&mut self, origin: NodeId, row: BeaconLogRow) {
        self.0.insert(origin, row);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn origins(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.keys().copied()
    }

    pub fn rows(&self) -> Vec<BeaconLogRow> {
        self.0.values().cloned().collect()
    }

    pub fn get(&self, origin: NodeId) -> Option<&BeaconLogRow> {
        self.0.get(&origin)
    }
}

/// Per-node log store held by a computing unit (sink, backup or super-sink).
pub type LogDatabase = BTreeMap<NodeId, NodeLog>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub true_position: Point,
    pub role: NodeRole,
    pub power: PowerState,
    pub energy: f64,
    /// False once the node is exhausted or force-failed.
    pub alive: bool,
    pub log: NodeLog,
}

impl NodeState {
    pub fn is_active(&self) -> bool {
        self.alive && self.power == PowerState::Awake
    }

    /// Participates in the ranging / relay radio graph.
    pub fn on_air(&self) -> bool {
        self.is_active() && self.role != NodeRole::SuperSink
    }

    pub fn knows_position(&self) -> bool {
        !matches!(self.role, NodeRole::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubRegion {
    /// Acting sink; replaced by the backup on failover.
    pub sink: NodeId,
    /// Standby mirror; `None` once it has taken over.
    pub backup: Option<NodeId>,
    pub members: BTreeSet<NodeId>,
    /// Sink lost with no backup left to take over.
    pub orphaned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Beacon,
    Alert,
    StateCmd,
    MirrorSync,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    /// Number of log rows carried.
    Rows(usize),
    /// Failed sink whose region the backup must take over.
    Takeover { failed_sink: NodeId },
    SetPower(PowerState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub kind: MessageKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub payload: Payload,
}

/// Everything that happens to a node in one round, for tracing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum Event {
    Failed { node: NodeId },
    SinkDown { node: NodeId },
    AlertSent { node: NodeId, backup: NodeId },
    Woke { node: NodeId },
    Slept { node: NodeId },
    TookOver { node: NodeId, region_sink: NodeId },
    Orphaned { node: NodeId },
    MirrorSynced { node: NodeId, backup: NodeId },
}

impl Event {
    pub fn node(&self) -> NodeId {
        match *self {
            Event::Failed { node }
            | Event::SinkDown { node }
            | Event::AlertSent { node, .. }
            | Event::Woke { node }
            | Event::Slept { node }
            | Event::TookOver { node, .. }
            | Event::Orphaned { node }
            | Event::MirrorSynced { node, .. } => node,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub(crate) width: f64,
    pub(crate) height: f64,
    pub(crate) comm_range: f64,
    pub(crate) nodes: Vec<NodeState>,
    pub(crate) super_sink: NodeId,
    /// Dedicated standby for each original sink.
    pub(crate) backup_of: BTreeMap<NodeId, NodeId>,
    pub(crate) regions: Vec<SubRegion>,
    pub(crate) routing: RoutingTable,
    pub(crate) graph: Graph,
    pub(crate) databases: BTreeMap<NodeId, LogDatabase>,
    pub(crate) ranging: Ranging,
    pub(crate) energy_model: EnergyModel,
}

impl NetworkState {
    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeState> {
        self.nodes.get(id.index())
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Result<&mut NodeState, NetworkError> {
        self.nodes
            .get_mut(id.index())
            .ok_or(NetworkError::UnknownNode(id))
    }

    pub fn position(&self, id: NodeId) -> Point {
        self.nodes[id.index()].true_position
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn area_center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn comm_range(&self) -> f64 {
        self.comm_range
    }

    pub fn super_sink(&self) -> NodeId {
        self.super_sink
    }

    pub fn backup_of(&self, sink: NodeId) -> Option<NodeId> {
        self.backup_of.get(&sink).copied()
    }

    pub fn regions(&self) -> &[SubRegion] {
        &self.regions
    }

    pub fn routing(&self) -> &RoutingTable {
        &self.routing
    }

    /// Connectivity graph at the current topology.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn ranging(&self) -> &Ranging {
        &self.ranging
    }

    pub fn energy_model(&self) -> &EnergyModel {
        &self.energy_model
    }

    pub fn database(&self, cu: NodeId) -> Option<&LogDatabase> {
        self.databases.get(&cu)
    }

    pub fn unknown_ids(&self) -> Vec<NodeId> {
        self.ids_with(|n| n.role == NodeRole::Unknown)
    }

    /// Sinks currently able to serve as anchors.
    pub fn active_sinks(&self) -> Vec<NodeId> {
        self.ids_with(|n| n.role == NodeRole::Sink && n.is_active())
    }

    pub fn sink_ids(&self) -> Vec<NodeId> {
        self.ids_with(|n| n.role == NodeRole::Sink)
    }

    fn ids_with(&self, f: impl Fn(&NodeState) -> bool) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| f(n)).map(|n| n.id).collect()
    }

    /// Measured range of a radio link.
    pub fn measured_range(&self, a: NodeId, b: NodeId) -> crate::bayes::RangeMeasurement {
        self.ranging
            .measure(a, b, crate::geometry::euclidean(self.position(a), self.position(b)))
    }

    pub fn set_power(&mut self, id: NodeId, power: PowerState) -> Result<(), NetworkError> {
        let node = self.node_mut(id)?;
        if node.role != NodeRole::Unknown {
            node.power = power;
        }
        Ok(())
    }

    pub fn fail_node(&mut self, id: NodeId) -> Result<(), NetworkError> {
        self.node_mut(id)?.alive = false;
        Ok(())
    }

    /// Recomputes connectivity and the routing table after a topology change.
    pub fn refresh_topology(&mut self) {
        self.graph = connectivity(self, self.comm_range);
        self.routing = rebuild_routing_table(self, &self.graph, self.routing.version());
    }

    /// Computing unit currently serving `region`, if any.
    pub fn acting_cu(&self, region: &SubRegion) -> Option<NodeId> {
        let n = self.node(region.sink)?;
        (n.role == NodeRole::Sink && n.is_active() && !region.orphaned).then_some(region.sink)
    }
}
