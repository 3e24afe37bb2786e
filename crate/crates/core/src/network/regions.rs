use super::{
    Graph, LogDatabase, Message, MessageKind, NetworkState, NodeRole, Payload, SubRegion,
};
use crate::geometry::NodeId;
use std::collections::BTreeSet;

/// One sub-region per active sink: the sink and its one-hop neighbors.
/// Regions overlap wherever neighborhoods do.
pub fn partition(network: &NetworkState, graph: &Graph) -> Vec<SubRegion> {
    network
        .active_sinks()
        .into_iter()
        .map(|s| {
            let mut members: BTreeSet<NodeId> = graph.neighbors(s).iter().copied().collect();
            members.insert(s);
            SubRegion {
                sink: s,
                backup: network.backup_of(s),
                members,
                orphaned: false,
            }
        })
        .collect()
}

/// Unknown nodes that belong to no region.
pub fn uncovered(network: &NetworkState, regions: &[SubRegion]) -> BTreeSet<NodeId> {
    network
        .nodes()
        .iter()
        .filter(|n| n.role == NodeRole::Unknown)
        .map(|n| n.id)
        .filter(|id| !regions.iter().any(|r| r.members.contains(id)))
        .collect()
}

/// Copies the region sink's log database onto its backup. Returns the sync
/// message, or `None` when there is no awake sink or no backup.
pub fn mirror_sync(network: &mut NetworkState, region_index: usize) -> Option<Message> {
    let region = network.regions.get(region_index)?;
    let backup = region.backup?;
    let sink = network.acting_cu(region)?;
    let db: LogDatabase = network.databases.get(&sink).cloned().unwrap_or_default();
    let rows = db.values().map(|l| l.len()).sum();
    network.databases.insert(backup, db);
    Some(Message {
        kind: MessageKind::MirrorSync,
        src: sink,
        dst: backup,
        payload: Payload::Rows(rows),
    })
}
