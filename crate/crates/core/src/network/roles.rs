use super::{Event, Message, MessageKind, NetworkState, NodeRole, Payload, PowerState};
use crate::geometry::NodeId;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    /// Control messages to deliver at the next step.
    pub emitted: Vec<Message>,
    pub events: Vec<Event>,
    pub topology_changed: bool,
}

fn on_air_snapshot(network: &NetworkState) -> Vec<bool> {
    network.nodes.iter().map(|n| n.on_air()).collect()
}

/// One role step of the round loop.
///
/// 1. Debits transmit/receive energy for `messages` on active endpoints.
///    Exhausted nodes die.
/// 2. Applies control messages: an ALERT wakes the addressed backup and
///    hands it the failed sink's region; a STATE_CMD sets a sink's power.
/// 3. Any serving sink that is dead or below the energy threshold goes to
///    sleep and the super-sink ALERTs its region's backup. A region with no
///    backup left is orphaned, and the super-sink wakes a sleeping sink if
///    one is available.
/// 4. Rebuilds connectivity and routing if the radio topology changed.
pub fn step_energy_and_roles(network: &mut NetworkState, messages: &[Message]) -> StepOutcome {
    let before = on_air_snapshot(network);
    let model = network.energy_model;
    let mut out = StepOutcome::default();

    for msg in messages {
        let src = &mut network.nodes[msg.src.index()];
        if src.is_active() && src.energy > 0.0 {
            src.energy = (src.energy - model.tx_cost).max(0.0);
            // Delivery needs a live sender; a depleted one still got this out.
            let dst = &mut network.nodes[msg.dst.index()];
            if dst.is_active() && dst.energy > 0.0 {
                dst.energy = (dst.energy - model.rx_cost).max(0.0);
            }
        }
    }
    for n in network.nodes.iter_mut() {
        if n.alive && n.energy <= 0.0 {
            n.alive = false;
            out.events.push(Event::Failed { node: n.id });
        }
    }

    for msg in messages {
        match (&msg.kind, &msg.payload) {
            (MessageKind::Alert, Payload::Takeover { failed_sink }) => {
                take_over(network, msg.dst, *failed_sink, &mut out.events);
            }
            (MessageKind::StateCmd, Payload::SetPower(power)) => {
                let n = &mut network.nodes[msg.dst.index()];
                if n.alive && n.role == NodeRole::Sink && n.power != *power {
                    n.power = *power;
                    out.events.push(match power {
                        PowerState::Awake => Event::Woke { node: n.id },
                        PowerState::Sleep => Event::Slept { node: n.id },
                    });
                }
            }
            _ => {}
        }
    }

    let super_sink = network.super_sink;
    let threshold = model.threshold;
    for i in 0..network.regions.len() {
        let region = &network.regions[i];
        if region.orphaned {
            continue;
        }
        let sink = region.sink;
        let node = &network.nodes[sink.index()];
        if node.role != NodeRole::Sink || node.power != PowerState::Awake {
            continue;
        }
        if node.alive && node.energy >= threshold {
            continue;
        }
        network.nodes[sink.index()].power = PowerState::Sleep;
        out.events.push(Event::SinkDown { node: sink });
        let backup = region
            .backup
            .filter(|b| network.nodes[b.index()].alive);
        match backup {
            Some(b) => {
                out.emitted.push(Message {
                    kind: MessageKind::Alert,
                    src: super_sink,
                    dst: b,
                    payload: Payload::Takeover { failed_sink: sink },
                });
                out.events.push(Event::AlertSent {
                    node: super_sink,
                    backup: b,
                });
            }
            None => {
                network.regions[i].orphaned = true;
                out.events.push(Event::Orphaned { node: sink });
                if let Some(spare) = spare_sink(network) {
                    out.emitted.push(Message {
                        kind: MessageKind::StateCmd,
                        src: super_sink,
                        dst: spare,
                        payload: Payload::SetPower(PowerState::Awake),
                    });
                }
            }
        }
    }

    out.topology_changed = on_air_snapshot(network) != before;
    if out.topology_changed {
        network.refresh_topology();
    }
    out
}

fn take_over(network: &mut NetworkState, backup: NodeId, failed_sink: NodeId, events: &mut Vec<Event>) {
    let Some(idx) = network
        .regions
        .iter()
        .position(|r| r.sink == failed_sink && r.backup == Some(backup))
    else {
        return;
    };
    let b = &mut network.nodes[backup.index()];
    if !b.alive {
        network.regions[idx].orphaned = true;
        events.push(Event::Orphaned { node: failed_sink });
        return;
    }
    b.power = PowerState::Awake;
    b.role = NodeRole::Sink;
    network.regions[idx].sink = backup;
    network.regions[idx].backup = None;
    events.push(Event::Woke { node: backup });
    events.push(Event::TookOver {
        node: backup,
        region_sink: failed_sink,
    });
}

/// Sleeping live sink with the most energy (lowest id on ties).
fn spare_sink(network: &NetworkState) -> Option<NodeId> {
    network
        .nodes
        .iter()
        .filter(|n| n.role == NodeRole::Sink && n.alive && n.power == PowerState::Sleep)
        .filter(|n| !network.regions.iter().any(|r| r.sink == n.id))
        .max_by(|a, b| a.energy.total_cmp(&b.energy).then(b.id.cmp(&a.id)))
        .map(|n| n.id)
}
