use super::{
    deploy, mirror_sync, step_energy_and_roles, synthesize_logs, Delivery, Event, Message,
    MessageKind, NetworkError, NetworkState, NodeRole, Payload, PowerState,
};
use crate::config::{FailureInjection, SimConfig};
use crate::geometry::NodeId;
use crate::rng::RngSeed;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

/// One line of the per-round trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub round: u32,
    pub node: NodeId,
    pub role: NodeRole,
    pub power: PowerState,
    pub energy: f64,
    pub alive: bool,
    pub events: Vec<Event>,
}

/// Synchronous round loop over one network instance.
///
/// Each round: deliver the beacon rows whose hop depth equals the round
/// number (and forward them to region computing units), mirror sink
/// databases to backups, apply scheduled failures, then run the energy and
/// role step. Control messages emitted by a step are handled by the next one.
#[derive(Debug)]
pub struct Simulation {
    network: NetworkState,
    schedule: Vec<Delivery>,
    pending: Vec<Message>,
    round: u32,
    sync_every: u32,
    failures: Vec<FailureInjection>,
    tracing: bool,
    trace: Vec<TraceRecord>,
    alerts: usize,
    takeovers: usize,
    events: Vec<(u32, Event)>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig, seed: RngSeed) -> Result<Self, NetworkError> {
        let network = deploy(cfg, seed)?;
        for f in &cfg.failure_injections {
            if network.node(f.node).is_none() {
                return Err(NetworkError::UnknownNode(f.node));
            }
        }
        Ok(Self::from_network(network, cfg))
    }

    /// Runs an already-built network; failure injections naming missing
    /// nodes are ignored.
    pub fn from_network(network: NetworkState, cfg: &SimConfig) -> Self {
        let schedule = synthesize_logs(&network, network.graph(), cfg.max_hops);
        let failures = cfg
            .failure_injections
            .iter()
            .filter(|f| network.node(f.node).is_some())
            .cloned()
            .collect();
        Self {
            network,
            schedule,
            pending: Vec::new(),
            round: 0,
            sync_every: cfg.sync_every,
            failures,
            tracing: false,
            trace: Vec::new(),
            alerts: 0,
            takeovers: 0,
            events: Vec::new(),
        }
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.tracing = on;
        self
    }

    pub fn network(&self) -> &NetworkState {
        &self.network
    }

    pub fn into_network(self) -> NetworkState {
        self.network
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn schedule(&self) -> &[Delivery] {
        &self.schedule
    }

    pub fn alerts_sent(&self) -> usize {
        self.alerts
    }

    /// Backup Sleep -> Awake transitions.
    pub fn takeovers(&self) -> usize {
        self.takeovers
    }

    pub fn events(&self) -> &[(u32, Event)] {
        &self.events
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn write_trace<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for rec in &self.trace {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn run(&mut self, rounds: u32) {
        for _ in 0..rounds {
            self.step();
        }
    }

    pub fn step(&mut self) {
        self.round += 1;
        let t = self.round;
        let mut msgs = std::mem::take(&mut self.pending);
        let mut events = Vec::new();

        self.deliver(t, &mut msgs);

        if t.is_multiple_of(self.sync_every) {
            for i in 0..self.network.regions.len() {
                if let Some(m) = mirror_sync(&mut self.network, i) {
                    events.push(Event::MirrorSynced {
                        node: m.src,
                        backup: m.dst,
                    });
                    msgs.push(m);
                }
            }
        }

        let mut injected = false;
        for f in self.failures.iter().filter(|f| f.round == t) {
            let n = &mut self.network.nodes[f.node.index()];
            if n.alive {
                n.alive = false;
                injected = true;
                events.push(Event::Failed { node: f.node });
            }
        }
        if injected {
            self.network.refresh_topology();
        }

        let outcome = step_energy_and_roles(&mut self.network, &msgs);
        self.alerts += outcome
            .emitted
            .iter()
            .filter(|m| m.kind == MessageKind::Alert)
            .count();
        self.takeovers += outcome
            .events
            .iter()
            .filter(|e| matches!(e, Event::TookOver { .. }))
            .count();
        events.extend(outcome.events);
        self.pending = outcome.emitted;

        if self.tracing {
            let mut by_node: BTreeMap<NodeId, Vec<Event>> = BTreeMap::new();
            for e in &events {
                by_node.entry(e.node()).or_default().push(e.clone());
            }
            for n in &self.network.nodes {
                self.trace.push(TraceRecord {
                    round: t,
                    node: n.id,
                    role: n.role,
                    power: n.power,
                    energy: n.energy,
                    alive: n.alive,
                    events: by_node.remove(&n.id).unwrap_or_default(),
                });
            }
        }
        self.events.extend(events.into_iter().map(|e| (t, e)));
    }

    fn deliver(&mut self, t: u32, msgs: &mut Vec<Message>) {
        let net = &mut self.network;
        let super_sink = net.super_sink;
        let mut links: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();
        for d in self.schedule.iter().filter(|d| d.depth == t) {
            let relay_ok = net.nodes[d.relay.index()].is_active();
            let target_ok = net.nodes[d.target.index()].is_active();
            if !relay_ok || !target_ok {
                continue;
            }
            net.nodes[d.target.index()]
                .log
                .insert(d.origin, d.row.clone());
            *links.entry((d.relay, d.target)).or_default() += 1;
            let cus: Vec<NodeId> = net
                .regions
                .iter()
                .filter(|r| r.members.contains(&d.target))
                .filter_map(|r| net.acting_cu(r))
                .collect();
            for cu in cus {
                net.databases
                    .entry(cu)
                    .or_default()
                    .entry(d.target)
                    .or_default()
                    .insert(d.origin, d.row.clone());
                *links.entry((d.target, cu)).or_default() += 1;
            }
            net.databases
                .entry(super_sink)
                .or_default()
                .entry(d.target)
                .or_default()
                .insert(d.origin, d.row.clone());
        }
        msgs.extend(links.into_iter().map(|((src, dst), n)| Message {
            kind: MessageKind::Beacon,
            src,
            dst,
            payload: Payload::Rows(n),
        }));
    }
}
