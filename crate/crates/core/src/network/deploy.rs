use super::{
    connectivity, partition, rebuild_routing_table, Graph, NetworkError, NetworkState, NodeLog,
    NodeRole, NodeState, PowerState, Ranging, RoutingTable,
};
use crate::config::{Placement, SimConfig};
use crate::geometry::{euclidean, NodeId, Point};
use crate::rng::{RngSeed, STREAM_DEPLOY, STREAM_RANGING};
use rand::Rng;
use std::collections::BTreeMap;

/// Sink positions: a `ceil(sqrt(k))`-column lattice, filled row by row, with
/// every site at the center of its lattice cell.
pub fn sink_lattice(k: usize, width: f64, height: f64) -> Vec<Point> {
    if k == 0 {
        return Vec::new();
    }
    let cols = (k as f64).sqrt().ceil() as usize;
    let rows = k.div_ceil(cols);
    let (dx, dy) = (width / cols as f64, height / rows as f64);
    (0..k)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            Point::new(dx * (c as f64 + 0.5), dy * (r as f64 + 0.5))
        })
        .collect()
}

fn place_unknowns(cfg: &SimConfig, rng: &mut impl Rng) -> Vec<Point> {
    let m = cfg.unknown_count();
    let (w, h) = (cfg.area.width, cfg.area.height);
    match cfg.placement {
        Placement::Random => (0..m)
            .map(|_| Point::new(rng.random::<f64>() * w, rng.random::<f64>() * h))
            .collect(),
        Placement::Grid => {
            if m == 0 {
                return Vec::new();
            }
            let cols = (m as f64).sqrt().ceil() as usize;
            let rows = m.div_ceil(cols);
            let (dx, dy) = (w / cols as f64, h / rows as f64);
            (0..m)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    let jx = (rng.random::<f64>() - 0.5) * 0.5 * dx;
                    let jy = (rng.random::<f64>() - 0.5) * 0.5 * dy;
                    Point::new(
                        (dx * (c as f64 + 0.5) + jx).clamp(0.0, w),
                        (dy * (r as f64 + 0.5) + jy).clamp(0.0, h),
                    )
                })
                .collect()
        }
    }
}

/// Sinks left awake under a duty cycle, spread evenly over the id range.
fn duty_cycle_awake(k: usize, fraction: f64) -> Vec<bool> {
    let mut awake: Vec<bool> = (0..k)
        .map(|i| ((i + 1) as f64 * fraction).floor() > (i as f64 * fraction).floor())
        .collect();
    if fraction >= 1.0 {
        awake.iter_mut().for_each(|a| *a = true);
    }
    if !awake.iter().any(|&a| a) {
        if let Some(first) = awake.first_mut() {
            *first = true;
        }
    }
    awake
}

/// Builds a network: sinks `0..k` on the lattice, unknowns `k..n`, then the
/// super-sink (co-located with the sink nearest the area center) and one
/// sleeping backup per sink, co-located with it.
pub fn deploy(cfg: &SimConfig, seed: RngSeed) -> Result<NetworkState, NetworkError> {
    cfg.validate()?;
    let mut rng = seed.substream(STREAM_DEPLOY).rng();
    let sinks = sink_lattice(cfg.sink_count, cfg.area.width, cfg.area.height);
    let unknowns = place_unknowns(cfg, &mut rng);
    build(cfg, seed, &sinks, &unknowns)
}

impl NetworkState {
    /// Network with explicit sink and unknown positions; otherwise laid out
    /// like [`deploy`]. `cfg.sink_count` and `cfg.node_count` are ignored.
    pub fn with_positions(
        cfg: &SimConfig,
        seed: RngSeed,
        sinks: &[Point],
        unknowns: &[Point],
    ) -> Result<NetworkState, NetworkError> {
        let cfg = SimConfig {
            sink_count: sinks.len().max(1),
            node_count: (sinks.len() + unknowns.len()).max(1),
            ..cfg.clone()
        };
        cfg.validate()?;
        build(&cfg, seed, sinks, unknowns)
    }
}

fn build(
    cfg: &SimConfig,
    seed: RngSeed,
    sinks: &[Point],
    unknowns: &[Point],
) -> Result<NetworkState, NetworkError> {
    let (w, h) = (cfg.area.width, cfg.area.height);
    let energy = cfg.energy.initial;
    let k = sinks.len();

    let mut nodes = Vec::with_capacity(sinks.len() * 2 + unknowns.len() + 1);
    let mut push = |pos: Point, role: NodeRole, power: PowerState| {
        let id = NodeId(nodes.len() as u32);
        nodes.push(NodeState {
            id,
            true_position: pos,
            role,
            power,
            energy,
            alive: true,
            log: NodeLog::default(),
        });
        id
    };

    let awake = duty_cycle_awake(k, cfg.duty_cycle_fraction);
    for (p, a) in sinks.iter().zip(&awake) {
        let power = if *a { PowerState::Awake } else { PowerState::Sleep };
        push(*p, NodeRole::Sink, power);
    }
    for p in unknowns {
        push(*p, NodeRole::Unknown, PowerState::Awake);
    }
    let center = Point::new(w / 2.0, h / 2.0);
    let host = sinks
        .iter()
        .enumerate()
        .min_by(|a, b| {
            euclidean(*a.1, center)
                .total_cmp(&euclidean(*b.1, center))
                .then(a.0.cmp(&b.0))
        })
        .map(|(_, p)| *p)
        .unwrap_or(center);
    let super_sink = push(host, NodeRole::SuperSink, PowerState::Awake);
    let mut backup_of = BTreeMap::new();
    for (i, p) in sinks.iter().enumerate() {
        let b = push(*p, NodeRole::Backup, PowerState::Sleep);
        backup_of.insert(NodeId(i as u32), b);
    }

    let mut databases = BTreeMap::new();
    for n in &nodes {
        if n.role != NodeRole::Unknown {
            databases.insert(n.id, Default::default());
        }
    }

    let mut net = NetworkState {
        width: w,
        height: h,
        comm_range: cfg.comm_range,
        nodes,
        super_sink,
        backup_of,
        regions: Vec::new(),
        routing: RoutingTable::default(),
        graph: Graph::default(),
        databases,
        ranging: Ranging::new(
            seed.substream(STREAM_RANGING),
            cfg.ranging_sigma(),
            0.25 * cfg.grid_resolution,
        ),
        energy_model: cfg.energy,
    };
    net.graph = connectivity(&net, cfg.comm_range);
    net.regions = partition(&net, &net.graph);
    net.routing = rebuild_routing_table(&net, &net.graph, 0);
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point, b: Point) -> bool {
        euclidean(a, b) < 1e-9
    }

    #[test]
    fn four_sinks_quarter_the_area() {
        let l = sink_lattice(4, 100.0, 100.0);
        let expected = [(25.0, 25.0), (75.0, 25.0), (25.0, 75.0), (75.0, 75.0)];
        for (p, e) in l.iter().zip(expected) {
            assert!(close(*p, Point::new(e.0, e.1)));
        }
    }

    #[test]
    fn nine_sinks_use_thirds() {
        let l = sink_lattice(9, 100.0, 100.0);
        let step = 100.0 / 3.0;
        assert!(close(l[0], Point::new(100.0 / 6.0, 100.0 / 6.0)));
        assert!(close(l[4], Point::new(100.0 / 6.0 + step, 100.0 / 6.0 + step)));
        assert!(close(l[8], Point::new(100.0 - 100.0 / 6.0, 100.0 - 100.0 / 6.0)));
    }

    #[test]
    fn thirty_sinks_fill_six_by_five() {
        let l = sink_lattice(30, 100.0, 100.0);
        assert_eq!(l.len(), 30);
        let mut xs: Vec<i64> = l.iter().map(|p| (p.x * 1e6).round() as i64).collect();
        let mut ys: Vec<i64> = l.iter().map(|p| (p.y * 1e6).round() as i64).collect();
        xs.sort();
        xs.dedup();
        ys.sort();
        ys.dedup();
        assert_eq!((xs.len(), ys.len()), (6, 5));
        assert!(close(l[29], Point::new(100.0 - 100.0 / 12.0, 90.0)));
    }

    #[test]
    fn non_full_lattice_fills_row_major() {
        // 5 sinks: 3 columns, 2 rows, last row holds two sites.
        let l = sink_lattice(5, 90.0, 100.0);
        assert!(close(l[3], Point::new(15.0, 75.0)));
        assert!(close(l[4], Point::new(45.0, 75.0)));
    }

    #[test]
    fn deploy_assigns_roles() {
        let cfg = SimConfig::default();
        let net = deploy(&cfg, RngSeed(42)).unwrap();
        assert_eq!(net.sink_ids().len(), 9);
        assert_eq!(net.unknown_ids().len(), 76);
        let ss = net.node(net.super_sink()).unwrap();
        assert_eq!(ss.role, NodeRole::SuperSink);
        assert!(close(ss.true_position, net.position(NodeId(4))));
        for s in net.sink_ids() {
            let b = net.node(net.backup_of(s).unwrap()).unwrap();
            assert_eq!((b.role, b.power), (NodeRole::Backup, PowerState::Sleep));
            assert!(close(b.true_position, net.position(s)));
        }
        for u in net.unknown_ids() {
            let p = net.position(u);
            assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
        }
        assert_eq!(net.regions().len(), 9);
    }

    #[test]
    fn deploy_is_deterministic() {
        let cfg = SimConfig::default();
        assert_eq!(deploy(&cfg, RngSeed(9)).unwrap(), deploy(&cfg, RngSeed(9)).unwrap());
        assert_ne!(
            deploy(&cfg, RngSeed(9)).unwrap().nodes,
            deploy(&cfg, RngSeed(10)).unwrap().nodes
        );
    }

    #[test]
    fn too_many_sinks_is_a_config_error() {
        let cfg = SimConfig {
            sink_count: 100,
            node_count: 85,
            ..SimConfig::default()
        };
        assert!(matches!(deploy(&cfg, RngSeed(1)), Err(NetworkError::Config(_))));
    }

    #[test]
    fn grid_placement_stays_in_area() {
        let cfg = SimConfig {
            placement: Placement::Grid,
            ..SimConfig::default()
        };
        let net = deploy(&cfg, RngSeed(3)).unwrap();
        for u in net.unknown_ids() {
            let p = net.position(u);
            assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
        }
    }

    #[test]
    fn duty_cycle_spreads_awake_sinks() {
        assert_eq!(duty_cycle_awake(4, 0.5), vec![false, true, false, true]);
        assert_eq!(duty_cycle_awake(3, 1.0), vec![true; 3]);
        assert_eq!(duty_cycle_awake(2, 0.1), vec![true, false]);
    }
}
