use wsnloc::config::{EnergyModel, FailureInjection, SimConfig};
use wsnloc::geometry::NodeId;
use wsnloc::network::{Event, NodeRole, PowerState, Simulation};
use wsnloc::rng::RngSeed;

fn draining() -> SimConfig {
    // Budget small enough that busy sinks cross the threshold mid-run.
    SimConfig {
        energy: EnergyModel {
            initial: 0.25,
            tx_cost: 2e-3,
            rx_cost: 1e-3,
            threshold: 0.2,
        },
        rounds: 12,
        ..SimConfig::default()
    }
}

#[test]
fn energy_never_increases() {
    for seed in 0..5 {
        let cfg = draining();
        let mut sim = Simulation::new(&cfg, RngSeed(seed)).unwrap();
        let mut last: Vec<f64> = sim.network().nodes().iter().map(|n| n.energy).collect();
        for _ in 0..cfg.rounds {
            sim.step();
            for (n, prev) in sim.network().nodes().iter().zip(&mut last) {
                assert!(n.energy <= *prev && n.energy >= 0.0);
                *prev = n.energy;
            }
        }
    }
}

#[test]
fn every_alert_precedes_one_takeover() {
    let mut total = 0;
    for seed in 0..5 {
        let cfg = draining();
        let mut sim = Simulation::new(&cfg, RngSeed(seed)).unwrap();
        sim.run(cfg.rounds);
        let events = sim.events();
        for (round, e) in events {
            if let Event::AlertSent { backup, .. } = e {
                total += 1;
                if *round == cfg.rounds {
                    continue;
                }
                let woke = events
                    .iter()
                    .filter(|(r, e)| *r == round + 1 && *e == Event::Woke { node: *backup })
                    .count();
                let took = events
                    .iter()
                    .filter(|(r, e)| *r == round + 1 && matches!(e, Event::TookOver { node, .. } if node == backup))
                    .count();
                assert_eq!((woke, took), (1, 1), "seed {seed} round {round}");
            }
        }
    }
    assert!(total > 0, "scenario never triggered a failover");
}

#[test]
fn regions_stay_within_range() {
    let cfg = draining();
    let mut sim = Simulation::new(&cfg, RngSeed(3)).unwrap();
    for _ in 0..cfg.rounds {
        sim.step();
        let net = sim.network();
        for r in net.regions() {
            let sink = net.node(r.sink).unwrap();
            assert_eq!(sink.role, NodeRole::Sink);
            for m in &r.members {
                assert!(net.position(*m).distance_to(sink.true_position) <= cfg.comm_range);
            }
        }
    }
}

#[test]
fn unknowns_stay_awake() {
    let cfg = SimConfig {
        duty_cycle_fraction: 0.5,
        ..draining()
    };
    let mut sim = Simulation::new(&cfg, RngSeed(8)).unwrap();
    sim.run(cfg.rounds);
    for n in sim.network().nodes() {
        if n.role == NodeRole::Unknown {
            assert_eq!(n.power, PowerState::Awake);
        }
    }
}

#[test]
fn stale_backup_still_fails_over() {
    let cfg = SimConfig {
        sync_every: 3,
        failure_injections: vec![FailureInjection { node: NodeId(4), round: 2 }],
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(&cfg, RngSeed(42)).unwrap();
    sim.run(cfg.rounds);
    assert_eq!((sim.alerts_sent(), sim.takeovers()), (1, 1));
}

#[test]
fn same_seed_same_trace() {
    let cfg = draining();
    let trace = |seed| {
        let mut sim = Simulation::new(&cfg, RngSeed(seed)).unwrap().with_trace(true);
        sim.run(cfg.rounds);
        let mut buf = Vec::new();
        sim.write_trace(&mut buf).unwrap();
        buf
    };
    assert_eq!(trace(11), trace(11));
    assert_ne!(trace(11), trace(12));
}
