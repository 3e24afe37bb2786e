// A sink fails mid-run; the super-sink alerts its backup, which takes over
// with the mirrored database. Localization output is unchanged.

use std::error::Error;
use wsnloc::bayes::Localizer;
use wsnloc::config::{FailureInjection, SimConfig};
use wsnloc::geometry::NodeId;
use wsnloc::grid::GridSpec;
use wsnloc::network::{localize_hybrid, Event, Simulation};
use wsnloc::rng::RngSeed;

pub fn run() -> Result<bool, Box<dyn Error>> {
    let base = SimConfig::default();
    let failing = SimConfig {
        failure_injections: vec![FailureInjection { node: NodeId(4), round: 5 }],
        ..base.clone()
    };
    let spec = GridSpec::new(100.0, 100.0, base.grid_resolution)?;
    let mut estimates = Vec::new();
    for cfg in [&base, &failing] {
        let mut sim = Simulation::new(cfg, RngSeed(42))?.with_trace(true);
        sim.run(cfg.rounds);
        for (round, e) in sim.events() {
            if !matches!(e, Event::MirrorSynced { .. }) {
                println!("  round {round}: {e:?}");
            }
        }
        println!("alerts {}, takeovers {}", sim.alerts_sent(), sim.takeovers());
        let mut loc = Localizer::new(spec);
        estimates.push(localize_hybrid(sim.network(), &spec, cfg.estimator, &mut loc)?.estimates);
    }
    let same = estimates[0] == estimates[1];
    println!("estimates identical after failover: {same}");
    Ok(same)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
