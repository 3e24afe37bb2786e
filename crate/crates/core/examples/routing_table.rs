// The super-sink's sink-to-sink routing table, and how it follows a sink
// going to sleep.

use std::error::Error;
use wsnloc::config::SimConfig;
use wsnloc::geometry::NodeId;
use wsnloc::network::{deploy, PowerState, Route};
use wsnloc::rng::RngSeed;

pub fn run() -> Result<usize, Box<dyn Error>> {
    let cfg = SimConfig {
        sink_count: 4,
        ..SimConfig::default()
    };
    let mut net = deploy(&cfg, RngSeed(1))?;
    let show = |net: &wsnloc::network::NetworkState| {
        println!("routing table v{}:", net.routing().version());
        for ((s, t), r) in net.routing().entries() {
            match r {
                Route::Reachable { next_hop, hops } => println!("  {s} -> {t}: via {next_hop}, {hops} hops"),
                Route::Unreachable => println!("  {s} -> {t}: unreachable"),
            }
        }
    };
    show(&net);
    net.set_power(NodeId(3), PowerState::Sleep)?;
    net.refresh_topology();
    show(&net);
    Ok(net.routing().len())
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
