// Classical MDS on exact distances, then MDS-MAP over a simulated network.

use std::error::Error;
use wsnloc::config::SimConfig;
use wsnloc::geometry::{NodeId, Point};
use wsnloc::mdsmap::{align_to_anchors, classical_mds, localize_centralized, DistanceMatrix};
use wsnloc::network::deploy;
use wsnloc::rng::RngSeed;

pub fn run() -> Result<f64, Box<dyn Error>> {
    let truth = [
        Point::new(10.0, 10.0),
        Point::new(60.0, 15.0),
        Point::new(35.0, 70.0),
        Point::new(80.0, 80.0),
        Point::new(50.0, 40.0),
    ];
    let map = classical_mds(&DistanceMatrix::from_points(&truth))?;
    let anchors: Vec<(NodeId, Point)> = (0..3).map(|i| (NodeId(i), truth[i as usize])).collect();
    let fit = align_to_anchors(&map, &anchors)?;
    println!("exact instance: residual {:.2e}, reflected {}", fit.residual, fit.reflected);
    for (id, p) in &fit.positions {
        println!("  {id}: {p}");
    }

    let cfg = SimConfig::default();
    let net = deploy(&cfg, RngSeed(42))?;
    let est = localize_centralized(&net)?;
    let mean = est
        .iter()
        .map(|(id, p)| p.distance_to(net.position(*id)))
        .sum::<f64>()
        / est.len() as f64;
    println!("MDS-MAP over {} nodes: mean error {mean:.2} m", net.graph().vertices().count());
    Ok(mean)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
