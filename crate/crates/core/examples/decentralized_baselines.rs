// Diffusion and bounding-box estimates on the same network.

use std::error::Error;
use wsnloc::baselines::{bounding_box, diffusion};
use wsnloc::config::SimConfig;
use wsnloc::experiments::localization_error;
use wsnloc::network::deploy;
use wsnloc::rng::RngSeed;

pub fn run() -> Result<(f64, f64), Box<dyn Error>> {
    let cfg = SimConfig::default();
    let net = deploy(&cfg, RngSeed(7))?;
    let mean_err = |est: &std::collections::BTreeMap<_, wsnloc::geometry::Point>| {
        est.iter()
            .map(|(id, p)| localization_error(net.position(*id), *p, cfg.comm_range))
            .sum::<f64>()
            / est.len() as f64
    };

    let d = diffusion(&net, &cfg.baselines);
    println!(
        "diffusion: {} rounds, converged {}, {} isolated, mean error {:.3} CR",
        d.iterations,
        d.converged,
        d.isolated.len(),
        mean_err(&d.estimates)
    );
    let b = bounding_box(&net);
    println!(
        "bounding box: {} nodes heard no sink, mean error {:.3} CR",
        b.flagged.len(),
        mean_err(&b.estimates)
    );
    Ok((mean_err(&d.estimates), mean_err(&b.estimates)))
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
