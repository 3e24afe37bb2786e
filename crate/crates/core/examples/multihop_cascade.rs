// A two-hop beacon row: the relay's ring is convolved through the second
// hop. FFT and direct convolution agree; repeated prefixes hit the cache.

use std::error::Error;
use wsnloc::bayes::{
    cascade_with, direct_constraint, BeaconLogRow, ConvolutionMethod, DistanceConvolver, Localizer,
    RangeMeasurement,
};
use wsnloc::geometry::Point;
use wsnloc::grid::GridSpec;

pub fn run() -> Result<f64, Box<dyn Error>> {
    let spec = GridSpec::new(100.0, 100.0, 2.0)?;
    let sink = Point::new(20.0, 20.0);
    let hop1 = RangeMeasurement::new(25.0, 1.5)?;
    let hop2 = RangeMeasurement::new(28.0, 1.5)?;

    let relay = direct_constraint(&spec, sink, hop1)?;
    let conv = DistanceConvolver::new(spec);
    let fft = cascade_with(&conv, &relay, hop2, ConvolutionMethod::Fft)?;
    let direct = cascade_with(&conv, &relay, hop2, ConvolutionMethod::Direct)?;
    let peak = direct.cells().iter().cloned().fold(0.0, f64::max);
    let gap = fft
        .cells()
        .iter()
        .zip(direct.cells())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / peak;
    println!("fft vs direct, max gap relative to peak: {gap:.2e}");

    let mut loc = Localizer::new(spec);
    let row = BeaconLogRow { beacon_position: sink, hops: vec![hop1, hop2, RangeMeasurement::new(20.0, 1.5)?] };
    let sibling = BeaconLogRow { hops: vec![hop1, hop2, RangeMeasurement::new(12.0, 1.5)?], ..row.clone() };
    let post = loc.process_log(&[row])?;
    loc.process_log(&[sibling])?;
    println!(
        "three-hop nodes sharing a relay chain: {} cascades computed, estimate {}",
        loc.cascades_computed(),
        wsnloc::bayes::point_estimate(&post.estimate)
    );
    Ok(gap)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
