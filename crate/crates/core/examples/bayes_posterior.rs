// Three single-hop range readings intersected into a grid posterior.

use std::error::Error;
use wsnloc::bayes::{direct_constraint, intersect, point_estimate, uniform_prior, RangeMeasurement};
use wsnloc::geometry::{euclidean, Point};
use wsnloc::grid::GridSpec;

pub fn run() -> Result<Point, Box<dyn Error>> {
    let spec = GridSpec::new(100.0, 100.0, 1.0)?;
    let truth = Point::new(41.0, 63.0);
    let beacons = [Point::new(20.0, 50.0), Point::new(70.0, 45.0), Point::new(45.0, 90.0)];

    let mut posterior = uniform_prior(&spec);
    for b in beacons {
        let m = RangeMeasurement::new(euclidean(b, truth) + 0.4, 1.0)?;
        posterior = intersect(&posterior, &direct_constraint(&spec, b, m)?)?;
        println!("after beacon {b}: estimate {}", point_estimate(&posterior));
    }
    let est = point_estimate(&posterior);
    println!("truth {truth}, error {:.2} m", euclidean(est, truth));
    Ok(est)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
