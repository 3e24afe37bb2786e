// Every scheme on one simulated instance.

use std::error::Error;
use wsnloc::config::SimConfig;
use wsnloc::experiments::run_once;
use wsnloc::rng::RngSeed;

pub fn run() -> Result<usize, Box<dyn Error>> {
    let cfg = SimConfig::default();
    let records = run_once(&cfg, RngSeed(42))?;
    println!("{:<14} {:>10} {:>10}  flags", "scheme", "err / CR", "err (m)");
    for r in &records {
        println!("{:<14} {:>10.4} {:>10.3}  {}", r.scheme, r.mean_err_norm, r.mean_err_m, r.flags);
    }
    Ok(records.len())
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
