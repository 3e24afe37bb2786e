// Configuration files: partial files fill in defaults, unknown keys fail.

use std::error::Error;
use wsnloc::config::SimConfig;

pub fn run() -> Result<SimConfig, Box<dyn Error>> {
    let text = r#"
        sink_count = 16
        comm_range = 40.0
        schemes = ["hybrid", "bounding_box"]

        [energy]
        threshold = 0.3
    "#;
    let cfg = SimConfig::from_toml(text)?;
    println!("{}", cfg.to_toml());

    match SimConfig::from_toml("sinks = 4\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => return Err("typo accepted".into()),
    }
    Ok(cfg)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
