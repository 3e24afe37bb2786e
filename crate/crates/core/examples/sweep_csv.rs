// A reduced node-density sweep written as CSV to stdout, plus per-point
// means. Pass a preset name (fig4, fig5, fig6) to run that sweep instead.

use std::error::Error;
use wsnloc::config::{Scheme, SimConfig};
use wsnloc::experiments::{run_sweep, summarize, write_csv, SweepParam, SweepSpec};

pub fn run(preset: Option<&str>) -> Result<usize, Box<dyn Error>> {
    let (base, sweep) = match preset {
        Some(p) => (SimConfig::default(), SweepSpec::preset(p)?),
        None => (
            SimConfig {
                reps: 2,
                schemes: vec![Scheme::Hybrid, Scheme::BoundingBox],
                ..SimConfig::default()
            },
            SweepSpec::new(SweepParam::NodeCount, vec![40.0, 60.0])?,
        ),
    };
    let rows = run_sweep(&base, &sweep)?;
    write_csv(std::io::stdout().lock(), &rows)?;
    for (scheme, series) in summarize(&rows) {
        let pts: Vec<String> = series.iter().map(|(v, e)| format!("{v}:{e:.4}")).collect();
        eprintln!("{scheme}: {}", pts.join("  "));
    }
    Ok(rows.len())
}

fn main() -> Result<(), Box<dyn Error>> {
    let preset = std::env::args().nth(1);
    run(preset.as_deref()).map(|_| ())
}
