use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use wsnloc::config::{parse_schemes, SimConfig};
use wsnloc::experiments::{run_reps, run_sweep, write_csv, SweepParam, SweepSpec};
use wsnloc::network::Simulation;

#[derive(Parser)]
#[command(name = "wsnloc", about = "WSN localization simulator")]
struct Cli {
    /// Print the default configuration file and exit.
    #[arg(long)]
    print_default_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration for `reps` repetitions.
    Run(Common),
    /// Sweep a parameter over a preset or explicit value list.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// fig4, fig5 or fig6.
        #[arg(long)]
        preset: Option<String>,
        /// sink_count, comm_range or node_count (with --values).
        #[arg(long)]
        param: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma separated: centralized,diffusion,bounding_box,hybrid.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a per-round JSON-lines trace of the first repetition.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    grid_res: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<SimConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                SimConfig::from_toml(&text).map_err(|e| e.to_string())?
            }
            None => SimConfig::default(),
        };
        if let Some(s) = &self.schemes {
            cfg.schemes = parse_schemes(s).map_err(|e| e.to_string())?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.reps {
            cfg.reps = r;
        }
        if let Some(g) = self.grid_res {
            cfg.grid_resolution = g;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn write_trace(&self, cfg: &SimConfig) -> Result<(), String> {
        let Some(path) = &self.trace else { return Ok(()) };
        let mut sim = Simulation::new(cfg, wsnloc::experiments::rep_seed(cfg.seed, 0))
            .map_err(|e| e.to_string())?
            .with_trace(true);
        sim.run(cfg.rounds);
        let f = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        sim.write_trace(BufWriter::new(f)).map_err(|e| e.to_string())
    }
}

fn emit(out: &Option<PathBuf>, rows: &[wsnloc::experiments::ErrorRecord]) -> Result<(), String> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| format!("{}: {e}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    write_csv(sink, rows).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = if cli.print_default_config {
        print!("{}", SimConfig::default().to_toml());
        Ok(())
    } else {
        match cli.command {
            None => Err("expected a subcommand: run or sweep".to_string()),
            Some(Command::Run(common)) => common.config().and_then(|cfg| {
                common.write_trace(&cfg)?;
                let rows = run_reps(&cfg).map_err(|e| e.to_string())?;
                emit(&common.out, &rows)
            }),
            Some(Command::Sweep { common, preset, param, values }) => common.config().and_then(|cfg| {
                let spec = match (preset, param) {
                    (Some(p), None) => SweepSpec::preset(&p),
                    (None, Some(p)) => p
                        .parse::<SweepParam>()
                        .and_then(|p| SweepSpec::new(p, values)),
                    _ => return Err("give either --preset or --param with --values".into()),
                }
                .map_err(|e| e.to_string())?;
                common.write_trace(&cfg)?;
                let rows = run_sweep(&cfg, &spec).map_err(|e| e.to_string())?;
                emit(&common.out, &rows)
            }),
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wsnloc: {e}");
            ExitCode::FAILURE
        }
    }
}
