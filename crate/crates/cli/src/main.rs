use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperflock::config::{self, Preset};
use hyperflock::{exit, run, sweep, verify};
use hyperflock_core::verify::Suite;

#[derive(Parser)]
#[command(name = "hyperflock", version, about = "Cucker-Smale flocking on hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write run.csv, manifest.json and final_state.json.
    Simulate {
        /// JSON config, or a manifest.json from an earlier run. Overrides the preset key by key.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        preset: Option<Preset>,
    },
    /// Run randomized identity and oracle checks.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, value_parser = parse_suite)]
        suite: SuiteArg,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
    },
    /// Run every cell of a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Concurrent cells; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone)]
enum SuiteArg {
    All,
    One(Suite),
}

fn parse_suite(s: &str) -> Result<SuiteArg, String> {
    if s == "all" {
        return Ok(SuiteArg::All);
    }
    Suite::from_name(s).map(SuiteArg::One).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{s}`; expected one of: all, {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HYPERFLOCK_LOG", "warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { config, out, preset } => simulate(config, out, preset),
        Command::Verify { suite, samples, seed } => {
            let suites = match suite {
                SuiteArg::All => Suite::ALL.to_vec(),
                SuiteArg::One(s) => vec![s],
            };
            match verify::run(&suites, samples, seed, &mut std::io::stdout().lock()) {
                Ok(true) => exit::OK,
                Ok(false) => exit::FAILED,
                Err(e) => report(e),
            }
        }
        Command::Sweep { config, out, jobs } => run_sweep(config, out, jobs),
    };
    ExitCode::from(code)
}

fn report(e: anyhow::Error) -> u8 {
    eprintln!("error: {e:#}");
    exit::FAILED
}

fn simulate(path: Option<PathBuf>, out: PathBuf, preset: Option<Preset>) -> u8 {
    let cfg = match config::load(path.as_deref(), preset) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
    };
    match run::run_to_dir(&cfg, &out) {
        Ok(o) if o.status.is_completed() => {
            println!("completed: {} records in {}", o.records, out.display());
            exit::OK
        }
        Ok(o) => {
            eprintln!("run ended early ({:?}); partial output in {}", o.status, out.display());
            exit::FAILED
        }
        Err(e) => report(e),
    }
}

fn run_sweep(path: PathBuf, out: PathBuf, jobs: Option<usize>) -> u8 {
    let cells = match sweep::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
    };
    let total = cells.len();
    match sweep::run(cells, &out, jobs) {
        Ok(results) => {
            let failed: Vec<String> = results.iter().filter(|r| !r.ok()).map(|r| r.cell.dir_name()).collect();
            println!(
                "{} of {total} cells completed; summary in {}",
                total - failed.len(),
                out.join(sweep::SUMMARY_CSV).display()
            );
            if failed.is_empty() {
                exit::OK
            } else {
                eprintln!("failed cells: {}", failed.join(", "));
                exit::FAILED
            }
        }
        Err(e) => report(e),
    }
}
