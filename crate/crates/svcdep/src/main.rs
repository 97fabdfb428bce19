use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use svcdep::eval_knob_grid;
use svcdep::{run, RunConfig, RunError};

/// Dependency-graph contrastive anomaly detection for microservice telemetry.
#[derive(Parser)]
#[command(name = "svcdep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `paths.out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed (overrides `seed` and `scenario.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured scenario into edges.csv + metrics.csv.
    Gen(Common),
    /// Train the encoder; writes checkpoint.json + history.csv.
    Train(Common),
    /// Score validation + test, pick the threshold on validation, report on test.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Defaults to checkpoint.json in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run a grid of experiments; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Knob to sweep (replaces the config's axes), e.g. gcn_layers.
        #[arg(long, requires = "grid")]
        knob: Option<String>,
        /// Comma-separated values for --knob.
        #[arg(long, value_delimiter = ',', requires = "knob")]
        grid: Vec<f64>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// gen + train + eval in one invocation.
    E2e(Common),
}

fn load(common: &Common) -> Result<RunConfig, RunError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.paths.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.override_seed(seed);
    }
    Ok(cfg)
}

fn dispatch(cmd: Command) -> Result<run::Output, RunError> {
    match cmd {
        Command::Gen(c) => run::gen(&load(&c)?),
        Command::Train(c) => run::train(&load(&c)?),
        Command::Eval { common, checkpoint } => run::eval(&load(&common)?, checkpoint.as_deref()),
        Command::Sweep { common, knob, grid, jobs } => {
            let cfg = load(&common)?;
            let spec = match knob {
                Some(k) => eval_knob_grid(&k, grid)?,
                None => cfg.sweep.spec(),
            };
            run::sweep(&cfg, &spec, jobs)
        }
        Command::E2e(c) => run::e2e(&load(&c)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
