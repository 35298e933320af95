use clap::{Parser, Subcommand};
use liftquad_cli::commands;
use liftquad_cli::config::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Benchmark harness for the lifted quadrotor model.
#[derive(Parser)]
#[command(name = "liftquad", version, about)]
struct Cli {
    /// Configuration file (TOML); the built-in benchmark config is used
    /// when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the configured reference model (full | simplified).
    #[arg(long, global = true, value_name = "MODEL")]
    reference_model: Option<String>,

    /// Worker threads for parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the reference model and the lifted models; write
    /// trajectories and model matrices.
    Simulate,
    /// Approximation-error sweep over the truncation grid with plots and
    /// summary tables.
    Sweep,
    /// Fit the data-driven dictionary baseline and tabulate it against the
    /// lifted models.
    CompareBaseline,
    /// Run every invariant suite; exit 1 on any failure.
    Audit,
    /// Controllability rank report per grid point.
    Controllability,
    /// Input recovery via least squares (consistency and paper-literal
    /// modes).
    RecoverInput,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::built_in_default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(model) = &cli.reference_model {
        cfg.sim.reference_model = model.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("thread-pool error: {e}");
            return ExitCode::from(1);
        }
    };

    let result = pool.install(|| match cli.command {
        Command::Simulate => commands::simulate::run(&cfg, &cli.out),
        Command::Sweep => commands::sweep::run(&cfg, &cli.out),
        Command::CompareBaseline => commands::compare::run(&cfg, &cli.out),
        Command::Audit => commands::audit::run(&cfg, &cli.out),
        Command::Controllability => commands::controllability::run(&cfg, &cli.out),
        Command::RecoverInput => commands::recover::run(&cfg, &cli.out),
    });

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
