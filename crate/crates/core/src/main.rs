use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdlab_core::cli::{parse_case, run_experiment, run_reproduce};
use fdlab_core::config::{ExperimentKind, RunConfig};
use fdlab_core::{Error, Result};

#[derive(Parser)]
#[command(name = "fdlab", version, about = "Radial fast diffusion laboratory")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampled checks; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by --config.
    Simulate,
    /// Run a reproduction suite, or `all`.
    Reproduce { suite: String },
    /// Solve for the stationary profile.
    Stationary,
    /// Weighted spectrum of the linearization at the stationary profile.
    Spectrum,
    /// Interaction integrals for two-bubble configurations.
    Bubbles {
        /// Dimension of the ambient space.
        #[arg(long = "dim")]
        n: Option<usize>,
        /// Restrict to one case (A1, A2, B1, B2); repeatable.
        #[arg(long)]
        case: Vec<String>,
    },
    /// Classify the decay of a series read from a CSV with `t` and `e` columns.
    FitRate {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Stabilized critical run with bubble fits.
    Blowup,
    /// Sampled checks of the elementary inequalities.
    Inequalities,
}

fn load(cli: &Cli, kind: Option<ExperimentKind>) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, kind) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(kind)) => kind.default_config(),
        (None, None) => return Err(Error::config("config", "simulate needs --config PATH")),
    };
    if let Some(kind) = kind {
        if cli.config.is_some() && cfg.experiment != kind {
            return Err(Error::config(
                "experiment",
                format!("config describes `{}`, command expects `{}`", cfg.experiment.name(), kind.name()),
            ));
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Error::config("threads", "must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::config("threads", e.to_string()))?;
    }
    let kind = match &cli.command {
        Command::Simulate => None,
        Command::Reproduce { suite } => {
            let cfg = match &cli.config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            let cfg = RunConfig { seed: cli.seed.unwrap_or(cfg.seed), ..cfg };
            let (_, reports) = run_reproduce(suite, &cfg, &cli.out)?;
            for r in &reports {
                println!("{r}");
            }
            return Ok(reports.iter().all(|r| r.passed()));
        }
        Command::Stationary => Some(ExperimentKind::Stationary),
        Command::Spectrum => Some(ExperimentKind::Spectrum),
        Command::Bubbles { .. } => Some(ExperimentKind::BubblesSweep),
        Command::FitRate { .. } => Some(ExperimentKind::FitRate),
        Command::Blowup => Some(ExperimentKind::BlowupDemo),
        Command::Inequalities => Some(ExperimentKind::VerifyInequalities),
    };
    let mut cfg = load(cli, kind)?;
    match &cli.command {
        Command::Bubbles { n, case } => {
            if let Some(n) = n {
                cfg.grid.n = *n;
            }
            if !case.is_empty() {
                cfg.sweep_cases = case.iter().map(|c| parse_case(c)).collect::<Result<_>>()?;
            }
        }
        Command::FitRate { input: Some(path) } => cfg.input = Some(path.clone()),
        _ => {}
    }
    let manifest = run_experiment(&cfg, &cli.out)?;
    println!("{}", serde_json::to_string_pretty(&manifest.summary)?);
    eprintln!("wrote {}", cli.out.join("manifest.json").display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
