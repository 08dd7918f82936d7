//! `tissuelight`: generate Sobolev datasets, run simulations, check the
//! Monte Carlo derivative against finite differences, and evaluate
//! surrogate predictions.

mod config;
mod evaluate;
mod generate;
mod simulate;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tissuelight_core::GeneratorId;

use config::{parse_grid, DirectionSource, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "tissuelight", version, about = "Differentiable Monte Carlo light transport for tissue phantoms")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; every random stream of the run derives from it
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Photon histories per simulation.
    #[arg(long, global = true)]
    photons: Option<u64>,
    /// Grid size, `N` or `NXxNZ`; spacing comes from the configuration.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Generator pairing: id1, id2 or ood.
    #[arg(long, global = true)]
    generator: Option<GeneratorId>,
    /// Sobolev weight α.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// σ onset `a` of both loss terms.
    #[arg(long, global = true)]
    sigma_a: Option<f64>,
    /// σ cutoff `c` of the energy term.
    #[arg(long, global = true)]
    sigma_c: Option<f64>,
    /// σ cutoff `c` of the derivative term.
    #[arg(long, global = true)]
    sigma_grad_c: Option<f64>,
    /// Relative finite-difference step.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "TISSUELIGHT_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset of samples plus a manifest.
    Generate {
        /// Samples per generator pairing in one flat directory (default:
        /// the train/val/test reference split).
        #[arg(long)]
        per_generator: Option<usize>,
    },
    /// Simulate absorbed energy and its directional derivative.
    Simulate {
        /// `.dlss` file supplying the optical image.
        #[arg(long)]
        phantom: Option<PathBuf>,
        #[arg(long, value_enum)]
        direction: Option<DirectionSource>,
    },
    /// Compare the Monte Carlo derivative with central finite differences.
    ValidateJvp {
        /// Maximum relative L2 error.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum)]
        direction: Option<DirectionSource>,
    },
    /// Normalized errors, gains and depth profiles of two prediction sets.
    Evaluate {
        /// Dataset directory containing `manifest.json`
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Directory of `<sample id>.dlfd` predictions of the baseline.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Directory of `<sample id>.dlfd` predictions of the compared model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Split to evaluate (default: `test` when present, else all samples)
        #[arg(long)]
        split: Option<String>,
    },
    /// Print the resolved configuration as TOML.
    Config,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
    /// A check ran and failed.
    Validation(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Validation(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "input/output error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl From<tissuelight_core::Error> for CliError {
    fn from(e: tissuelight_core::Error) -> Self {
        use tissuelight_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidConfig(_) | E::InvalidGrid(_) => CliError::Config(msg),
            E::Io { .. } | E::Format { .. } | E::UnsupportedVersion { .. } | E::Manifest { .. } => CliError::Io(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

/// Merges flags into the configuration for `command`.
fn resolve(global: &GlobalArgs, command: &Command) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(global.config.as_deref())?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(t) = global.threads {
        cfg.threads = Some(t);
    }
    if let Some(a) = global.alpha {
        cfg.loss.alpha = a;
    }
    if let Some(a) = global.sigma_a {
        cfg.loss.sigma_energy.a = a;
        cfg.loss.sigma_grad.a = a;
    }
    if let Some(c) = global.sigma_c {
        cfg.loss.sigma_energy.c = c;
    }
    if let Some(c) = global.sigma_grad_c {
        cfg.loss.sigma_grad.c = c;
    }
    match command {
        Command::ValidateJvp { tolerance, direction } => {
            let v = &mut cfg.validate_jvp;
            if let Some(g) = &global.grid {
                v.grid = parse_grid(g, &v.grid)?;
            }
            if let Some(p) = global.photons {
                v.photons = p;
            }
            if let Some(g) = global.generator {
                v.generator = g;
            }
            if let Some(e) = global.epsilon {
                v.epsilon = e;
            }
            if let Some(t) = tolerance {
                v.tolerance = *t;
            }
            if let Some(d) = direction {
                v.direction = *d;
            }
        }
        _ => {
            if let Some(g) = &global.grid {
                cfg.grid = parse_grid(g, &cfg.grid)?;
            }
            if let Some(p) = global.photons {
                cfg.sim.photon_count = p;
            }
        }
    }
    match command {
        Command::Generate { per_generator } => {
            if let Some(n) = per_generator {
                cfg.generate.per_generator = Some(*n);
            }
            if let Some(g) = global.generator {
                cfg.generate.generator = Some(g);
            }
        }
        Command::Simulate { phantom, direction } => {
            if let Some(g) = global.generator {
                cfg.simulate.generator = g;
            }
            if let Some(p) = phantom {
                cfg.simulate.phantom = Some(p.clone());
            }
            if let Some(d) = direction {
                cfg.simulate.direction = *d;
            }
        }
        Command::Evaluate {
            dataset,
            baseline,
            model,
            split,
        } => {
            let e = &mut cfg.evaluate;
            for (slot, value) in [(&mut e.dataset, dataset), (&mut e.baseline, baseline), (&mut e.model, model)] {
                if let Some(v) = value {
                    *slot = Some(v.clone());
                }
            }
            if let Some(s) = split {
                e.split = Some(s.clone());
            }
        }
        Command::ValidateJvp { .. } | Command::Config => {}
    }
    cfg.loss.validate()?;
    Ok(cfg)
}

fn require_out(global: &GlobalArgs) -> Result<&Path, CliError> {
    global
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("--out is required for this command".into()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli.global, &cli.command)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let out = require_out(&cli.global)?;
    cfg.echo(out)?;
    match cli.command {
        Command::Generate { .. } => generate::run(&cfg, out),
        Command::Simulate { .. } => simulate::run(&cfg, out),
        Command::ValidateJvp { .. } => validate::run(&cfg, out),
        Command::Evaluate { .. } => evaluate::run(&cfg, out),
        Command::Config => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
