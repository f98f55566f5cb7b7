//! `mpf`: product-formula and multi-product-formula experiments.
//!
//! Exit status: 0 when every checked inequality holds, 1 on a violation,
//! 2 on configuration or input errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CommandError, FormulaOverrides, Output};
use config::{ConfigError, ExperimentConfig, HamiltonianSource, NormModeArg, TauGrid};

#[derive(Parser, Debug)]
#[command(name = "mpf", version, about = "Product-formula and multi-product-formula error and cost experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Experiment config (JSON for .json files, TOML otherwise).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    norm_mode: Option<NormModeArg>,
    #[arg(long, global = true)]
    dense_cap: Option<usize>,
    /// Highest BCH / nested-commutator order evaluated.
    #[arg(long, global = true)]
    qmax: Option<usize>,
    /// Product formula order.
    #[arg(long, global = true)]
    p: Option<usize>,
    /// Number of Richardson terms.
    #[arg(long = "J", global = true)]
    terms: Option<usize>,
    /// Comma-separated step multipliers.
    #[arg(long, global = true, value_delimiter = ',')]
    k_list: Option<Vec<u32>>,
    /// Geometric time-step grid `min:max:points`.
    #[arg(long, global = true)]
    tau_grid: Option<TauGrid>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Hamiltonian document to load instead of the configured family.
    #[arg(long, global = true)]
    hamiltonian: Option<PathBuf>,
    /// Size of the configured Hamiltonian family.
    #[arg(long = "sites", global = true)]
    sites: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct FormulaArgs {
    /// System size; defaults to the configured Hamiltonian.
    #[arg(long = "N")]
    n_sites: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
}

impl From<&FormulaArgs> for FormulaOverrides {
    fn from(a: &FormulaArgs) -> Self {
        FormulaOverrides {
            n_sites: a.n_sites,
            g: a.g,
            k: a.k,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Slope fits of the product formula and MPF errors against the time step.
    VerifyOrder,
    /// Truncation, MPF error, commutator and BCH coefficient inequalities.
    VerifyBounds,
    /// Step count, query complexity, gate-count table and sweeps.
    Cost,
    /// Gate-count table as CSV.
    Table1(FormulaArgs),
    /// BCH coefficient norms, bounds and extensiveness.
    Phi,
    /// Nested-commutator sums and μ.
    Alpha,
    /// Formula-level bound reports.
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Subcommand, Debug)]
enum BoundsCommand {
    /// Full bound report as JSON.
    Report(FormulaArgs),
    /// Gate-count table as CSV.
    Table1(FormulaArgs),
}

fn resolve_config(g: &GlobalArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(path) = &g.hamiltonian {
        cfg.hamiltonian = HamiltonianSource::File { path: path.clone() };
    }
    if let Some(n) = g.sites {
        match &mut cfg.hamiltonian {
            HamiltonianSource::Heisenberg { n: size, .. } | HamiltonianSource::LongRange { n: size, .. } => *size = n,
            HamiltonianSource::File { .. } => {
                return Err(ConfigError::Invalid("--sites does not apply to a Hamiltonian file".into()))
            }
        }
    }
    if let Some(v) = g.norm_mode {
        cfg.norm_mode = v;
    }
    if let Some(v) = g.dense_cap {
        cfg.dense_cap = v;
    }
    if let Some(v) = g.qmax {
        cfg.q_max = v;
    }
    if let Some(v) = g.p {
        cfg.p = v;
    }
    if let Some(v) = g.terms {
        cfg.terms = v;
    }
    if let Some(v) = &g.k_list {
        cfg.k_list = Some(v.clone());
    }
    if let Some(v) = g.tau_grid {
        cfg.tau_grid = v;
    }
    if let Some(v) = g.eps {
        cfg.eps = v;
    }
    if let Some(v) = g.t {
        cfg.t = v;
    }
    if let Some(v) = &g.out {
        cfg.out_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, CommandError> {
    let cfg = resolve_config(&cli.global)?;
    let out = Output::new(&cfg.out_dir)?;
    out.json("config.json", &cfg)?;
    match &cli.command {
        Command::VerifyOrder => commands::verify_order(&cfg, &out),
        Command::VerifyBounds => commands::verify_bounds(&cfg, &out),
        Command::Cost => commands::cost(&cfg, &out),
        Command::Table1(a) | Command::Bounds(BoundsCommand::Table1(a)) => commands::table1(&cfg, &a.into(), &out),
        Command::Phi => commands::phi(&cfg, &out),
        Command::Alpha => commands::alpha(&cfg, &out),
        Command::Bounds(BoundsCommand::Report(a)) => commands::bound_report(&cfg, &a.into(), &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more inequalities were violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
