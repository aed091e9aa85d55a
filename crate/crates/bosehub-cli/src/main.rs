//! `bosehub` — ground-state phase diagnostics for the one-dimensional
//! disordered attractive Bose-Hubbard chain.
//!
//! Subcommands: `ground-state`, `phase-diagram`, `critical-tau`,
//! `compare-pt`. Options come from an optional `--config` file plus flags;
//! flags win. Exit codes: 0 success, 2 configuration error, 3 compute error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bosehub::config::{Command, GridSpec, RunConfig};
use bosehub::run::execute;
use bosehub::Error;

#[derive(Parser)]
#[command(
    name = "bosehub",
    version,
    about = "Exact diagonalization and perturbation theory for the 1D disordered attractive Bose-Hubbard chain",
    after_help = "Exit codes: 0 success, 2 config error, 3 compute error."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one ground state and export observables and occupation densities
    #[command(name = "ground-state")]
    GroundState(CommonArgs),
    /// Disorder-averaged IPR/energy scan over a (tau, delta) grid
    #[command(name = "phase-diagram")]
    PhaseDiagram(CommonArgs),
    /// Critical hopping frequencies tau_c^{s,r} over boson numbers and disorder
    #[command(name = "critical-tau")]
    CriticalTau(CommonArgs),
    /// Overlaps and energy gaps between exact and analytic states per cell
    #[command(name = "compare-pt")]
    ComparePt(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Plain-text config file (key = value); flags override file values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Number of chain sites
    #[arg(long = "L", value_name = "SITES")]
    l: Option<usize>,

    /// Total boson number
    #[arg(long = "N", value_name = "BOSONS")]
    n: Option<u32>,

    /// Chain boundary: open | periodic
    #[arg(long)]
    boundary: Option<String>,

    /// Scaled hopping frequency tau = J / U(N-1)
    #[arg(long)]
    tau: Option<f64>,

    /// Scaled disorder strength delta = D / U(N-1)
    #[arg(long)]
    delta: Option<f64>,

    /// Hopping grid as lo:hi:count:{log|lin}
    #[arg(long = "tau-grid", value_name = "SPEC")]
    tau_grid: Option<String>,

    /// Disorder grid as lo:hi:count:{log|lin}
    #[arg(long = "delta-grid", value_name = "SPEC")]
    delta_grid: Option<String>,

    /// Comma-separated boson numbers for critical-tau sweeps
    #[arg(long = "n-list", value_delimiter = ',', value_name = "N,...")]
    n_list: Option<Vec<u32>>,

    /// Disorder realizations per cell
    #[arg(long)]
    realizations: Option<u32>,

    /// Master seed; every random draw derives from it
    #[arg(long)]
    seed: Option<u64>,

    /// Worker thread cap
    #[arg(long, env = "BOSEHUB_WORKERS")]
    workers: Option<usize>,

    /// Output root directory (one subdirectory per run)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also write the raw ground-state vector (ground-state command)
    #[arg(long = "dump-state")]
    dump_state: bool,
}

fn build_config(command: Command, args: &CommonArgs) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        cfg.apply_file(&text)?;
    }
    if let Some(l) = args.l {
        cfg.l = l;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(b) = &args.boundary {
        cfg.boundary = b.parse()?;
    }
    if args.tau.is_some() {
        cfg.tau = args.tau;
    }
    if args.delta.is_some() {
        cfg.delta = args.delta;
    }
    if let Some(g) = &args.tau_grid {
        cfg.tau_grid = Some(g.parse::<GridSpec>()?);
    }
    if let Some(g) = &args.delta_grid {
        cfg.delta_grid = Some(g.parse::<GridSpec>()?);
    }
    if let Some(list) = &args.n_list {
        cfg.n_list = Some(list.clone());
    }
    if let Some(r) = args.realizations {
        cfg.realizations = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if args.dump_state {
        cfg.dump_state = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::GroundState(a) => (Command::GroundState, a),
        Cmd::PhaseDiagram(a) => (Command::PhaseDiagram, a),
        Cmd::CriticalTau(a) => (Command::CriticalTau, a),
        Cmd::ComparePt(a) => (Command::ComparePt, a),
    };
    let cfg = match build_config(command, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("bosehub: config error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&cfg) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bosehub: {e}");
            ExitCode::from(3)
        }
    }
}
