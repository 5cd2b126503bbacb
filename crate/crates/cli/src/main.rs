//! `qwalk`: run coined quantum walks, sweep defect phases, check the
//! two-walker / 2D-walker isomorphism.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use qwalk::QwalkError;

use config::{invalid, parse_angle_str, DefectKind, Invalid, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Discrete-time coined quantum walks with phase defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one walk and write its final distribution and per-step summary.
    Run(RunArgs),
    /// Run one walk per defect phase in the grid and tabulate the observables.
    Sweep(SweepArgs),
    /// Compare the two-walker step with the 2D step on random coins.
    Isocheck(IsoArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "QWALK_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    steps: Option<i64>,
    /// Defect phase, e.g. `pi:0.75` or `2.356`.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// none, line_y, cross_xy or point.
    #[arg(long)]
    defect: Option<String>,
    /// Distribution CSV to compare against (1-norm distance).
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    steps: Option<i64>,
    /// Comma-separated phase grid; replaces `phis` from the config.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi: Vec<String>,
    #[arg(long)]
    defect: Option<String>,
}

#[derive(Debug, Args)]
struct IsoArgs {
    #[command(flatten)]
    common: Common,
    /// Halfwidth of each 1D walker.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Seed for the random coins (default 7).
    #[arg(long)]
    seed: Option<u64>,
}

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    Ok(cfg)
}

fn set_defect(cfg: &mut RunConfig, defect: &Option<String>) -> Result<()> {
    if let Some(d) = defect {
        cfg.defect = DefectKind::parse(d)?;
    }
    Ok(())
}

fn resolve(command: &Command) -> Result<RunConfig> {
    let cfg = match command {
        Command::Run(a) => {
            let mut cfg = base_config(&a.common)?;
            if let Some(t) = a.steps {
                cfg.set_steps(t)?;
            }
            if let Some(phi) = &a.phi {
                cfg.phi = parse_angle_str("phi", phi)?;
            }
            set_defect(&mut cfg, &a.defect)?;
            if a.reference.is_some() {
                cfg.reference = a.reference.clone();
            }
            cfg
        }
        Command::Sweep(a) => {
            let mut cfg = base_config(&a.common)?;
            if let Some(t) = a.steps {
                cfg.set_steps(t)?;
            }
            if !a.phi.is_empty() {
                cfg.phis = a
                    .phi
                    .iter()
                    .map(|p| parse_angle_str("phi", p))
                    .collect::<Result<_>>()?;
            }
            set_defect(&mut cfg, &a.defect)?;
            cfg
        }
        Command::Isocheck(a) => {
            let mut cfg = base_config(&a.common)?;
            cfg.l = a.l.unwrap_or(cfg.l);
            cfg.trials = a.trials.unwrap_or(cfg.trials);
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            cfg
        }
    };
    cfg.check()?;
    Ok(cfg)
}

fn execute(command: &Command) -> Result<()> {
    let cfg = resolve(command)?;
    let work = || match command {
        Command::Run(_) => commands::run(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Isocheck(_) => commands::isocheck(&cfg),
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid("threads", e))?
            .install(work),
        None => work(),
    }
}

/// 1 for bad input (including the dense-size cap), 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<QwalkError>() {
            return match e {
                QwalkError::Validation(_) | QwalkError::Size { .. } => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
