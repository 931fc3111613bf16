//! `thinpore`: batch front-end for the homogenization toolkit.

mod commands;
mod config;
mod failure;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::Context;
use config::{Format, RunConfig};
use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "thinpore", version, about = "Power-law flow in a thin porous layer coupled to a thin film")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel jobs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Output formats; overrides `output.formats`. Repeatable.
    #[arg(long = "format", global = true, value_enum)]
    formats: Vec<Format>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Cell-problem permeability.
    Permeability,
    /// Generalized Reynolds solve with velocity reconstruction.
    Reynolds,
    /// Critical-regime sequence and predicted exponents.
    CriticalRegime,
    /// Norm identities of the unfolding operator on random fields.
    UnfoldCheck,
    /// One fine-scale simulation compared with the limit.
    Dns,
    /// Fine-scale convergence study over the regime sequence.
    Study,
    /// Permeability, Reynolds solve and, if enabled, the study.
    Pipeline,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Permeability => "permeability",
            Command::Reynolds => "reynolds",
            Command::CriticalRegime => "critical-regime",
            Command::UnfoldCheck => "unfold-check",
            Command::Dns => "dns",
            Command::Study => "study",
            Command::Pipeline => "pipeline",
        }
    }
}

fn execute(cli: &Cli) -> Result<serde_json::Value, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::new("input", "--config <path> is required"))?;
    let mut raw = RunConfig::load(path)?;
    if !cli.formats.is_empty() {
        raw.output.formats = cli.formats.clone();
        raw.output.formats.sort();
        raw.output.formats.dedup();
    }
    if let Some(out) = &cli.out {
        raw.output.directory = out.clone();
    }
    let cfg = raw.resolve()?;
    let out = cfg.raw.output.directory.clone();
    let mut ctx = Context::new(cfg, out, cli.jobs)?;
    match cli.command {
        Command::Permeability => {
            commands::permeability(&mut ctx)?;
        }
        Command::Reynolds => {
            let mu = commands::limit_mu(&ctx, ctx.cfg.raw.cell.resolution)?;
            commands::reynolds(&mut ctx, mu)?;
        }
        Command::CriticalRegime => {
            commands::critical_regime(&mut ctx)?;
        }
        Command::UnfoldCheck => {
            commands::unfold_check(&mut ctx)?;
        }
        Command::Dns => {
            commands::dns(&mut ctx)?;
        }
        Command::Study => {
            commands::study(&mut ctx)?;
        }
        Command::Pipeline => {
            commands::pipeline(&mut ctx)?;
        }
    }
    let files: Vec<String> = ctx.written.iter().map(|p| ctx.relative(p)).collect();
    Ok(json!({
        "command": cli.command.name(),
        "output_directory": ctx.out.display().to_string(),
        "files": files,
        "cache_hits": ctx.cache.hits(),
        "cell_solves": ctx.cache.solves(),
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(status) => {
            println!("{status}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
