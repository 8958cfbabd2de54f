use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mrlbm::solver::{self, RunConfig, SolverError};

#[derive(Parser)]
#[command(name = "mrlbm", version, about = "Adaptive multiresolution lattice Boltzmann solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides MRLBM_OUTPUT and the config entry).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Stop after this many steps.
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Compress a uniform grid and report occupation rates and reconstruction errors.
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        gamma: u32,
        /// Coarsest level of the multiresolution analysis.
        #[arg(long, default_value_t = 0)]
        min_level: u32,
    },
    /// Run the built-in invariant checks.
    Verify,
}

#[derive(Debug)]
struct VerifyFailed(usize);

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} verification checks failed", self.0)
    }
}

impl std::error::Error for VerifyFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerifyFailed>().is_some() {
        return 3;
    }
    err.downcast_ref::<SolverError>()
        .map_or(1, |e| e.exit_code() as u8)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            output,
            max_steps,
        } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if max_steps.is_some() {
                cfg.max_steps = max_steps;
            }
            let dir = solver::output_dir(&cfg, output.as_deref());
            let summary = solver::run(&cfg, dir.as_deref())?;
            println!(
                "{}: {} steps to t = {:.6}, leaves {}, MeshOR {:.4}, MemOR {:.4}",
                summary.problem, summary.steps, summary.final_time, summary.leaves, summary.mesh_or, summary.mem_or
            );
            if let Some(e) = &summary.errors {
                println!("additional error {e:?}");
            }
            if let Some(st) = summary.strouhal {
                println!("Strouhal {st:.4}");
            } else if let Some(note) = &summary.strouhal_note {
                println!("Strouhal unavailable: {note}");
            }
            if let Some(d) = dir {
                println!("outputs in {}", d.display());
            }
        }
        Command::Compress {
            input,
            eps,
            gamma,
            min_level,
        } => {
            let grid = solver::read_grid(&input).with_context(|| format!("reading {}", input.display()))?;
            let r = solver::compress(&grid, eps, gamma, min_level)?;
            println!("levels {}..{}", r.min_level, r.max_level);
            println!("leaves {} cells {}", r.leaves, r.cells);
            println!("mesh_or {}", solver::fmt_f64(r.mesh_or));
            println!("mem_or {}", solver::fmt_f64(r.mem_or));
            println!("l1 {}", solver::fmt_f64(r.l1));
            println!("linf {}", solver::fmt_f64(r.linf));
        }
        Command::Verify => {
            let checks = solver::verify()?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if failed > 0 {
                return Err(VerifyFailed(failed).into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
