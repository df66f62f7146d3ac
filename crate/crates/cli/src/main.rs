//! `fracflux` command line: direct solves, reconstructions, sweeps and data
//! validation driven by a TOML config.
//!
//! Exit status: 0 on success, 1 when the run fails (bad config, violated
//! assumptions, solver breakdown), 3 when it finishes but a check fails
//! (no convergence, failed sweep rows, validation failures). Usage errors
//! exit with 2.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracflux::config::{load_config, parse_config, ExperimentConfig};
use fracflux::experiment::{run_direct, run_invert, run_sweep, run_validate, SUMMARY_FILE};

#[derive(Parser, Debug)]
#[command(name = "fracflux", version, about = "Time-fractional diffusion: forward solves and diffusivity reconstruction from boundary flux")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (TOML); a summary.toml from an earlier run also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Noise seed, overriding `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve the forward problem and write direct.csv.
    Direct,
    /// Reconstruct the coefficient from synthesized flux data; writes invert.csv.
    Invert,
    /// Run one reconstruction per value of the [sweep] table; writes sweep.csv.
    Sweep,
    /// Check the data assumptions and the special-function property suite.
    Validate,
}

enum Outcome {
    Ok(String),
    CheckFailed(String),
}

fn resolve(cli: &Cli) -> fracflux::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cmd: Command, cfg: &ExperimentConfig) -> fracflux::Result<Outcome> {
    let out = cfg.output_dir.display();
    match cmd {
        Command::Direct => {
            let r = run_direct(cfg)?;
            Ok(Outcome::Ok(format!(
                "direct: {} excited mode(s), flux in [{:e}, {:e}] -> {out}",
                r.excited_modes.len(),
                r.flux_min,
                r.flux_max
            )))
        }
        Command::Invert => {
            let r = run_invert(cfg)?;
            let m = &r.metrics;
            let line = format!(
                "invert: {} iteration(s), converged = {}, L2 error {:e} (relative {:e}) -> {out}",
                m.n_iters, m.converged, m.l2_error, m.rel_l2_error
            );
            Ok(if m.converged {
                Outcome::Ok(line)
            } else {
                Outcome::CheckFailed(line)
            })
        }
        Command::Sweep => {
            let r = run_sweep(cfg)?;
            let mut line = format!("sweep over {:?}: {} run(s)", r.parameter, r.rows.len());
            if let Some(s) = r.slope {
                line += &format!(", log-log slope {s:.4}");
            }
            if let Some(m) = r.n_iters_nonincreasing {
                line += &format!(", iteration counts nonincreasing = {m}");
            }
            line += &format!(" -> {out}");
            Ok(if r.failed_runs == 0 {
                Outcome::Ok(line)
            } else {
                Outcome::CheckFailed(format!("{line} ({} failed run(s))", r.failed_runs))
            })
        }
        Command::Validate => {
            let r = run_validate(cfg)?;
            let mut line = format!(
                "validate: data admissible = {}, special functions ok = {}",
                r.admissible, r.special_functions_ok
            );
            for f in &r.failures {
                line += &format!("\n  - {f}");
            }
            for c in r.special_function_checks.iter().filter(|c| !c.passed) {
                line += &format!("\n  - {} failed (worst {:e})", c.name, c.worst);
            }
            line += &format!("\n  report: {}", cfg.output_dir.join(SUMMARY_FILE).display());
            Ok(if r.passed(cfg.allow_assumption_violations) {
                Outcome::Ok(line)
            } else {
                Outcome::CheckFailed(line)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(Outcome::Ok(msg)) => {
            if !cli.quiet {
                println!("{msg}");
            }
            ExitCode::SUCCESS
        }
        Ok(Outcome::CheckFailed(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
