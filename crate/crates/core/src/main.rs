use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use membrane::config::{parse_config, SimConfig};
use membrane::output::{read_snapshot, write_trajectory};
use membrane::solver::{run, StopReason, SystemState};
use membrane::study::run_study;
use membrane::validation::oracle_suite;
use membrane::{Error, Result};

/// Axisymmetric open-membrane dynamics in Stokes flow.
#[derive(Debug, Parser)]
#[command(name = "membrane", version)]
struct Cli {
    /// Configuration file (alternative to the positional argument).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the output directory of the configuration.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override the snapshot interval in steps.
    #[arg(long, global = true)]
    snapshot_every: Option<usize>,
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one configuration and write snapshots and the time series.
    Run {
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Run the sweep named by the `study` key of a configuration.
    Study {
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Run the oracle suite for special functions, kernel and quadrature.
    Validate,
    /// Summarize a snapshot file.
    Info { snapshot: PathBuf },
}

fn load(cli: &Cli, positional: &Option<PathBuf>) -> Result<SimConfig> {
    let path = match (positional, &cli.config) {
        (Some(p), None) | (None, Some(p)) => p,
        (Some(_), Some(_)) => return Err(Error::Config("give the configuration either positionally or with --config".into())),
        (None, None) => return Err(Error::Config("no configuration file given".into())),
    };
    let mut cfg = parse_config(path)?;
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(k) = cli.snapshot_every {
        cfg.snapshot_every = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(cli: &Cli, cfg: &SimConfig) -> Result<bool> {
    let initial = SystemState::initial(cfg.initial_curve()?);
    let every = cfg.snapshot_every;
    let mut k = 0usize;
    let traj = run(initial, &cfg.params, &cfg.disc, every, |st, row, info| {
        k += 1;
        if !cli.quiet && k % every == 0 {
            eprintln!(
                "step {k:6}  t {:.4}  E {:.10}  A {:.10}  residual {:.1e}",
                st.t, row.energy.total, row.area, info.residual
            );
        }
    })?;
    let files = write_trajectory(&traj, cfg, &cfg.output_dir)?;
    if !cli.quiet {
        eprintln!("{} steps, stop: {}", traj.steps, traj.stop);
        eprintln!("wrote {} files to {}", files.len(), cfg.output_dir.display());
    }
    if let StopReason::StepFailure(r) = &traj.stop {
        eprintln!("error: run failed at t = {}: {r}", traj.final_state.t);
        return Ok(false);
    }
    Ok(true)
}

fn cmd_study(cli: &Cli, cfg: &SimConfig) -> Result<bool> {
    let files = run_study(cfg, &cfg.output_dir)?;
    let mut ok = true;
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
        if text.lines().any(|l| !l.starts_with('#') && l.contains("failed:")) {
            eprintln!("error: {} records failed runs", f.display());
            ok = false;
        }
        if !cli.quiet {
            println!("{}", f.display());
        }
    }
    Ok(ok)
}

fn cmd_validate(cli: &Cli) -> Result<bool> {
    let checks = oracle_suite()?;
    for c in &checks {
        if !cli.quiet || !c.pass {
            println!("{c}");
        }
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn cmd_info(path: &Path) -> Result<bool> {
    let s = read_snapshot(path)?;
    for m in &s.meta {
        println!("# {m}");
    }
    println!("t {}", s.t);
    println!("dofs {}", s.rows.len());
    let col = |n: &str| s.column(n).unwrap_or_default();
    let (xr, xz) = (col("xr"), col("xz"));
    let umax = col("ur").iter().zip(col("uz")).map(|(a, b)| a.hypot(b)).fold(0.0, f64::max);
    let fmt_end = |v: &[f64]| match (v.first(), v.last()) {
        (Some(a), Some(b)) => format!("{a} .. {b}"),
        _ => "-".into(),
    };
    println!("xr {}", fmt_end(&xr));
    println!("xz {}", fmt_end(&xz));
    println!("h {}", fmt_end(&col("h")));
    println!("max_speed {umax}");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { path } => load(&cli, path).and_then(|c| cmd_run(&cli, &c)),
        Command::Study { path } => load(&cli, path).and_then(|c| cmd_study(&cli, &c)),
        Command::Validate => cmd_validate(&cli),
        Command::Info { snapshot } => cmd_info(snapshot),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
