use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use wavemodels::model::ModelId;
use wavemodels::wavecli::runner::resolve_run_dir;
use wavemodels::wavecli::{self, presets, CheckLevel, ExitStatus, RunConfig, OUTPUT_ENV};
use wavemodels::{Result, WaveError};

#[derive(Parser)]
#[command(name = "wavemodels", version, about = "Pseudospectral solvers for nonlocal wave models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct Overrides {
    /// Number of collocation nodes
    #[arg(long)]
    nodes: Option<usize>,
    /// Final time
    #[arg(long)]
    tmax: Option<f64>,
    /// Sampling interval for snapshots and diagnostics
    #[arg(long)]
    sample_every: Option<f64>,
    /// Output directory (defaults to $WAVEMODELS_OUTPUT_DIR/<name>, else runs/<name>)
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configs or presets (several run concurrently)
    Run {
        #[arg(required = true, value_name = "CONFIG|PRESET")]
        targets: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run bidirectional graph models from shared data and tabulate differences
    Compare {
        #[arg(required = true, value_name = "CONFIG|PRESET")]
        targets: Vec<String>,
        /// External snapshot file in the run snapshot format
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the invariant suite
    Check {
        /// Include Birkhoff-Rott convergence and theorem monitors
        #[arg(long)]
        full: bool,
        /// Write the JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List model identifiers
    ListModels,
    /// List scenario presets
    ListPresets,
}

fn load(target: &str, ov: &Overrides) -> Result<(RunConfig, Vec<String>)> {
    let path = Path::new(target);
    let mut cfg = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| WaveError::Io(format!("{target}: {e}")))?;
        wavecli::parse_unresolved(&text)?
    } else if target.ends_with(".toml") {
        return Err(WaveError::Io(format!("{target}: no such file")));
    } else {
        presets::find(target)?.config
    };
    if let Some(n) = ov.nodes {
        cfg.n_nodes = n;
    }
    if let Some(t) = ov.tmax {
        cfg.t_max = t;
    }
    if let Some(s) = ov.sample_every {
        cfg.sample_every = s;
    }
    cfg.resolve()
}

fn report_error(e: &WaveError) -> ExitStatus {
    eprintln!("error: {e}");
    ExitStatus::for_error(e)
}

fn run_one(target: &str, ov: &Overrides, multi: bool) -> ExitStatus {
    let (cfg, warnings) = match load(target, ov) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let dir = match (&ov.output_dir, multi) {
        (Some(d), true) => d.join(cfg.label()),
        (Some(d), false) => d.clone(),
        (None, _) => resolve_run_dir(&cfg, None),
    };
    match wavecli::run(&cfg, &dir, warnings) {
        Ok(r) => {
            let s = &r.summary;
            println!(
                "{}: {} at t = {} ({} steps, {:.2} s) -> {}",
                s.name,
                s.stop_reason,
                s.t_final,
                s.accepted_steps,
                s.wall_time_s,
                r.run_dir.display()
            );
            if let Some(e) = &s.error {
                eprintln!("error: {e}");
            }
            match s.exit_code {
                0 => ExitStatus::Success,
                5 => ExitStatus::EventStop,
                _ => ExitStatus::NumericFailure,
            }
        }
        Err(e) => report_error(&e),
    }
}

fn compare(targets: &[String], reference: Option<&Path>, ov: &Overrides) -> Result<()> {
    let mut cfgs = Vec::new();
    for t in targets {
        let (c, warnings) = load(t, ov)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        cfgs.push(c);
    }
    let out = ov.output_dir.clone().unwrap_or_else(|| {
        std::env::var_os(OUTPUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"))
            .join("compare")
    });
    let rows = wavecli::compare(&cfgs, reference, &out)?;
    let worst = rows.iter().map(|r| r.sup_diff).fold(0.0, f64::max);
    println!("{} rows, max sup difference {worst:.3e} -> {}", rows.len(), out.join("comparison.csv").display());
    Ok(())
}

fn check(full: bool, report: Option<&Path>) -> ExitStatus {
    let level = if full { CheckLevel::Full } else { CheckLevel::Fast };
    let r = wavecli::check(level);
    for e in &r.entries {
        let tag = if e.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<34} {:>12.4e}  {}  ({:.2} s)", e.name, e.measured, e.tolerance, e.seconds);
        if let (false, Some(d)) = (e.passed, &e.detail) {
            println!("     {d}");
        }
    }
    if let Some(p) = report {
        if let Err(e) = fs::write(p, r.to_json() + "\n") {
            return report_error(&WaveError::Io(format!("{}: {e}", p.display())));
        }
    }
    if r.passed {
        ExitStatus::Success
    } else {
        ExitStatus::InvariantFailure
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { ExitStatus::ConfigError.code() } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let status = match cli.command {
        Command::Run { targets, overrides } => {
            let multi = targets.len() > 1;
            let codes: Vec<ExitStatus> = targets.par_iter().map(|t| run_one(t, &overrides, multi)).collect();
            codes.into_iter().max_by_key(|c| c.code()).unwrap_or(ExitStatus::Success)
        }
        Command::Compare {
            targets,
            reference,
            overrides,
        } => match compare(&targets, reference.as_deref(), &overrides) {
            Ok(()) => ExitStatus::Success,
            Err(e) => report_error(&e),
        },
        Command::Check { full, report } => check(full, report.as_deref()),
        Command::ListModels => {
            for m in ModelId::ALL {
                println!("{:<18} {}", m.as_str(), m.description());
            }
            ExitStatus::Success
        }
        Command::ListPresets => {
            for p in presets::all() {
                println!("{:<10} {}", p.name, p.description);
            }
            ExitStatus::Success
        }
    };
    ExitCode::from(status.code() as u8)
}
