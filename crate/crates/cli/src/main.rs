//! `pampa`: run presets and configuration files, convergence studies,
//! reference solutions and the verification suites.

mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use idp_pampa::driver::config::{preset_names, preset_source};
use idp_pampa::driver::convergence::{convergence_study, to_csv};
use idp_pampa::driver::reference::{reference, write_reference};
use idp_pampa::driver::run::{run, RunOptions, RunSummary};
use idp_pampa::driver::RunConfig;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "PAMPA_THREADS";

#[derive(Parser)]
#[command(name = "pampa", version, about = "Invariant-domain-preserving PAMPA solver")]
struct Cli {
    /// Seed for the randomized suites; recorded in run metadata.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML configuration to its final time.
    Run {
        /// Preset name or path to a TOML file.
        config: String,
        /// Override the number of cells.
        #[arg(long)]
        cells: Option<usize>,
        /// Write the cell CSV every this many steps.
        #[arg(long)]
        snapshots: Option<usize>,
        /// Check every stage with the domain oracle.
        #[arg(long)]
        sweep: bool,
    },
    /// Grid refinement study against the exact solution.
    Convergence {
        config: String,
        /// Comma-separated cell counts, coarse to fine.
        #[arg(long = "N", alias = "n", value_delimiter = ',', default_values_t = [80, 160, 320, 640, 1280])]
        cells: Vec<usize>,
        #[arg(long)]
        sweep: bool,
    },
    /// First-order Lax–Friedrichs solution on a fine grid.
    Reference {
        config: String,
        /// Override the reference cell count.
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Randomized and deterministic verification suites.
    Verify(verify::VerifyArgs),
    /// List the presets, or print one.
    Presets { name: Option<String> },
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR} must be a positive integer, got '{value}'"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn print_summary(s: &RunSummary, out: Option<&Path>) {
    println!("run {} ({}, {} cells)", s.name, s.system, s.cells);
    println!(
        "  t = {} after {} steps ({} rejected), {:.2} s on {} threads",
        s.t_final, s.steps, s.rejected_steps, s.wall_seconds, s.threads
    );
    println!(
        "  limiter activations: idp {}, oe {}, mp {}",
        s.idp_activations, s.oe_activations, s.mp_activations
    );
    let (a, b) = if s.system == "advection" || s.system == "burgers" {
        ("min u", "max u")
    } else {
        ("min rho", "min p")
    };
    println!("  {a} = {:.6e}, {b} = {:.6e}", s.extrema.0, s.extrema.1);
    println!("  conservation drift {:.3e}", s.conservation_drift);
    if let Some(r) = &s.sweep {
        println!(
            "  domain sweep: {} values checked, {} violations, min margin {:.3e}",
            r.checked, r.total, r.min_margin
        );
        for v in &r.violations {
            println!("    {v}");
        }
    }
    if let Some(dir) = out {
        println!("  output in {}", dir.display());
    }
}

fn load(config: &str) -> Result<RunConfig, String> {
    RunConfig::load(config).map_err(|e| e.to_string())
}

fn execute(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Run {
            config,
            cells,
            snapshots,
            sweep,
        } => {
            let mut cfg = load(&config)?;
            if let Some(n) = cells {
                cfg = cfg.with_cells(n);
            }
            let out = cli.out.unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let opts = RunOptions {
                out_dir: Some(out.clone()),
                snapshot_every: snapshots,
                sweep,
                seed: Some(cli.seed),
            };
            let outcome = run(&cfg, &opts).map_err(|e| e.to_string())?;
            print_summary(&outcome.summary, Some(&out));
            Ok(outcome.summary.sweep.as_ref().is_none_or(|r| r.is_empty()))
        }
        Command::Convergence { config, cells, sweep } => {
            let cfg = load(&config)?;
            let rows = convergence_study(&cfg, &cells, sweep).map_err(|e| e.to_string())?;
            let table = to_csv(&rows);
            print!("{table}");
            if let Some(dir) = cli.out {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                std::fs::write(dir.join("convergence.csv"), &table).map_err(|e| e.to_string())?;
            }
            Ok(rows.iter().all(|r| r.violations.unwrap_or(0) == 0))
        }
        Command::Reference { config, cells } => {
            let mut cfg = load(&config)?;
            if let Some(n) = cells {
                cfg.reference.cells = n;
            }
            let out = cli.out.unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let (solution, info) = reference(&cfg).map_err(|e| e.to_string())?;
            write_reference(&solution, &info, &out).map_err(|e| e.to_string())?;
            println!(
                "reference {}: {} cells, {} steps, written to {}",
                info.name,
                info.cells,
                info.steps,
                out.join("reference.csv").display()
            );
            Ok(true)
        }
        Command::Verify(args) => verify::run_suites(&args, cli.seed, cli.out.as_deref()),
        Command::Presets { name } => {
            match name {
                None => {
                    for n in preset_names() {
                        let cfg = load(n)?;
                        println!("{n:<20} {}", cfg.description);
                    }
                }
                Some(n) => print!("{}", preset_source(&n).ok_or_else(|| format!("no preset named '{n}'"))?),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
