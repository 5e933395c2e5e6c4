//! The `verify` subcommand.

use std::path::Path;

use clap::{Args, ValueEnum};
use idp_pampa::driver::config::preset;
use idp_pampa::driver::run::{run, RunOptions};
use idp_pampa::oracle::{
    burgers_family_violations, check_limiter, check_transform_domain, check_transform_round_trip, counterexample,
    sample_lf_splitting, LimiterCase, PropertyReport, SamplingRanges, SplittingReport, SplittingSystem,
};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Lax–Friedrichs splitting states of random Euler/MHD pairs, exactly.
    Splitting,
    /// Single-cell counterexample for the unlimited scheme.
    Counterexample,
    /// Burgers splitting with the maximal-speed bound.
    Burgers,
    /// Variable maps: domain membership and round trips.
    Transform,
    /// Scaling limiter: average decomposition and domain membership.
    Limiter,
    /// Stage-by-stage domain sweep of short preset runs.
    Sweep,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemChoice {
    Euler,
    Mhd,
    Both,
}

#[derive(Args)]
pub struct VerifyArgs {
    suite: Suite,
    /// System for the splitting, transform and limiter suites.
    #[arg(long, value_enum, default_value_t = SystemChoice::Both)]
    system: SystemChoice,
    /// Samples per randomized check.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Adiabatic index for the randomized checks.
    #[arg(long, default_value_t = 1.4)]
    gamma: f64,
    /// Counterexample parameter, `0 < eps < 1/4`.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Counterexample step ratio `Δt/Δx`.
    #[arg(long, default_value_t = 1.0 / 6.0)]
    ratio: f64,
    /// Presets for the sweep suite.
    #[arg(long, value_delimiter = ',', default_values_t = ["jiang_shu".to_string(), "burgers_shock".to_string(), "sod".to_string()])]
    presets: Vec<String>,
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn systems(args: &VerifyArgs) -> Vec<SplittingSystem> {
    let g = args.gamma;
    match args.system {
        SystemChoice::Euler => vec![SplittingSystem::Euler { gamma: g }],
        SystemChoice::Mhd => vec![SplittingSystem::Mhd { gamma: g }],
        SystemChoice::Both => vec![SplittingSystem::Euler { gamma: g }, SplittingSystem::Mhd { gamma: g }],
    }
}

fn property(r: &PropertyReport) -> bool {
    println!("{} {r}", status(r.passed()));
    if let Some(f) = &r.first_failure {
        println!("     first failure: {f}");
    }
    r.passed()
}

fn splitting(r: &SplittingReport) -> bool {
    let name = match r.system {
        SplittingSystem::Euler { .. } => "euler",
        SplittingSystem::Mhd { .. } => "mhd",
    };
    println!(
        "{} {name} splitting: {} pairs (seed {}), {} failures, {} redraws",
        status(r.passed()),
        r.samples,
        r.seed,
        r.failures,
        r.redraws
    );
    if let Some(w) = &r.worst {
        println!(
            "     worst margin {:.3e} (lambda {:.6e}, left {:?}, right {:?})",
            w.margin, w.lambda, w.left, w.right
        );
    }
    r.passed()
}

/// Runs the selected suites; `Ok(false)` when any check failed.
pub fn run_suites(args: &VerifyArgs, seed: u64, out: Option<&Path>) -> Result<bool, String> {
    let wants = |s: Suite| args.suite == s || args.suite == Suite::All;
    let mut ok = true;
    let mut json = serde_json::Map::new();

    if wants(Suite::Splitting) {
        let ranges = SamplingRanges::default();
        for sys in systems(args) {
            let r = sample_lf_splitting(sys, args.samples, seed, 1.0, &ranges);
            ok &= splitting(&r);
            json.insert(
                format!("splitting_{}", if matches!(sys, SplittingSystem::Euler { .. }) { "euler" } else { "mhd" }),
                serde_json::to_value(&r).map_err(|e| e.to_string())?,
            );
        }
    }
    if wants(Suite::Counterexample) {
        let r = counterexample(args.eps, args.ratio).map_err(|e| e.to_string())?;
        // the unlimited update is expected to leave [0, 1]; the limited one must not
        let pass = !r.continuous_in_bounds() && r.idp_in_bounds();
        println!(
            "{} counterexample eps = {}, dt/dx = {}: unlimited average {:.16}, limited average {:.16} (theta {:.10})",
            status(pass),
            r.eps,
            r.ratio,
            r.continuous_average,
            r.idp_average,
            r.theta
        );
        ok &= pass;
        json.insert("counterexample".into(), serde_json::to_value(r).map_err(|e| e.to_string())?);
    }
    if wants(Suite::Burgers) {
        let at_max = burgers_family_violations(1.0, 3001);
        let halved = burgers_family_violations(0.5, 3001);
        let pass = at_max.is_empty() && !halved.is_empty();
        println!(
            "{} burgers splitting: {} violations at the maximal speed, {} with half of it",
            status(pass),
            at_max.len(),
            halved.len()
        );
        ok &= pass;
    }
    if wants(Suite::Transform) {
        for (k, sys) in systems(args).into_iter().enumerate() {
            ok &= property(&check_transform_domain(sys, 10 * args.samples, seed + k as u64, 50.0));
            ok &= property(&check_transform_round_trip(sys, args.samples, seed + k as u64, 1e-11));
        }
    }
    if wants(Suite::Limiter) {
        let mut cases = vec![LimiterCase::Scalar];
        for sys in systems(args) {
            cases.push(match sys {
                SplittingSystem::Euler { gamma } => LimiterCase::Euler { gamma },
                SplittingSystem::Mhd { gamma } => LimiterCase::Mhd { gamma },
            });
        }
        for case in cases {
            ok &= property(&check_limiter(case, args.samples, seed, 1e-12));
        }
    }
    if wants(Suite::Sweep) {
        for name in &args.presets {
            let cfg = preset(name).ok_or_else(|| format!("no preset named '{name}'"))?;
            let opts = RunOptions {
                sweep: true,
                ..RunOptions::default()
            };
            let outcome = run(&cfg, &opts).map_err(|e| e.to_string())?;
            let report = outcome.summary.sweep.expect("sweep requested");
            println!(
                "{} sweep {name}: {} values over {} steps, {} violations, min margin {:.3e}",
                status(report.is_empty()),
                report.checked,
                outcome.summary.steps,
                report.total,
                report.min_margin
            );
            for v in &report.violations {
                println!("     {v}");
            }
            ok &= report.is_empty();
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        let text = serde_json::to_string_pretty(&json).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("verify.json"), text).map_err(|e| e.to_string())?;
    }
    Ok(ok)
}
