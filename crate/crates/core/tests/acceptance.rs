//! Acceptance criteria 1–11. Every test reports one `PASS`/`FAIL` line on
//! stderr (written past the test harness capture) and then asserts.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use idp_pampa::driver::convergence::{convergence_study, ConvergenceRow};
use idp_pampa::driver::run::{run, RunOptions, RunOutcome};
use idp_pampa::driver::{preset, preset_names, RunConfig};
use idp_pampa::limiters::{MpParams, OscillationControl};
use idp_pampa::oracle::{
    check_limiter, check_transform_domain, check_transform_round_trip, counterexample, sample_lf_splitting,
    LimiterCase, SamplingRanges, SplittingSystem,
};
use idp_pampa::BoundaryCondition;

const SEED: u64 = 42;

fn report(criterion: u32, pass: bool, detail: &str, started: Instant) {
    let status = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "{status} criterion {criterion:>2}: {detail} [{:.1} s]\n",
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn swept(cfg: &RunConfig) -> RunOutcome {
    let opts = RunOptions {
        sweep: true,
        ..RunOptions::default()
    };
    run(cfg, &opts).unwrap_or_else(|e| panic!("{} failed: {e}", cfg.name))
}

fn last_orders(rows: &[ConvergenceRow], point: bool) -> Vec<f64> {
    rows[rows.len() - 2..]
        .iter()
        .map(|r| if point { r.point_order } else { r.avg_order }.expect("order of a refined grid"))
        .collect()
}

fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value <= target * factor && value >= target / factor
}

#[test]
fn criterion_01_advection_convergence() {
    let started = Instant::now();
    let cfg = preset("advection_smooth").unwrap();
    let rows = convergence_study(&cfg, &[20, 40, 80, 160, 320, 640, 1280], false).unwrap();
    let avg = last_orders(&rows, false);
    let point = last_orders(&rows, true);
    let fine = rows.last().unwrap();
    let pass = avg.iter().chain(&point).all(|&o| o >= 2.9)
        && within_factor(fine.avg_error, 2.14e-7, 3.0)
        && within_factor(fine.point_error, 2.14e-7, 3.0);
    report(
        1,
        pass,
        &format!(
            "advection orders avg {avg:.3?}, point {point:.3?}; N=1280 errors {:.4e} / {:.4e}",
            fine.avg_error, fine.point_error
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_02_euler_smooth_convergence() {
    let started = Instant::now();
    let base = preset("euler_smooth").unwrap();
    let variants = [
        ("plain", OscillationControl::None),
        ("oe", OscillationControl::Oe),
        ("mp", OscillationControl::Mp(MpParams::default())),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (label, osc) in variants {
        let mut cfg = base.clone();
        cfg.limiter.oscillation = osc;
        let rows = convergence_study(&cfg, &[80, 160, 320, 640, 1280], true).unwrap();
        let orders = last_orders(&rows, false);
        let fine = rows.last().unwrap();
        let violations: usize = rows.iter().map(|r| r.violations.unwrap_or(usize::MAX)).sum();
        let ok = orders.iter().all(|&o| o >= 2.8) && within_factor(fine.avg_error, 4.89e-9, 3.0) && violations == 0;
        pass &= ok;
        details.push(format!(
            "{label}: orders {orders:.3?}, N=1280 error {:.4e}, {violations} violations",
            fine.avg_error
        ));
    }
    report(2, pass, &format!("euler smooth {}", details.join("; ")), started);
    assert!(pass);
}

#[test]
fn criterion_03_jiang_shu_maximum_principle() {
    let started = Instant::now();
    let out = swept(&preset("jiang_shu").unwrap());
    let sweep = out.summary.sweep.as_ref().unwrap();
    let pass = sweep.is_empty() && out.summary.extrema.0 >= 0.0 && out.summary.extrema.1 <= 1.0;
    report(
        3,
        pass,
        &format!(
            "jiang_shu {} values over {} steps, {} violations, range [{:.3e}, {:.15}]",
            sweep.checked, out.summary.steps, sweep.total, out.summary.extrema.0, out.summary.extrema.1
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_04_counterexample() {
    let started = Instant::now();
    let r = counterexample(0.1, 1.0 / 6.0).unwrap();
    let pass = (r.continuous_average - 1.1).abs() <= 1e-12 && r.continuous_average > 1.0 && r.idp_in_bounds();
    report(
        4,
        pass,
        &format!(
            "unlimited average {:.16}, limited average {:.16} (theta {:.10})",
            r.continuous_average, r.idp_average, r.theta
        ),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_05_positivity_stress_suite() {
    let started = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["double_rarefaction", "sedov", "blast_waves", "leblanc", "mhd_leblanc", "mhd_shock_tube"] {
        let out = swept(&preset(name).unwrap());
        let s = &out.summary;
        let sweep = s.sweep.as_ref().unwrap();
        let ok = sweep.is_empty() && s.extrema.0 > 0.0 && s.extrema.1 > 0.0;
        pass &= ok;
        details.push(format!(
            "{name} min rho {:.3e} min p {:.3e} violations {}",
            s.extrema.0, s.extrema.1, sweep.total
        ));
    }
    report(5, pass, &details.join("; "), started);
    assert!(pass);
}

#[test]
fn criterion_06_periodic_conservation() {
    let started = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for name in preset_names() {
        let cfg = preset(name).unwrap();
        if cfg.domain.bc != BoundaryCondition::Periodic {
            continue;
        }
        let out = run(&cfg, &RunOptions::default()).unwrap();
        let drift = out.summary.conservation_drift;
        pass &= drift < 1e-12;
        details.push(format!("{name} {drift:.2e}"));
    }
    pass &= !details.is_empty();
    report(6, pass, &format!("relative drift {}", details.join(", ")), started);
    assert!(pass);
}

#[test]
fn criterion_07_splitting_sampling() {
    let started = Instant::now();
    let ranges = SamplingRanges::default();
    let mut pass = true;
    let mut details = Vec::new();
    for (label, sys) in [
        ("euler", SplittingSystem::Euler { gamma: 1.4 }),
        ("mhd", SplittingSystem::Mhd { gamma: 1.4 }),
    ] {
        let r = sample_lf_splitting(sys, 100_000, SEED, 1.0, &ranges);
        pass &= r.passed() && r.samples == 100_000;
        let worst = r.worst.as_ref().map_or(f64::NAN, |w| w.margin);
        details.push(format!("{label} {} pairs, {} failures, worst margin {worst:.3e}", r.samples, r.failures));
    }
    report(7, pass, &details.join("; "), started);
    assert!(pass);
}

#[test]
fn criterion_08_transform_domain_and_round_trip() {
    let started = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (label, sys) in [
        ("euler", SplittingSystem::Euler { gamma: 1.4 }),
        ("mhd", SplittingSystem::Mhd { gamma: 1.4 }),
    ] {
        let domain = check_transform_domain(sys, 1_000_000, SEED, 50.0);
        let trip = check_transform_round_trip(sys, 100_000, SEED, 1e-11);
        pass &= domain.passed() && trip.passed();
        details.push(format!(
            "{label} domain {} failures / {}, round trip {} failures / {} (max rel error {:.2e})",
            domain.failures, domain.samples, trip.failures, trip.samples, trip.max_error
        ));
    }
    report(8, pass, &details.join("; "), started);
    assert!(pass);
}

#[test]
fn criterion_09_limiter_decomposition() {
    let started = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (label, case) in [("scalar", LimiterCase::Scalar), ("euler", LimiterCase::Euler { gamma: 1.4 })] {
        let r = check_limiter(case, 100_000, SEED, 1e-12);
        pass &= r.passed();
        details.push(format!(
            "{label} {} failures / {} (max rel CAD error {:.2e})",
            r.failures, r.samples, r.max_error
        ));
    }
    report(9, pass, &details.join("; "), started);
    assert!(pass);
}

#[test]
fn criterion_10_burgers_invariant_interval() {
    let started = Instant::now();
    let out = swept(&preset("burgers_shock").unwrap());
    let sweep = out.summary.sweep.as_ref().unwrap();
    let (lo, hi) = out.summary.extrema;
    let pass = sweep.is_empty() && lo >= -1.0 && hi <= 2.0;
    report(
        10,
        pass,
        &format!(
            "burgers {} values over {} steps, {} violations, range [{lo}, {hi}]",
            sweep.checked, out.summary.steps, sweep.total
        ),
        started,
    );
    assert!(pass);
}

// --- SVG structural regression ----------------------------------------------

struct Polyline {
    panel: usize,
    name: String,
    points: Vec<(f64, f64)>,
}

fn attribute<'a>(tag: &'a str, key: &str) -> Option<&'a str> {
    let start = tag.find(&format!("{key}=\""))? + key.len() + 2;
    let len = tag[start..].find('"')?;
    Some(&tag[start..start + len])
}

fn polylines(svg: &str) -> Vec<Polyline> {
    let mut panel = 0;
    let mut out = Vec::new();
    for line in svg.lines() {
        if line.starts_with(r#"<g class="panel""#) {
            panel += 1;
        }
        if line.starts_with("<polyline") && line.contains(r#"class="series""#) {
            let points = attribute(line, "points")
                .unwrap_or("")
                .split_whitespace()
                .map(|p| {
                    let (x, y) = p.split_once(',').expect("x,y pair");
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect();
            out.push(Polyline {
                panel,
                name: attribute(line, "data-name").unwrap_or("").to_string(),
                points,
            });
        }
    }
    out
}

/// Pixel column of `x` on the `[-5, 5]` Sod axis (5% padding, 50 px margins,
/// 620 px plot width).
fn sod_pixel(x: f64) -> f64 {
    50.0 + (x + 5.5) / 11.0 * 620.0
}

/// The density inside the rarefaction fan `[-1.45, -0.2]` (exact head
/// `-c_L t ≈ -1.538`, tail ≈ -0.091 at t = 1.3) must not increase, i.e. the
/// pixel row must not decrease. Returns the largest upward step.
fn rarefaction_rise(line: &Polyline) -> f64 {
    let (a, b) = (sod_pixel(-1.45), sod_pixel(-0.2));
    let seg: Vec<_> = line.points.iter().filter(|p| p.0 >= a && p.0 <= b).collect();
    assert!(seg.len() > 10, "{} points in the fan", seg.len());
    seg.windows(2).map(|w| w[0].1 - w[1].1).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_11_svg_structure_against_golden() {
    let started = Instant::now();
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sod.svg");
    let golden = polylines(&std::fs::read_to_string(golden_path).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    run(&preset("sod").unwrap(), &opts).unwrap();
    let fresh = polylines(&std::fs::read_to_string(dir.path().join("solution.svg")).unwrap());

    let layout = |v: &[Polyline]| v.iter().map(|p| (p.panel, p.name.clone())).collect::<Vec<_>>();
    let same_layout = layout(&golden) == layout(&fresh);
    let same_sizes = golden.iter().zip(&fresh).all(|(g, f)| g.points.len() == f.points.len());
    // first panel is the density; every series there must be monotone in the fan
    let rises: Vec<f64> = golden
        .iter()
        .chain(&fresh)
        .filter(|p| p.panel == 1)
        .map(rarefaction_rise)
        .collect();
    // points are written with two decimals
    let monotone = !rises.is_empty() && rises.iter().all(|&r| r <= 0.011);
    let pass = same_layout && same_sizes && monotone && fresh.len() == 4;
    report(
        11,
        pass,
        &format!(
            "sod svg {} series (golden {}), layout match {same_layout}, fan max rise {:.2} px",
            fresh.len(),
            golden.len(),
            rises.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        ),
        started,
    );
    assert!(pass);
}
