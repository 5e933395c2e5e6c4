//! Grid refinement studies against exact solutions.

use serde::Serialize;

use super::config::RunConfig;
use super::initial::composite_average;
use super::run::{run, RunOptions, RunOutcome};
use crate::error::{Error, Result};

/// Errors of the first conserved component (the value for scalars, the
/// density for gas dynamics) on one grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    /// `Σ |Ū_j − ū_exact,j| Δx_j / (b − a)`.
    pub avg_error: f64,
    /// `(1/N) Σ_{j<N} |u_j − u_exact(x_j)|` over the nodes.
    pub point_error: f64,
    /// `log2` of the error ratio to the previous (coarser) row.
    pub avg_order: Option<f64>,
    pub point_order: Option<f64>,
    pub steps: usize,
    /// Oracle violations, when the sweep was requested.
    pub violations: Option<usize>,
}

/// Errors of a finished run against the exact solution of its configuration.
pub fn errors(cfg: &RunConfig, outcome: &RunOutcome) -> Result<(f64, f64)> {
    let ic = &cfg.initial;
    if !ic.has_exact(&cfg.system) {
        return Err(Error::Config(format!("'{}' has no exact solution", cfg.name)));
    }
    let sol = &outcome.solution;
    let t = sol.t;
    let exact = |x: f64| vec![ic.exact(&cfg.system, x, t).expect("exact solution")[0]];
    let x = &sol.nodes;
    let n = sol.centers.len();
    let avg_error = (0..n)
        .map(|c| {
            let e = composite_average(&exact, x[c], x[c + 1], &[], 2)[0];
            (sol.averages[c][0] - e).abs() * (x[c + 1] - x[c])
        })
        .sum::<f64>()
        / (x[n] - x[0]);
    let point_error = (0..n)
        .map(|j| (sol.node_primitives[j][0] - exact(x[j])[0]).abs())
        .sum::<f64>()
        / n as f64;
    Ok((avg_error, point_error))
}

/// Run `cfg` on each grid in `cells` (coarse to fine) and tabulate errors.
pub fn convergence_study(cfg: &RunConfig, cells: &[usize], sweep: bool) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in cells {
        let c = cfg.with_cells(n);
        let opts = RunOptions {
            sweep,
            ..RunOptions::default()
        };
        let outcome = run(&c, &opts)?;
        let (avg_error, point_error) = errors(&c, &outcome)?;
        let order = |prev: f64, cur: f64| (prev / cur).log2() / (n as f64 / rows.last().unwrap().cells as f64).log2();
        let (avg_order, point_order) = match rows.last() {
            Some(p) => (Some(order(p.avg_error, avg_error)), Some(order(p.point_error, point_error))),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            cells: n,
            avg_error,
            point_error,
            avg_order,
            point_order,
            steps: outcome.summary.steps,
            violations: outcome.summary.sweep.as_ref().map(|r| r.total),
        });
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "cells,avg_error,avg_order,point_error,point_order";

/// CSV table of a study; missing orders are left empty.
pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    use super::output::fmt_f64;
    let opt = |o: Option<f64>| o.map(fmt_f64).unwrap_or_default();
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.cells,
            fmt_f64(r.avg_error),
            opt(r.avg_order),
            fmt_f64(r.point_error),
            opt(r.point_order)
        ));
    }
    s
}
