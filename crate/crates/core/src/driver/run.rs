//! Running a configuration to its final time.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{RunConfig, SystemConfig};
use super::output::{fmt_f64, read_csv, render_svg, write_csv, Panel, Series, SeriesStyle};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, Grid1D};
use crate::oracle::{DomainSweep, OracleDomain, ViolationReport};
use crate::scheme::{DofField, PampaScheme, StageReport};
use crate::systems::{Advection, Burgers, DomainKind, EquationSystem, Euler, Mhd, ScalarBounds};
use crate::timeint::{advance, RunObserver, RunStats, StepInfo};
use crate::transform::ScalarMap;
use crate::State;

/// Per-invocation settings that are not part of the physical setup.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    /// Overrides the configured snapshot cadence.
    pub snapshot_every: Option<usize>,
    /// Forces the oracle domain sweep on.
    pub sweep: bool,
    /// Recorded in the metadata; the solver itself is deterministic.
    pub seed: Option<u64>,
}

/// A solution on a grid, with system-independent layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub system: String,
    pub t: f64,
    pub conserved_names: Vec<String>,
    pub primitive_names: Vec<String>,
    pub centers: Vec<f64>,
    pub cell_sizes: Vec<f64>,
    pub nodes: Vec<f64>,
    /// Conservative cell averages, one row per cell.
    pub averages: Vec<Vec<f64>>,
    /// Primitive variables of the cell averages.
    pub primitives: Vec<Vec<f64>>,
    /// Primitive variables at the nodes; empty for finite-volume references.
    pub node_primitives: Vec<Vec<f64>>,
}

impl Solution {
    pub fn primitive_index(&self, name: &str) -> Option<usize> {
        self.primitive_names.iter().position(|n| n == name)
    }

    /// `Σ Δx Ū` per conserved component.
    pub fn totals(&self) -> Vec<f64> {
        totals(&self.averages, &self.cell_sizes)
    }

    pub fn write_cells(&self, path: &Path) -> Result<()> {
        let mut header = vec!["x".to_string()];
        header.extend(self.conserved_names.iter().cloned());
        header.extend(self.primitive_names.iter().map(|n| format!("prim_{n}")));
        let rows = (0..self.centers.len()).map(|c| {
            let mut r = vec![self.centers[c]];
            r.extend(&self.averages[c]);
            r.extend(&self.primitives[c]);
            r
        });
        write_csv(path, &header, rows)
    }

    pub fn write_nodes(&self, path: &Path) -> Result<()> {
        let mut header = vec!["x".to_string()];
        header.extend(self.primitive_names.iter().cloned());
        let rows = (0..self.node_primitives.len()).map(|j| {
            let mut r = vec![self.nodes[j]];
            r.extend(&self.node_primitives[j]);
            r
        });
        write_csv(path, &header, rows)
    }
}

fn totals(rows: &[Vec<f64>], sizes: &[f64]) -> Vec<f64> {
    let d = rows.first().map_or(0, |r| r.len());
    (0..d).map(|k| rows.iter().zip(sizes).map(|(r, h)| r[k] * h).sum()).collect()
}

/// Diagnostics at the end of one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Smallest density (systems) or value (scalars) over averages and nodes.
    pub min_first: f64,
    /// Smallest pressure (systems) or largest value (scalars).
    pub second: f64,
    pub idp_active: usize,
    pub oe_active: usize,
    pub mp_active: usize,
    pub retries: u32,
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub system: String,
    pub cells: usize,
    pub t_final: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub idp_activations: usize,
    pub oe_activations: usize,
    pub mp_activations: usize,
    /// Scalars: smallest and largest value seen at step ends. Systems:
    /// smallest density and pressure.
    pub extrema: (f64, f64),
    /// Largest `|Σ ΔxŪ_k − Σ ΔxŪ_k(0)| / max(Σ Δx|Ū_k|, Σ Δx|Ū_k(0)|)` over
    /// components and steps. Only meaningful for periodic domains.
    pub conservation_drift: f64,
    pub sweep: Option<ViolationReport>,
    pub wall_seconds: f64,
    pub threads: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub initial: Solution,
    pub solution: Solution,
    pub diagnostics: Vec<DiagnosticRow>,
    pub summary: RunSummary,
}

fn extrema_labels(system: &SystemConfig) -> (&'static str, &'static str) {
    if system.is_scalar() {
        ("min_u", "max_u")
    } else {
        ("min_rho", "min_p")
    }
}

struct Recorder<'a, S, const D: usize> {
    scheme: &'a PampaScheme<S, D>,
    sweep: Option<DomainSweep<S>>,
    rows: Vec<DiagnosticRow>,
    snapshot_every: usize,
    snapshot_dir: Option<PathBuf>,
    initial_totals: Vec<f64>,
    initial_abs: Vec<f64>,
    drift: f64,
}

fn extrema<S: EquationSystem<D>, const D: usize>(system: &S, avgs: &[State<D>], nodes: &[State<D>]) -> (f64, f64) {
    let all = avgs.iter().chain(nodes);
    match system.domain_kind() {
        DomainKind::Interval(_) => all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
            (lo.min(u[0]), hi.max(u[0]))
        }),
        DomainKind::Positivity => all.fold((f64::INFINITY, f64::INFINITY), |(r, p), u| {
            (r.min(u[0]), p.min(system.pressure(u).unwrap_or(f64::NAN)))
        }),
    }
}

impl<S: OracleDomain<D>, const D: usize> RunObserver<D> for Recorder<'_, S, D> {
    fn wants_stages(&self) -> bool {
        self.sweep.is_some()
    }

    fn on_stage(&mut self, step: usize, stage: usize, field: &DofField<D>, report: &StageReport<D>) -> Result<()> {
        if let Some(s) = self.sweep.as_mut() {
            s.on_stage(step, stage, field, report)?;
        }
        Ok(())
    }

    fn on_step(&mut self, info: &StepInfo, field: &DofField<D>) -> Result<()> {
        if let Some(s) = self.sweep.as_mut() {
            s.on_step(info, field)?;
        }
        let sys = &self.scheme.system;
        let nodes = self.scheme.conserved_points(field);
        let (a, b) = extrema(sys, &field.averages, &nodes);
        let rows: Vec<Vec<f64>> = field.averages.iter().map(|u| u.as_slice().to_vec()).collect();
        let t = totals(&rows, self.scheme.grid.cell_sizes());
        let abs_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x.abs()).collect()).collect();
        let abs = totals(&abs_rows, self.scheme.grid.cell_sizes());
        for k in 0..t.len() {
            let scale = self.initial_abs[k].max(abs[k]);
            if scale > 0.0 {
                self.drift = self.drift.max((t[k] - self.initial_totals[k]).abs() / scale);
            }
        }
        self.rows.push(DiagnosticRow {
            step: info.step,
            t: info.t,
            dt: info.dt,
            min_first: a,
            second: b,
            idp_active: info.idp_active,
            oe_active: info.oe_active,
            mp_active: info.mp_active,
            retries: info.retries,
            totals: t,
        });
        if let Some(dir) = &self.snapshot_dir {
            if self.snapshot_every > 0 && info.step % self.snapshot_every == 0 {
                let sol = solution_of(self.scheme, field, info.t);
                sol.write_cells(&dir.join(format!("cells_step{:07}.csv", info.step)))?;
            }
        }
        Ok(())
    }
}

fn solution_of<S: EquationSystem<D>, const D: usize>(scheme: &PampaScheme<S, D>, field: &DofField<D>, t: f64) -> Solution {
    let sys = &scheme.system;
    let nodes = scheme.conserved_points(field);
    Solution {
        system: sys.name().to_string(),
        t,
        conserved_names: sys.conserved_names().iter().map(|s| s.to_string()).collect(),
        primitive_names: sys.primitive_names().iter().map(|s| s.to_string()).collect(),
        centers: scheme.grid.cell_centers().to_vec(),
        cell_sizes: scheme.grid.cell_sizes().to_vec(),
        nodes: scheme.grid.nodes().to_vec(),
        averages: field.averages.iter().map(|u| u.as_slice().to_vec()).collect(),
        primitives: field.averages.iter().map(|u| sys.to_primitive(u).as_slice().to_vec()).collect(),
        node_primitives: nodes.iter().map(|u| sys.to_primitive(u).as_slice().to_vec()).collect(),
    }
}

pub(crate) fn scalar_map(bounds: [f64; 2], idp: bool) -> Result<ScalarMap> {
    let b = ScalarBounds::new(bounds[0], bounds[1])?;
    Ok(if idp {
        ScalarMap::clipped(b)
    } else {
        ScalarMap::affine(b)
    })
}

/// Calls `$body` with `$sys` bound to the configured system.
macro_rules! with_system {
    ($cfg:expr, $sys:ident => $body:expr) => {
        match $cfg.system {
            SystemConfig::Advection { bounds } => {
                let $sys = Advection::with_map(scalar_map(bounds, $cfg.limiter.idp)?);
                $body
            }
            SystemConfig::Burgers { bounds } => {
                let $sys = Burgers::with_map(scalar_map(bounds, $cfg.limiter.idp)?);
                $body
            }
            SystemConfig::Euler { gamma, rho_ref } => {
                let $sys = Euler::new(gamma).with_rho_ref(rho_ref);
                $body
            }
            SystemConfig::Mhd { gamma, bx, rho_ref } => {
                let $sys = Mhd::new(gamma, bx).with_rho_ref(rho_ref);
                $body
            }
        }
    };
}
pub(crate) use with_system;

/// Scheme and initial field of a configuration.
pub fn setup<S: EquationSystem<D>, const D: usize>(cfg: &RunConfig, system: S) -> Result<(PampaScheme<S, D>, DofField<D>)> {
    let d = &cfg.domain;
    let grid = Grid1D::uniform(d.a, d.b, d.cells)?;
    let (averages, nodes) = cfg.initial.build(&system, &grid)?;
    let scheme = PampaScheme::new(system, grid, d.bc, cfg.scheme_options())?;
    let field = scheme.field_from_conserved(averages, &nodes)?;
    Ok((scheme, field))
}

fn run_system<S: OracleDomain<D>, const D: usize>(cfg: &RunConfig, system: S, opts: &RunOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    let (scheme, field) = setup(cfg, system)?;
    let initial = solution_of(&scheme, &field, 0.0);
    let initial_totals = initial.totals();
    let initial_abs = totals(
        &initial.averages.iter().map(|r| r.iter().map(|x| x.abs()).collect()).collect::<Vec<Vec<f64>>>(),
        &initial.cell_sizes,
    );
    let snapshot_every = opts.snapshot_every.unwrap_or(cfg.output.snapshot_every);
    let snapshot_dir = match (&opts.out_dir, snapshot_every) {
        (Some(dir), n) if n > 0 => {
            let d = dir.join("snapshots");
            std::fs::create_dir_all(&d)?;
            Some(d)
        }
        _ => None,
    };
    let mut recorder = Recorder {
        scheme: &scheme,
        sweep: (cfg.output.sweep || opts.sweep).then(|| DomainSweep::new(scheme.system.clone())),
        rows: Vec::new(),
        snapshot_every,
        snapshot_dir,
        initial_totals,
        initial_abs,
        drift: 0.0,
    };
    let (final_field, stats): (DofField<D>, RunStats) =
        advance(&scheme, field, cfg.time.t_final, &cfg.time_settings(), &mut recorder)?;
    let solution = solution_of(&scheme, &final_field, stats.t);
    let nodes0 = scheme.conserved_points(&final_field);
    let last = extrema(&scheme.system, &final_field.averages, &nodes0);
    let ex = recorder.rows.iter().fold(last, |acc, r| match scheme.system.domain_kind() {
        DomainKind::Interval(_) => (acc.0.min(r.min_first), acc.1.max(r.second)),
        DomainKind::Positivity => (acc.0.min(r.min_first), acc.1.min(r.second)),
    });
    let summary = RunSummary {
        name: cfg.name.clone(),
        system: cfg.system.name().to_string(),
        cells: cfg.domain.cells,
        t_final: stats.t,
        steps: stats.steps,
        rejected_steps: stats.rejected_steps,
        idp_activations: stats.idp_activations,
        oe_activations: stats.oe_activations,
        mp_activations: stats.mp_activations,
        extrema: ex,
        conservation_drift: recorder.drift,
        sweep: recorder.sweep.take().map(DomainSweep::into_report),
        wall_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        seed: opts.seed,
    };
    Ok(RunOutcome {
        initial,
        solution,
        diagnostics: recorder.rows,
        summary,
    })
}

/// Run a configuration; writes outputs when `opts.out_dir` is set.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let outcome = with_system!(cfg, sys => run_system(cfg, sys, opts))?;
    if let Some(dir) = &opts.out_dir {
        write_outputs(cfg, &outcome, dir)?;
    }
    Ok(outcome)
}

/// Variables drawn in the plot.
pub fn plot_variables(cfg: &RunConfig, sol: &Solution) -> Vec<String> {
    if !cfg.output.plot.is_empty() {
        return cfg.output.plot.clone();
    }
    let mut v = vec![sol.primitive_names[0].clone()];
    if sol.primitive_index("p").is_some() {
        v.push("p".into());
    }
    v
}

/// Plot panels of the final solution with an optional reference overlay.
pub fn plot_panels(cfg: &RunConfig, sol: &Solution, reference: Option<&Solution>) -> Result<Vec<Panel>> {
    plot_variables(cfg, sol)
        .iter()
        .map(|name| {
            let k = sol
                .primitive_index(name)
                .ok_or_else(|| Error::Config(format!("no primitive variable '{name}' to plot")))?;
            let mut series = Vec::new();
            if let Some(r) = reference {
                if let Some(rk) = r.primitive_index(name) {
                    series.push(Series {
                        name: "reference".into(),
                        x: r.centers.clone(),
                        y: r.primitives.iter().map(|p| p[rk]).collect(),
                        style: SeriesStyle::Line,
                    });
                }
            }
            series.push(Series {
                name: "cell averages".into(),
                x: sol.centers.clone(),
                y: sol.primitives.iter().map(|p| p[k]).collect(),
                style: SeriesStyle::Markers,
            });
            if !sol.node_primitives.is_empty() {
                series.push(Series {
                    name: "point values".into(),
                    x: sol.nodes.clone(),
                    y: sol.node_primitives.iter().map(|p| p[k]).collect(),
                    style: SeriesStyle::Line,
                });
            }
            Ok(Panel {
                title: format!("{} {name} at t = {}", cfg.name, sol.t),
                series,
            })
        })
        .collect()
}

/// Load a cell CSV written by [`Solution::write_cells`].
pub fn load_cells(path: &Path) -> Result<Solution> {
    let (header, rows) = read_csv(path)?;
    let prim: Vec<String> = header.iter().filter_map(|h| h.strip_prefix("prim_").map(str::to_string)).collect();
    let d = prim.len();
    if header.len() != 1 + 2 * d {
        return Err(Error::Config(format!("{} is not a cell CSV", path.display())));
    }
    Ok(Solution {
        system: String::new(),
        t: f64::NAN,
        conserved_names: header[1..=d].to_vec(),
        primitive_names: prim,
        centers: rows.iter().map(|r| r[0]).collect(),
        cell_sizes: Vec::new(),
        nodes: Vec::new(),
        averages: rows.iter().map(|r| r[1..=d].to_vec()).collect(),
        primitives: rows.iter().map(|r| r[1 + d..].to_vec()).collect(),
        node_primitives: Vec::new(),
    })
}

pub fn write_diagnostics(cfg: &RunConfig, outcome: &RunOutcome, path: &Path) -> Result<()> {
    let (a, b) = extrema_labels(&cfg.system);
    let mut header: Vec<String> = ["step", "t", "dt", a, b, "idp_active", "oe_active", "mp_active", "retries"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(outcome.solution.conserved_names.iter().map(|n| format!("total_{n}")));
    let mut text = header.join(",");
    text.push('\n');
    for r in &outcome.diagnostics {
        let mut fields = vec![
            r.step.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.dt),
            fmt_f64(r.min_first),
            fmt_f64(r.second),
            r.idp_active.to_string(),
            r.oe_active.to_string(),
            r.mp_active.to_string(),
            r.retries.to_string(),
        ];
        fields.extend(r.totals.iter().map(|&x| fmt_f64(x)));
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// `cells.csv`, `nodes.csv`, `diagnostics.csv`, `summary.json`,
/// `config.toml` and, if enabled, `solution.svg` under `dir`.
pub fn write_outputs(cfg: &RunConfig, outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    outcome.solution.write_cells(&dir.join("cells.csv"))?;
    outcome.solution.write_nodes(&dir.join("nodes.csv"))?;
    write_diagnostics(cfg, outcome, &dir.join("diagnostics.csv"))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let summary = serde_json::to_string_pretty(&outcome.summary).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), summary)?;
    if cfg.output.svg {
        let reference = match &cfg.output.reference {
            Some(p) => Some(load_cells(Path::new(p))?),
            None => None,
        };
        let panels = plot_panels(cfg, &outcome.solution, reference.as_ref())?;
        std::fs::write(dir.join("solution.svg"), render_svg(&panels))?;
    }
    Ok(())
}

/// Whether the configuration's boundary makes `Σ ΔxŪ` a conserved quantity.
pub fn is_conservative(cfg: &RunConfig) -> bool {
    cfg.domain.bc == BoundaryCondition::Periodic
}
