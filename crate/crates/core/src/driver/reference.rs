//! First-order reference solutions: local Lax–Friedrichs finite volumes with
//! forward Euler time stepping on a fine grid.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::run::{scalar_map, setup, with_system, Solution};
use crate::error::{Error, Result};
use crate::mesh::BoundaryCondition;
use crate::scheme::llf_flux;
use crate::systems::{Advection, Burgers, EquationSystem, Euler, Mhd};
use crate::State;

use super::config::SystemConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceInfo {
    pub name: String,
    pub scheme: &'static str,
    pub cells: usize,
    pub cfl: f64,
    pub steps: usize,
    pub t_final: f64,
}

fn ghost<S: EquationSystem<D>, const D: usize>(sys: &S, u: &[State<D>], bc: BoundaryCondition, i: isize) -> State<D> {
    let (src, flip) = bc.source_cell(u.len(), i);
    let mut g = u[src];
    if flip {
        if let Some(v) = sys.normal_velocity() {
            g[v.conserved] = -g[v.conserved];
        }
    }
    g
}

/// Advance cell averages to `t_final`; returns the averages and step count.
pub fn lf_finite_volume<S: EquationSystem<D>, const D: usize>(
    sys: &S,
    mut u: Vec<State<D>>,
    dx: f64,
    bc: BoundaryCondition,
    t_final: f64,
    cfl: f64,
) -> Result<(Vec<State<D>>, usize)> {
    let n = u.len();
    let mut t = 0.0;
    let mut steps = 0;
    while t < t_final {
        let speed = u
            .par_iter()
            .map(|s| sys.try_max_wave_speed(s))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::Invariant(format!("reference solver: wave speed {speed}")));
        }
        let dt = (cfl * dx / speed).min(t_final - t);
        let flux: Vec<State<D>> = (0..=n as isize)
            .into_par_iter()
            .map(|j| llf_flux(sys, &ghost(sys, &u, bc, j - 1), &ghost(sys, &u, bc, j)))
            .collect();
        let r = dt / dx;
        u.par_iter_mut()
            .enumerate()
            .for_each(|(c, s)| *s -= (flux[c + 1] - flux[c]) * r);
        t = if t_final - t <= dt { t_final } else { t + dt };
        steps += 1;
    }
    Ok((u, steps))
}

fn reference_system<S: EquationSystem<D>, const D: usize>(cfg: &RunConfig, system: S) -> Result<(Solution, ReferenceInfo)> {
    let fine = cfg.with_cells(cfg.reference.cells);
    let (scheme, field) = setup(&fine, system)?;
    let sys = &scheme.system;
    let grid = &scheme.grid;
    let (u, steps) = lf_finite_volume(
        sys,
        field.averages,
        grid.cell_sizes()[0],
        fine.domain.bc,
        fine.time.t_final,
        fine.reference.cfl,
    )?;
    let solution = Solution {
        system: sys.name().to_string(),
        t: fine.time.t_final,
        conserved_names: sys.conserved_names().iter().map(|s| s.to_string()).collect(),
        primitive_names: sys.primitive_names().iter().map(|s| s.to_string()).collect(),
        centers: grid.cell_centers().to_vec(),
        cell_sizes: grid.cell_sizes().to_vec(),
        nodes: grid.nodes().to_vec(),
        primitives: u.iter().map(|s| sys.to_primitive(s).as_slice().to_vec()).collect(),
        averages: u.iter().map(|s| s.as_slice().to_vec()).collect(),
        node_primitives: Vec::new(),
    };
    let info = ReferenceInfo {
        name: cfg.name.clone(),
        scheme: "lax_friedrichs_forward_euler",
        cells: fine.domain.cells,
        cfl: fine.reference.cfl,
        steps,
        t_final: fine.time.t_final,
    };
    Ok((solution, info))
}

/// Reference solution of `cfg` on `cfg.reference.cells` cells. The limiter
/// settings are ignored; scalar data use the plain (unclipped) variable map.
pub fn reference(cfg: &RunConfig) -> Result<(Solution, ReferenceInfo)> {
    let mut plain = cfg.clone();
    plain.limiter.idp = false;
    plain.validate()?;
    if !(plain.reference.cfl > 0.0 && plain.reference.cfl <= 0.5) {
        return Err(Error::Config(format!("reference cfl must lie in (0, 1/2], got {}", plain.reference.cfl)));
    }
    with_system!(plain, sys => reference_system(&plain, sys))
}

/// `reference.csv` and `reference.json` under `dir`.
pub fn write_reference(solution: &Solution, info: &ReferenceInfo, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    solution.write_cells(&dir.join("reference.csv"))?;
    let json = serde_json::to_string_pretty(info).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(dir.join("reference.json"), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::config::preset;

    #[test]
    fn conserves_mass_on_periodic_grid() {
        let mut cfg = preset("advection_smooth").unwrap();
        cfg.reference.cells = 200;
        cfg.time.t_final = 0.25;
        let (sol, info) = reference(&cfg).unwrap();
        let before = 1.0 + 3.0 / 8.0;
        let after: f64 = sol.totals()[0];
        assert!((after - before).abs() < 1e-12);
        assert!(info.steps > 0);
        assert!(sol.primitives.iter().all(|p| p[0] >= 1.0 && p[0] <= 2.0));
    }

    #[test]
    fn reflective_walls_conserve_mass() {
        let mut cfg = preset("blast_waves").unwrap();
        cfg.reference.cells = 400;
        cfg.time.t_final = 0.01;
        let (sol, _) = reference(&cfg).unwrap();
        assert!((sol.totals()[0] - 1.0).abs() < 1e-12);
        assert!(sol.primitives.iter().all(|p| p[0] > 0.0 && p[2] > 0.0));
    }
}
