//! Initial data: point values in primitive variables and cell averages of the
//! conservative variables by composite Gauss quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::SystemConfig;
use crate::error::{Error, Result};
use crate::mesh::Grid1D;
use crate::systems::{DomainKind, EquationSystem};
use crate::State;

/// How the Sedov blast energy is derived from the configured constant `E₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyScaling {
    /// `E = E₀ · Δx`.
    #[default]
    TimesDx,
    /// `E = E₀ / Δx`, a fixed total energy `E₀` deposited in one cell.
    OverDx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `u = offset + amplitude · sin(wavenumber · x)^power`.
    SinePower {
        offset: f64,
        amplitude: f64,
        wavenumber: f64,
        power: i32,
    },
    /// Gaussian, square, triangle and ellipse pulses on `[−1, 1]`.
    JiangShu {
        a: f64,
        z: f64,
        delta: f64,
        alpha: f64,
        /// Defaults to `ln 2 / (36 δ²)`.
        #[serde(default)]
        beta: Option<f64>,
    },
    /// Constant primitive states separated by `breakpoints`. A node exactly on
    /// breakpoint `k` takes `states[at_breakpoint[k]]`, by default the state
    /// on its left.
    Piecewise {
        breakpoints: Vec<f64>,
        states: Vec<Vec<f64>>,
        #[serde(default)]
        at_breakpoint: Vec<usize>,
    },
    /// Gas-dynamics density wave `ρ = rho0 + amplitude · sin(wavenumber (x − v t))`
    /// with constant velocity and pressure.
    DensityWave {
        rho0: f64,
        amplitude: f64,
        wavenumber: f64,
        velocity: f64,
        pressure: f64,
    },
    /// A shock state left of `shock_at` running into a density wave at rest.
    ShuOsher {
        shock_at: f64,
        left: [f64; 3],
        rho0: f64,
        amplitude: f64,
        wavenumber: f64,
        pressure: f64,
    },
    /// Gas at rest with total energy `energy`, except the center cell whose
    /// average holds the blast energy. Node values stay at the background.
    Sedov {
        density: f64,
        energy: f64,
        blast: f64,
        #[serde(default)]
        energy_scaling: EnergyScaling,
    },
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Five-point Gauss average of `f` over `[a, b]`.
pub fn gauss5_average<F: Fn(f64) -> Vec<f64>>(f: &F, a: f64, b: f64) -> Vec<f64> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc: Vec<f64> = Vec::new();
    for &(xi, w) in GAUSS5.iter() {
        let v = f(c + h * xi);
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
        }
        for (s, x) in acc.iter_mut().zip(v) {
            *s += 0.5 * w * x;
        }
    }
    acc
}

/// Average over `[a, b]` split at the given points and into `sub` equal
/// pieces per smooth part.
pub(crate) fn composite_average<F: Fn(f64) -> Vec<f64>>(f: &F, a: f64, b: f64, splits: &[f64], sub: usize) -> Vec<f64> {
    let mut cuts = vec![a];
    cuts.extend(splits.iter().copied().filter(|&s| s > a && s < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let mut total: Vec<f64> = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let h = (r - l) / sub as f64;
        for k in 0..sub {
            let lo = l + k as f64 * h;
            let hi = if k + 1 == sub { r } else { lo + h };
            let avg = gauss5_average(f, lo, hi);
            if total.is_empty() {
                total = vec![0.0; avg.len()];
            }
            for (t, v) in total.iter_mut().zip(avg) {
                *t += v * (hi - lo);
            }
        }
    }
    total.iter().map(|t| t / (b - a)).collect()
}

impl InitialCondition {
    pub fn validate(&self, system: &SystemConfig, cells: usize) -> Result<()> {
        let d = system.components();
        let scalar_only = |what: &str| {
            if system.is_scalar() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} initial data needs a scalar system")))
            }
        };
        let euler_only = |what: &str| {
            if matches!(system, SystemConfig::Euler { .. }) {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} initial data needs the Euler system")))
            }
        };
        match self {
            InitialCondition::SinePower { .. } => scalar_only("sine_power"),
            InitialCondition::JiangShu { delta, .. } => {
                if !(*delta > 0.0) {
                    return Err(Error::Config("jiang_shu needs delta > 0".into()));
                }
                scalar_only("jiang_shu")
            }
            InitialCondition::Piecewise {
                breakpoints,
                states,
                at_breakpoint,
            } => {
                if states.len() != breakpoints.len() + 1 {
                    return Err(Error::Config(format!(
                        "{} breakpoints need {} states, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        states.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config("breakpoints must increase".into()));
                }
                if let Some(s) = states.iter().find(|s| s.len() != d) {
                    return Err(Error::Config(format!(
                        "{} states have {d} primitive components, got {}",
                        system.name(),
                        s.len()
                    )));
                }
                if !at_breakpoint.is_empty()
                    && (at_breakpoint.len() != breakpoints.len() || at_breakpoint.iter().any(|&k| k >= states.len()))
                {
                    return Err(Error::Config("at_breakpoint needs one valid state index per breakpoint".into()));
                }
                Ok(())
            }
            InitialCondition::DensityWave { .. } => euler_only("density_wave"),
            InitialCondition::ShuOsher { .. } => euler_only("shu_osher"),
            InitialCondition::Sedov { .. } => {
                if cells % 2 == 0 {
                    return Err(Error::Config(format!("sedov needs an odd cell count, got {cells}")));
                }
                euler_only("sedov")
            }
        }
    }

    /// Primitive state at `x` at time zero.
    pub fn point(&self, x: f64) -> Vec<f64> {
        match self {
            InitialCondition::SinePower {
                offset,
                amplitude,
                wavenumber,
                power,
            } => vec![offset + amplitude * (wavenumber * x).sin().powi(*power)],
            InitialCondition::JiangShu {
                a,
                z,
                delta,
                alpha,
                beta,
            } => {
                let beta = beta.unwrap_or(std::f64::consts::LN_2 / (36.0 * delta * delta));
                let g1 = |z: f64| (-beta * (x - z).powi(2)).exp();
                let g2 = |a: f64| (1.0 - alpha * alpha * (x - a).powi(2)).max(0.0).sqrt();
                let u = if (-0.8..=-0.6).contains(&x) {
                    (g1(z - delta) + g1(z + delta) + 4.0 * g1(*z)) / 6.0
                } else if (-0.4..=-0.2).contains(&x) {
                    1.0
                } else if (0.0..=0.2).contains(&x) {
                    1.0 - (10.0 * (x - 0.1)).abs()
                } else if (0.4..=0.6).contains(&x) {
                    (g2(a - delta) + g2(a + delta) + 4.0 * g2(*a)) / 6.0
                } else {
                    0.0
                };
                vec![u]
            }
            InitialCondition::Piecewise {
                breakpoints,
                states,
                at_breakpoint,
            } => {
                for (k, &b) in breakpoints.iter().enumerate() {
                    if x == b {
                        return states[at_breakpoint.get(k).copied().unwrap_or(k)].clone();
                    }
                    if x < b {
                        return states[k].clone();
                    }
                }
                states[breakpoints.len()].clone()
            }
            InitialCondition::DensityWave {
                rho0,
                amplitude,
                wavenumber,
                velocity,
                pressure,
            } => vec![rho0 + amplitude * (wavenumber * x).sin(), *velocity, *pressure],
            InitialCondition::ShuOsher {
                shock_at,
                left,
                rho0,
                amplitude,
                wavenumber,
                pressure,
            } => {
                if x <= *shock_at {
                    left.to_vec()
                } else {
                    vec![rho0 + amplitude * (wavenumber * x).sin(), 0.0, *pressure]
                }
            }
            InitialCondition::Sedov { density, energy, .. } => vec![*density, 0.0, *energy],
        }
    }

    /// Points where the data is not smooth.
    fn splits(&self) -> Vec<f64> {
        match self {
            InitialCondition::JiangShu { a, delta, alpha, .. } => {
                let r = 1.0 / alpha;
                let mut s = vec![-0.8, -0.6, -0.4, -0.2, 0.0, 0.1, 0.2, 0.4, 0.6];
                for c in [a - delta, *a, a + delta] {
                    s.push(c - r);
                    s.push(c + r);
                }
                s
            }
            InitialCondition::Piecewise { breakpoints, .. } => breakpoints.clone(),
            InitialCondition::ShuOsher { shock_at, .. } => vec![*shock_at],
            _ => Vec::new(),
        }
    }

    /// Exact primitive solution at `(x, t)` when one is known for `system`.
    pub fn exact(&self, system: &SystemConfig, x: f64, t: f64) -> Option<Vec<f64>> {
        match (self, system) {
            (InitialCondition::SinePower { .. }, SystemConfig::Advection { .. }) => Some(self.point(x - t)),
            (InitialCondition::DensityWave { velocity, .. }, SystemConfig::Euler { .. }) => {
                Some(self.point(x - velocity * t))
            }
            _ => None,
        }
    }

    pub fn has_exact(&self, system: &SystemConfig) -> bool {
        self.exact(system, 0.0, 0.0).is_some()
    }

    /// Conservative cell averages and node values at time zero.
    pub fn build<S: EquationSystem<D>, const D: usize>(
        &self,
        system: &S,
        grid: &Grid1D,
    ) -> Result<(Vec<State<D>>, Vec<State<D>>)> {
        let conserved = |v: Vec<f64>| system.from_primitive(&State::<D>::from_column_slice(&v));
        let nodes: Vec<State<D>> = grid.nodes().iter().map(|&x| conserved(self.point(x))).collect();
        let x = grid.nodes();
        let splits = self.splits();
        let f = |y: f64| conserved(self.point(y)).as_slice().to_vec();
        let mut averages: Vec<State<D>> = (0..grid.num_cells())
            .map(|c| State::<D>::from_column_slice(&composite_average(&f, x[c], x[c + 1], &splits, 4)))
            .collect();

        if let InitialCondition::Sedov {
            density,
            energy,
            blast,
            energy_scaling,
        } = self
        {
            // the Sedov constants are total energies, not pressures
            let mut background = State::<D>::zeros();
            background[0] = *density;
            background[D - 1] = *energy;
            averages.fill(background);
            let c = grid.num_cells() / 2;
            let dx = grid.cell_sizes()[c];
            averages[c][D - 1] = match energy_scaling {
                EnergyScaling::TimesDx => blast * dx,
                EnergyScaling::OverDx => blast / dx,
            };
            return Ok((averages, vec![background; grid.num_nodes()]));
        }
        if let DomainKind::Interval(b) = system.domain_kind() {
            // quadrature can round a hair outside the bounds
            for a in averages.iter_mut() {
                a[0] = a[0].clamp(b.min, b.max);
            }
        }
        Ok((averages, nodes))
    }

    /// Exact conservative cell averages at time `t`.
    pub fn exact_averages<S: EquationSystem<D>, const D: usize>(
        &self,
        config: &SystemConfig,
        system: &S,
        grid: &Grid1D,
        t: f64,
    ) -> Option<Vec<State<D>>> {
        if !self.has_exact(config) {
            return None;
        }
        let x = grid.nodes();
        let f = |y: f64| {
            let v = self.exact(config, y, t).expect("exact solution");
            system.from_primitive(&State::<D>::from_column_slice(&v)).as_slice().to_vec()
        };
        Some(
            (0..grid.num_cells())
                .map(|c| State::<D>::from_column_slice(&composite_average(&f, x[c], x[c + 1], &[], 2)))
                .collect(),
        )
    }
}

/// `2π`, for presets written as multiples of it.
pub const TWO_PI: f64 = 2.0 * PI;
