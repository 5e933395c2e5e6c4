//! Run configuration and the built-in presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::initial::InitialCondition;
use crate::error::{Error, Result};
use crate::limiters::OscillationControl;
use crate::mesh::BoundaryCondition;
use crate::scheme::{SchemeOptions, MAX_IDP_CFL};
use crate::systems::Floors;
use crate::timeint::{IntegratorKind, TimeSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Advection {
        bounds: [f64; 2],
    },
    Burgers {
        bounds: [f64; 2],
    },
    Euler {
        gamma: f64,
        #[serde(default = "one")]
        rho_ref: f64,
    },
    Mhd {
        gamma: f64,
        bx: f64,
        #[serde(default = "one")]
        rho_ref: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SystemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SystemConfig::Advection { .. } => "advection",
            SystemConfig::Burgers { .. } => "burgers",
            SystemConfig::Euler { .. } => "euler",
            SystemConfig::Mhd { .. } => "mhd",
        }
    }

    /// Number of conserved components.
    pub fn components(&self) -> usize {
        match self {
            SystemConfig::Advection { .. } | SystemConfig::Burgers { .. } => 1,
            SystemConfig::Euler { .. } => 3,
            SystemConfig::Mhd { .. } => 7,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.components() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub a: f64,
    pub b: f64,
    pub cells: usize,
    pub bc: BoundaryCondition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorKind,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub max_retries: u32,
}

fn default_integrator() -> IntegratorKind {
    IntegratorKind::SspRk3
}

fn default_cfl() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimiterConfig {
    pub idp: bool,
    pub oscillation: OscillationControl,
    pub floor_cap: f64,
    /// See [`SchemeOptions::cap_alpha`].
    pub cap_alpha: bool,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self {
            idp: true,
            oscillation: OscillationControl::None,
            floor_cap: Floors::DEFAULT_CAP,
            cap_alpha: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Write the cell CSV every this many steps; zero disables snapshots.
    pub snapshot_every: usize,
    pub svg: bool,
    /// Primitive variables to plot, one panel each. Empty means the first
    /// primitive (and pressure for gas dynamics).
    pub plot: Vec<String>,
    /// Optional reference cell CSV overlaid on the plot.
    pub reference: Option<String>,
    /// Run the oracle domain sweep on every stage.
    pub sweep: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            snapshot_every: 0,
            svg: true,
            plot: Vec::new(),
            reference: None,
            sweep: false,
        }
    }
}

/// Settings of the first-order reference solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub cells: usize,
    pub cfl: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self { cells: 10_000, cfl: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub system: SystemConfig,
    pub domain: DomainConfig,
    pub initial: InitialCondition,
    pub time: TimeConfig,
    #[serde(default)]
    pub limiter: LimiterConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// A preset name or a path to a TOML file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        match preset(name_or_path) {
            Some(cfg) => Ok(cfg),
            None => {
                let path = Path::new(name_or_path);
                if path.exists() {
                    Self::from_file(path)
                } else {
                    Err(Error::Config(format!(
                        "'{name_or_path}' is neither a preset ({}) nor a file",
                        preset_names().join(", ")
                    )))
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if !(d.a.is_finite() && d.b.is_finite() && d.a < d.b) {
            return Err(Error::Config(format!("domain needs a < b, got [{}, {}]", d.a, d.b)));
        }
        if d.cells < 3 {
            return Err(Error::Config(format!("need at least 3 cells, got {}", d.cells)));
        }
        if d.bc == BoundaryCondition::Reflective && self.system.is_scalar() {
            return Err(Error::Config("reflective boundaries need a velocity component".into()));
        }
        let t = &self.time;
        if !(t.cfl > 0.0 && t.cfl <= MAX_IDP_CFL) {
            return Err(Error::Config(format!("cfl must lie in (0, 1/6], got {}", t.cfl)));
        }
        if !(t.t_final >= 0.0 && t.t_final.is_finite()) {
            return Err(Error::Config(format!("bad final time {}", t.t_final)));
        }
        match self.system {
            SystemConfig::Advection { bounds } | SystemConfig::Burgers { bounds } => {
                if !(bounds[0] < bounds[1]) {
                    return Err(Error::Config(format!("bounds need min < max, got {bounds:?}")));
                }
            }
            SystemConfig::Euler { gamma, rho_ref } | SystemConfig::Mhd { gamma, rho_ref, .. } => {
                if !(gamma > 1.0) || !(rho_ref > 0.0) {
                    return Err(Error::Config(format!("need gamma > 1 and rho_ref > 0, got {gamma}, {rho_ref}")));
                }
            }
        }
        if !(self.limiter.floor_cap > 0.0) {
            return Err(Error::Config("floor cap must be positive".into()));
        }
        self.initial.validate(&self.system, self.domain.cells)
    }

    pub fn scheme_options(&self) -> SchemeOptions {
        SchemeOptions {
            idp: self.limiter.idp,
            oscillation: self.limiter.oscillation,
            floor_cap: self.limiter.floor_cap,
            cap_alpha: self.limiter.cap_alpha,
        }
    }

    pub fn time_settings(&self) -> TimeSettings {
        TimeSettings {
            integrator: self.time.integrator,
            cfl: self.time.cfl,
            max_retries: self.time.max_retries,
            ..TimeSettings::default()
        }
    }

    /// Same run on `cells` cells.
    pub fn with_cells(&self, cells: usize) -> Self {
        let mut c = self.clone();
        c.domain.cells = cells;
        c
    }
}

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../../presets/", $name, ".toml"))),)*
        ];
    };
}

presets!(
    "advection_smooth",
    "jiang_shu",
    "burgers_shock",
    "euler_smooth",
    "sod",
    "blast_waves",
    "double_rarefaction",
    "shu_osher",
    "sedov",
    "leblanc",
    "mhd_shock_tube",
    "mhd_leblanc",
);

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw TOML text of a preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn preset(name: &str) -> Option<RunConfig> {
    preset_source(name).map(|s| RunConfig::from_toml(s).unwrap_or_else(|e| panic!("preset {name}: {e}")))
}
