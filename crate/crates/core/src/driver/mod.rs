//! Run configurations, presets, convergence studies, reference solutions and
//! output files.

pub mod config;
pub mod convergence;
pub mod initial;
pub mod output;
pub mod reference;
pub mod run;

pub use config::{preset, preset_names, RunConfig, SystemConfig};
pub use convergence::{convergence_study, ConvergenceRow};
pub use initial::InitialCondition;
pub use reference::{reference, ReferenceInfo};
pub use run::{run, RunOptions, RunOutcome, RunSummary, Solution};
