//! Invariant-domain-preserving PAMPA solver for 1D hyperbolic conservation laws.
//!
//! The scheme evolves two sets of degrees of freedom: cell averages of the
//! conservative variables `U` (finite-volume update with numerical fluxes) and
//! point values at the cell interfaces in a set of transformed variables
//! `W = Ψ(U)` (non-conservative update). The transformed variables are chosen
//! so that every finite `W` maps back into the invariant domain, which makes
//! the point-value update positivity/bound preserving without any limiter.
//! A local scaling limiter on the cell midpoints keeps the cell-average
//! decomposition convex, so the cell averages stay admissible under a CFL
//! number of 1/6.
//!
//! Module map:
//!
//! * [`mesh`] grids, boundary conditions and ghost extension
//! * [`systems`] advection, Burgers, Euler and ideal MHD
//! * [`transform`] the Softplus / clipped-ReLU variable maps and their Jacobians
//! * [`limiters`] scaling limiter, oscillation-eliminating damping, MP limiter
//! * [`scheme`] the spatial operator and time-step selection
//! * [`timeint`] SSP Runge–Kutta and multistep integrators
//! * [`oracle`] brute-force verifiers used by tests and the `verify` command
//! * [`driver`] run configurations, presets, convergence studies and output

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::wrong_self_convention, clippy::too_many_arguments)]

pub mod driver;
pub mod error;
pub mod limiters;
pub mod mesh;
pub mod oracle;
pub mod scheme;
pub mod systems;
pub mod timeint;
pub mod transform;

pub use error::{DomainError, Error, Result};
pub use mesh::{BoundaryCondition, Grid1D};
pub use scheme::{DofField, PampaScheme};
pub use systems::{Advection, Burgers, EquationSystem, Euler, Floors, Mhd, ScalarBounds};

/// A small fixed-size state vector. Used both for conservative states `U`
/// and for transformed states `W`; the aliases below say which is meant.
pub type State<const D: usize> = nalgebra::SVector<f64, D>;

/// Cell averages and interface fluxes live in conservative variables.
pub type ConservedState<const D: usize> = State<D>;

/// Point values are stored in the transformed variables `W = Ψ(U)`.
pub type TransformedState<const D: usize> = State<D>;

/// `d × d` Jacobian of the non-conservative system in `W` variables.
pub type JacobianMatrix<const D: usize> = nalgebra::SMatrix<f64, D, D>;
