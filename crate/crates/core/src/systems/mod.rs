//! Equation systems: flux, wave speeds, invariant domain and variable maps.

mod euler;
mod mhd;
mod scalar;

pub use euler::Euler;
pub use mhd::Mhd;
pub use scalar::{Advection, Burgers, ScalarBounds};

use std::fmt::Debug;

use crate::error::DomainError;
use crate::{JacobianMatrix, State};

/// Positivity floors `(ε_ρ, ε_p)` for Euler and MHD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Floors {
    pub density: f64,
    pub pressure: f64,
}

impl Floors {
    pub const DEFAULT_CAP: f64 = 1e-13;

    pub fn zero() -> Self {
        Self {
            density: 0.0,
            pressure: 0.0,
        }
    }

    pub fn new(density: f64, pressure: f64) -> Self {
        Self { density, pressure }
    }
}

/// Where the normal (x) velocity sits in the conservative and transformed
/// vectors. Reflective boundaries negate these entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VelocityIndex {
    pub conserved: usize,
    pub transformed: usize,
}

/// How a system's invariant domain is described to the limiters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// `G = [min, max]` for a scalar law.
    Interval(ScalarBounds),
    /// `ρ > 0`, `p > 0`, with density the first conservative component.
    Positivity,
}

pub trait EquationSystem<const D: usize>: Clone + Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn conserved_names(&self) -> [&'static str; D];

    fn primitive_names(&self) -> [&'static str; D];

    fn flux(&self, u: &State<D>) -> State<D>;

    /// Pointwise bound on the characteristic speeds, used for time steps and
    /// for the point-value splitting `α_j`.
    fn max_wave_speed(&self, u: &State<D>) -> f64;

    /// Smallest and largest characteristic speeds at `u`.
    fn wave_speed_range(&self, u: &State<D>) -> (f64, f64);

    /// A speed for which the generalized Lax–Friedrichs splitting of the pair
    /// stays in the invariant domain.
    fn idp_pair_speed(&self, ul: &State<D>, ur: &State<D>) -> f64;

    fn domain_kind(&self) -> DomainKind;

    /// Domain predicate. Scalars test the closed interval and ignore the
    /// floors; Euler and MHD test `ρ > ε_ρ` and `p > ε_p` strictly.
    fn in_domain(&self, u: &State<D>, floors: &Floors) -> bool {
        if u.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self.domain_kind() {
            DomainKind::Interval(b) => b.contains(u[0]),
            DomainKind::Positivity => {
                let rho = u[0];
                rho > floors.density && self.pressure(u).is_some_and(|p| p > floors.pressure)
            }
        }
    }

    /// Thermodynamic pressure; `None` for scalar laws.
    fn pressure(&self, _u: &State<D>) -> Option<f64> {
        None
    }

    /// Density; `None` for scalar laws.
    fn density(&self, u: &State<D>) -> Option<f64> {
        match self.domain_kind() {
            DomainKind::Positivity => Some(u[0]),
            DomainKind::Interval(_) => None,
        }
    }

    fn to_primitive(&self, u: &State<D>) -> State<D>;

    fn from_primitive(&self, v: &State<D>) -> State<D>;

    /// `W = Ψ(U)`.
    fn to_transformed(&self, u: &State<D>) -> Result<State<D>, DomainError>;

    /// `U = Ψ⁻¹(W)`; lands in the invariant domain for every finite `W`
    /// (except for the unclamped scalar map used by non-IDP runs).
    fn from_transformed(&self, w: &State<D>) -> State<D>;

    /// Jacobian of the quasilinear system in `W` variables, evaluated at the
    /// pair `(w, u)` with `u = Ψ⁻¹(w)`.
    fn jacobian_transformed(&self, w: &State<D>, u: &State<D>) -> JacobianMatrix<D>;

    fn normal_velocity(&self) -> Option<VelocityIndex> {
        None
    }

    /// Floors for one stage: `ε = min(cap, min_j ρ̄_j)` and likewise for `p`.
    fn floors(&self, averages: &[State<D>], cap: f64) -> Floors {
        match self.domain_kind() {
            DomainKind::Interval(_) => Floors::zero(),
            DomainKind::Positivity => {
                let mut f = Floors::new(cap, cap);
                for u in averages {
                    f.density = f.density.min(u[0]);
                    if let Some(p) = self.pressure(u) {
                        f.pressure = f.pressure.min(p);
                    }
                }
                f
            }
        }
    }

    /// Checked flux: fails when the state is outside the domain with zero
    /// floors (pressure or density not recoverable).
    fn try_flux(&self, u: &State<D>) -> Result<State<D>, DomainError> {
        self.check(u)?;
        Ok(self.flux(u))
    }

    fn try_max_wave_speed(&self, u: &State<D>) -> Result<f64, DomainError> {
        self.check(u)?;
        Ok(self.max_wave_speed(u))
    }

    fn try_idp_pair_speed(&self, ul: &State<D>, ur: &State<D>) -> Result<f64, DomainError> {
        self.check(ul)?;
        self.check(ur)?;
        Ok(self.idp_pair_speed(ul, ur))
    }

    fn check(&self, u: &State<D>) -> Result<(), DomainError> {
        if self.in_domain(u, &Floors::zero()) {
            Ok(())
        } else {
            Err(DomainError::new(format!("{} state {:?}", self.name(), u.as_slice())))
        }
    }
}
