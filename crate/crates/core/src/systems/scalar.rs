use serde::{Deserialize, Serialize};

use super::{DomainKind, EquationSystem};
use crate::error::{DomainError, Error, Result};
use crate::transform::ScalarMap;
use crate::{JacobianMatrix, State};

/// Invariant interval `G = [min, max]` of a scalar law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarBounds {
    pub min: f64,
    pub max: f64,
}

impl ScalarBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::config(format!("need U_min < U_max, got [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.min && u <= self.max
    }
}

/// Linear advection `u_t + u_x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advection {
    pub map: ScalarMap,
}

impl Advection {
    pub fn new(bounds: ScalarBounds) -> Self {
        Self {
            map: ScalarMap::clipped(bounds),
        }
    }

    pub fn with_map(map: ScalarMap) -> Self {
        Self { map }
    }
}

/// Inviscid Burgers `u_t + (u²/2)_x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burgers {
    pub map: ScalarMap,
}

impl Burgers {
    pub fn new(bounds: ScalarBounds) -> Self {
        Self {
            map: ScalarMap::clipped(bounds),
        }
    }

    pub fn with_map(map: ScalarMap) -> Self {
        Self { map }
    }
}

macro_rules! scalar_common {
    () => {
        fn conserved_names(&self) -> [&'static str; 1] {
            ["u"]
        }

        fn primitive_names(&self) -> [&'static str; 1] {
            ["u"]
        }

        fn domain_kind(&self) -> DomainKind {
            DomainKind::Interval(self.map.bounds)
        }

        fn to_primitive(&self, u: &State<1>) -> State<1> {
            *u
        }

        fn from_primitive(&self, v: &State<1>) -> State<1> {
            *v
        }

        fn to_transformed(&self, u: &State<1>) -> Result<State<1>, DomainError> {
            Ok(State::<1>::new(self.map.forward(u[0])?))
        }

        fn from_transformed(&self, w: &State<1>) -> State<1> {
            State::<1>::new(self.map.inverse(w[0]))
        }

        fn jacobian_transformed(&self, _w: &State<1>, u: &State<1>) -> JacobianMatrix<1> {
            JacobianMatrix::<1>::new(self.derivative(u[0]))
        }

        fn max_wave_speed(&self, u: &State<1>) -> f64 {
            self.derivative(u[0]).abs()
        }

        fn wave_speed_range(&self, u: &State<1>) -> (f64, f64) {
            let a = self.derivative(u[0]);
            (a, a)
        }

        fn idp_pair_speed(&self, ul: &State<1>, ur: &State<1>) -> f64 {
            self.derivative(ul[0]).abs().max(self.derivative(ur[0]).abs())
        }
    };
}

impl Advection {
    fn derivative(&self, _u: f64) -> f64 {
        1.0
    }
}

impl Burgers {
    fn derivative(&self, u: f64) -> f64 {
        u
    }
}

impl EquationSystem<1> for Advection {
    fn name(&self) -> &'static str {
        "advection"
    }

    fn flux(&self, u: &State<1>) -> State<1> {
        *u
    }

    scalar_common!();
}

impl EquationSystem<1> for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }

    fn flux(&self, u: &State<1>) -> State<1> {
        State::<1>::new(0.5 * u[0] * u[0])
    }

    scalar_common!();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Floors;

    fn unit() -> ScalarBounds {
        ScalarBounds::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn fluxes() {
        let b = Burgers::new(ScalarBounds::new(-1.0, 2.0).unwrap());
        assert_eq!(b.flux(&State::<1>::new(2.0))[0], 2.0);
        let a = Advection::new(unit());
        assert_eq!(a.flux(&State::<1>::new(0.7))[0], 0.7);
    }

    #[test]
    fn speeds() {
        let a = Advection::new(unit());
        assert_eq!(a.max_wave_speed(&State::<1>::new(0.3)), 1.0);
        assert_eq!(a.max_wave_speed(&State::<1>::new(-7.0)), 1.0);
        let b = Burgers::new(ScalarBounds::new(-1.0, 2.0).unwrap());
        assert_eq!(b.idp_pair_speed(&State::<1>::new(2.0), &State::<1>::new(-1.0)), 2.0);
    }

    #[test]
    fn interval_membership() {
        let a = Advection::new(unit());
        assert!(a.in_domain(&State::<1>::new(0.5), &Floors::zero()));
        assert!(a.in_domain(&State::<1>::new(1.0), &Floors::zero()));
        assert!(!a.in_domain(&State::<1>::new(1.0 + 1e-15), &Floors::zero()));
        assert!(!a.in_domain(&State::<1>::new(f64::NAN), &Floors::zero()));
        assert!(a.try_flux(&State::<1>::new(-0.1)).is_err());
    }

    #[test]
    fn bounds_validation() {
        assert!(ScalarBounds::new(1.0, 1.0).is_err());
        assert!(ScalarBounds::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn jacobian_is_flux_derivative_at_clamped_value() {
        let b = Burgers::new(ScalarBounds::new(-1.0, 2.0).unwrap());
        let w = State::<1>::new(1.7);
        let u = b.from_transformed(&w);
        assert_eq!(u[0], 2.0);
        assert_eq!(b.jacobian_transformed(&w, &u)[(0, 0)], 2.0);
        let a = Advection::new(unit());
        let w = State::<1>::new(0.4);
        assert_eq!(a.jacobian_transformed(&w, &a.from_transformed(&w))[(0, 0)], 1.0);
    }
}
