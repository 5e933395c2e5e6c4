//! Local scaling limiter: pulls the midpoint toward the cell average until it
//! is admissible and blends the endpoint traces with the same factor.

use super::LimitedCellTriple;
use crate::error::{Error, Result};
use crate::systems::{DomainKind, EquationSystem, Floors, ScalarBounds};
use crate::State;

/// Re-halvings of `θ_p` before collapsing the cell to its average.
const MAX_PRESSURE_RETRIES: usize = 3;

fn blend<const D: usize>(avg: &State<D>, u: &State<D>, theta: f64) -> State<D> {
    avg * (1.0 - theta) + u * theta
}

/// Scalar limiter on `G = [min, max]`.
pub fn idp_limit_scalar(
    avg: f64,
    uj: f64,
    umid: f64,
    uj1: f64,
    bounds: ScalarBounds,
) -> Result<LimitedCellTriple<1>> {
    let ScalarBounds { min, max } = bounds;
    if !bounds.contains(avg) {
        return Err(Error::Invariant(format!(
            "cell average {avg} outside [{min}, {max}] entering the limiter"
        )));
    }
    let theta = if umid < min {
        (avg - min) / (avg - umid)
    } else if umid > max {
        (max - avg) / (umid - avg)
    } else if umid.is_nan() {
        0.0
    } else {
        1.0
    };
    let s = |u: f64| State::<1>::new(u);
    if theta == 1.0 {
        return Ok(LimitedCellTriple::identity(s(uj), s(umid), s(uj1)));
    }
    // the blended values lie in G in exact arithmetic; clamp away roundoff
    let b = |u: f64| ((1.0 - theta) * avg + theta * u).clamp(min, max);
    Ok(LimitedCellTriple {
        left: s(b(uj)),
        mid: s(b(umid)),
        right: s(b(uj1)),
        theta,
    })
}

/// Two-stage density/pressure limiter for Euler and MHD.
pub fn idp_limit_system<S: EquationSystem<D>, const D: usize>(
    system: &S,
    avg: &State<D>,
    uj: &State<D>,
    umid: &State<D>,
    uj1: &State<D>,
    floors: &Floors,
) -> Result<LimitedCellTriple<D>> {
    let rho_bar = avg[0];
    let p_bar = system.pressure(avg).unwrap_or(f64::NAN);
    if !(rho_bar >= floors.density && p_bar >= floors.pressure && rho_bar > 0.0 && p_bar > 0.0) {
        return Err(Error::Invariant(format!(
            "cell average with rho = {rho_bar}, p = {p_bar} below floors ({}, {}) entering the limiter",
            floors.density, floors.pressure
        )));
    }

    let rho_mid = umid[0];
    let theta_rho = if rho_mid < floors.density {
        (rho_bar - floors.density) / (rho_bar - rho_mid)
    } else if rho_mid.is_nan() {
        0.0
    } else {
        1.0
    };
    let u_star = blend(avg, umid, theta_rho);
    let p_star = system.pressure(&u_star).unwrap_or(f64::NAN);
    let mut theta_p = if p_star < floors.pressure {
        (p_bar - floors.pressure) / (p_bar - p_star)
    } else if p_star.is_nan() {
        0.0
    } else {
        1.0
    };

    let mut theta = theta_rho * theta_p;
    if theta == 1.0 {
        return Ok(LimitedCellTriple::identity(*uj, *umid, *uj1));
    }
    let admissible = |u: &State<D>| {
        u[0] > 0.0 && system.pressure(u).is_some_and(|p| p >= floors.pressure && p > 0.0)
    };
    let mut mid = blend(avg, umid, theta);
    let mut retries = 0;
    while !admissible(&mid) {
        if retries == MAX_PRESSURE_RETRIES {
            theta_p = 0.0;
        } else {
            theta_p *= 0.5;
            retries += 1;
        }
        theta = theta_rho * theta_p;
        mid = blend(avg, umid, theta);
        if theta_p == 0.0 {
            break;
        }
    }
    Ok(LimitedCellTriple {
        left: blend(avg, uj, theta),
        mid,
        right: blend(avg, uj1, theta),
        theta,
    })
}

/// Dispatch on the system's domain description.
pub fn idp_limit<S: EquationSystem<D>, const D: usize>(
    system: &S,
    avg: &State<D>,
    uj: &State<D>,
    umid: &State<D>,
    uj1: &State<D>,
    floors: &Floors,
) -> Result<LimitedCellTriple<D>> {
    match system.domain_kind() {
        DomainKind::Interval(bounds) => {
            let t = idp_limit_scalar(avg[0], uj[0], umid[0], uj1[0], bounds)?;
            let lift = |s: State<1>| State::<D>::from_element(s[0]);
            Ok(LimitedCellTriple {
                left: lift(t.left),
                mid: lift(t.mid),
                right: lift(t.right),
                theta: t.theta,
            })
        }
        DomainKind::Positivity => idp_limit_system(system, avg, uj, umid, uj1, floors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limiters::midpoint_value;
    use crate::systems::Euler;
    use proptest::prelude::*;

    fn unit() -> ScalarBounds {
        ScalarBounds::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn scalar_overshoot_example() {
        let eps = 0.1;
        let avg = 1.0 - 2.0 * eps / 3.0;
        let t = idp_limit_scalar(avg, 1.0, 1.15, 0.0, unit()).unwrap();
        let theta = (1.0 - avg) / (1.15 - avg);
        assert!((t.theta - theta).abs() < 1e-15);
        assert!((t.theta - 0.307_692_307_692_307_7).abs() < 1e-12);
        assert!((t.mid[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_inactive_cases() {
        let t = idp_limit_scalar(0.5, 0.2, 0.7, 0.9, unit()).unwrap();
        assert_eq!(t.theta, 1.0);
        assert_eq!((t.left[0], t.mid[0], t.right[0]), (0.2, 0.7, 0.9));
        let t = idp_limit_scalar(0.5, 0.5, 0.5, 0.5, unit()).unwrap();
        assert_eq!((t.left[0], t.mid[0], t.right[0], t.theta), (0.5, 0.5, 0.5, 1.0));
    }

    #[test]
    fn scalar_average_outside_is_an_invariant_error() {
        assert!(matches!(
            idp_limit_scalar(1.2, 1.0, 1.0, 1.0, unit()),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn density_stage_example() {
        let e = Euler::new(1.4);
        let avg = e.from_primitive(&State::<3>::new(1.0, 0.0, 1.0));
        let mut mid = avg;
        mid[0] = -0.1;
        let floors = Floors::new(1e-13, 1e-13);
        let t = idp_limit_system(&e, &avg, &avg, &mid, &avg, &floors).unwrap();
        let theta_rho: f64 = (1.0 - 1e-13) / 1.1;
        assert!((theta_rho - 0.909_091).abs() < 1e-6);
        // pressure stays positive after the density stage here
        assert!((t.theta - theta_rho).abs() < 1e-15);
        assert!(t.mid[0] >= 1e-13 * (1.0 - 1e-3));
    }

    #[test]
    fn pressure_at_floor_is_not_limited() {
        let e = Euler::new(1.4);
        let floors = Floors::new(1e-13, 0.25);
        let avg = e.from_primitive(&State::<3>::new(1.0, 0.0, 1.0));
        let mid = e.from_primitive(&State::<3>::new(1.0, 0.0, 0.25));
        let t = idp_limit_system(&e, &avg, &avg, &mid, &avg, &floors).unwrap();
        assert_eq!(t.theta, 1.0);
    }

    #[test]
    fn compliant_system_data_is_untouched() {
        let e = Euler::new(1.4);
        let avg = e.from_primitive(&State::<3>::new(1.0, 0.3, 1.0));
        let l = e.from_primitive(&State::<3>::new(0.9, 0.2, 1.1));
        let r = e.from_primitive(&State::<3>::new(1.1, 0.4, 0.9));
        let mid = midpoint_value(&avg, &l, &r);
        let t = idp_limit_system(&e, &avg, &l, &mid, &r, &Floors::new(1e-13, 1e-13)).unwrap();
        assert_eq!(t, LimitedCellTriple::identity(l, mid, r));
    }

    proptest! {
        #[test]
        fn scalar_theta_nonincreasing_in_overshoot(avg in 0.0f64..1.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let (near, far) = (a.min(b), a.max(b));
            let t_near = idp_limit_scalar(avg, 0.5, 1.0 + near, 0.5, unit()).unwrap().theta;
            let t_far = idp_limit_scalar(avg, 0.5, 1.0 + far, 0.5, unit()).unwrap().theta;
            prop_assert!(t_far <= t_near);
            let t_near = idp_limit_scalar(avg, 0.5, -near, 0.5, unit()).unwrap().theta;
            let t_far = idp_limit_scalar(avg, 0.5, -far, 0.5, unit()).unwrap().theta;
            prop_assert!(t_far <= t_near);
        }
    }
}
