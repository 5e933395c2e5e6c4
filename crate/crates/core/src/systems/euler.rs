use super::{DomainKind, EquationSystem, VelocityIndex};
use crate::error::DomainError;
use crate::transform::{density_to_q, dq_drho, entropy, point_density, pressure_from_entropy, resolvable_internal_energy};
use crate::{JacobianMatrix, State};

/// Compressible Euler equations for an ideal gas, `U = (ρ, ρv, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    pub gamma: f64,
    /// Reference density of the Softplus density variable.
    pub rho_ref: f64,
}

impl Euler {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            rho_ref: 1.0,
        }
    }

    pub fn with_rho_ref(mut self, rho_ref: f64) -> Self {
        self.rho_ref = rho_ref;
        self
    }

    #[inline]
    fn raw_pressure(&self, u: &State<3>) -> f64 {
        (self.gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
    }

    #[inline]
    fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

impl EquationSystem<3> for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }

    fn conserved_names(&self) -> [&'static str; 3] {
        ["rho", "momentum", "energy"]
    }

    fn primitive_names(&self) -> [&'static str; 3] {
        ["rho", "v", "p"]
    }

    fn flux(&self, u: &State<3>) -> State<3> {
        let v = u[1] / u[0];
        let p = self.raw_pressure(u);
        State::<3>::new(u[1], u[1] * v + p, v * (u[2] + p))
    }

    fn max_wave_speed(&self, u: &State<3>) -> f64 {
        let v = u[1] / u[0];
        v.abs() + self.sound_speed(u[0], self.raw_pressure(u))
    }

    fn wave_speed_range(&self, u: &State<3>) -> (f64, f64) {
        let v = u[1] / u[0];
        let c = self.sound_speed(u[0], self.raw_pressure(u));
        (v - c, v + c)
    }

    fn idp_pair_speed(&self, ul: &State<3>, ur: &State<3>) -> f64 {
        self.max_wave_speed(ul).max(self.max_wave_speed(ur))
    }

    fn domain_kind(&self) -> DomainKind {
        DomainKind::Positivity
    }

    fn pressure(&self, u: &State<3>) -> Option<f64> {
        if !(u[0] > 0.0) {
            return None;
        }
        let p = self.raw_pressure(u);
        p.is_finite().then_some(p)
    }

    fn to_primitive(&self, u: &State<3>) -> State<3> {
        State::<3>::new(u[0], u[1] / u[0], self.raw_pressure(u))
    }

    fn from_primitive(&self, v: &State<3>) -> State<3> {
        let (rho, vel, p) = (v[0], v[1], v[2]);
        State::<3>::new(rho, rho * vel, p / (self.gamma - 1.0) + 0.5 * rho * vel * vel)
    }

    fn to_transformed(&self, u: &State<3>) -> Result<State<3>, DomainError> {
        let rho = u[0];
        let p = self.pressure(u).unwrap_or(f64::NAN);
        if !(rho > 0.0 && p > 0.0) || u.iter().any(|x| !x.is_finite()) {
            return Err(DomainError::new(format!("euler rho = {rho}, p = {p}")));
        }
        Ok(State::<3>::new(
            density_to_q(rho, self.rho_ref),
            u[1] / rho,
            entropy(rho, p, self.gamma),
        ))
    }

    fn from_transformed(&self, w: &State<3>) -> State<3> {
        let rho = point_density(w[0], self.rho_ref);
        let p = pressure_from_entropy(rho, w[2], self.gamma);
        let kinetic = 0.5 * rho * w[1] * w[1];
        let internal = resolvable_internal_energy(p / (self.gamma - 1.0), kinetic);
        State::<3>::new(rho, rho * w[1], internal + kinetic)
    }

    fn jacobian_transformed(&self, _w: &State<3>, u: &State<3>) -> JacobianMatrix<3> {
        let rho = u[0];
        let v = u[1] / rho;
        let p = self.raw_pressure(u);
        let a = dq_drho(rho, self.rho_ref);
        JacobianMatrix::<3>::new(
            v,
            a * rho,
            0.0,
            self.gamma * p / (rho * rho * a),
            v,
            p / rho,
            0.0,
            0.0,
            v,
        )
    }

    fn normal_velocity(&self) -> Option<VelocityIndex> {
        Some(VelocityIndex {
            conserved: 1,
            transformed: 1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::testing::{flux_jacobian_fd, sorted_eigenvalues};
    use crate::systems::Floors;
    use proptest::prelude::*;

    fn prim(r: f64, v: f64, p: f64) -> State<3> {
        State::<3>::new(r, v, p)
    }

    #[test]
    fn flux_of_quiescent_unit_state() {
        let e = Euler::new(1.4);
        let u = e.from_primitive(&prim(1.0, 0.0, 1.0));
        assert!((u - State::<3>::new(1.0, 0.0, 2.5)).norm() < 1e-15);
        assert!((e.flux(&u) - State::<3>::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pressure_examples() {
        let e = Euler::new(1.4);
        assert!((e.pressure(&State::<3>::new(1.0, 0.0, 2.5)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(e.pressure(&State::<3>::new(1.0, 1.0, 0.5)).unwrap(), 0.0);
        assert!(e.pressure(&State::<3>::new(0.0, 1.0, 0.5)).is_none());
        assert!(e.try_flux(&State::<3>::new(1.0, 1.0, 0.5)).is_err());
    }

    #[test]
    fn speeds() {
        let e = Euler::new(1.4);
        let u = e.from_primitive(&prim(1.0, 0.0, 1.0));
        assert!((e.max_wave_speed(&u) - 1.4f64.sqrt()).abs() < 1e-15);
        assert!((e.idp_pair_speed(&u, &u) - 1.4f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn domain_examples() {
        let e = Euler::new(1.4);
        assert!(!e.in_domain(&e.from_primitive(&prim(1.0, 0.0, -0.1)), &Floors::zero()));
        // Sedov background: E = 1e-12 at rest
        let bg = State::<3>::new(1.0, 0.0, 1e-12);
        assert!(e.in_domain(&bg, &Floors::new(1e-13, 1e-13)));
        assert!(!e.in_domain(&bg, &Floors::new(1e-13, 0.4e-12)));
    }

    #[test]
    fn transformed_of_unit_state() {
        let e = Euler::new(1.4);
        let w = e.to_transformed(&e.from_primitive(&prim(1.0, 0.0, 1.0))).unwrap();
        assert_eq!(w[2], 0.0);
        assert!((w[0] - 0.541_324_854_612_918_1).abs() < 1e-15);
    }

    #[test]
    fn printed_jacobian_structure_at_rest() {
        let e = Euler::new(1.4);
        let u = e.from_primitive(&prim(1.3, 0.0, 0.7));
        let w = e.to_transformed(&u).unwrap();
        let j = e.jacobian_transformed(&w, &u);
        for k in 0..3 {
            assert_eq!(j[(k, k)], 0.0);
        }
        assert!(j[(0, 1)] != 0.0 && j[(1, 0)] != 0.0 && j[(1, 2)] != 0.0);
        assert_eq!(j[(0, 2)], 0.0);
        assert_eq!(j[(2, 0)], 0.0);
        assert_eq!(j[(2, 1)], 0.0);
    }

    #[test]
    fn jacobian_matches_printed_exponential_form() {
        let e = Euler::new(1.4).with_rho_ref(2.0);
        let u = e.from_primitive(&prim(0.8, -0.3, 2.0));
        let w = e.to_transformed(&u).unwrap();
        let (rho, p, q) = (0.8, 2.0, w[0]);
        let ex = (rho / 2.0 - q).exp();
        let j = e.jacobian_transformed(&w, &u);
        assert!((j[(0, 1)] - ex * rho / 2.0).abs() < 1e-13);
        assert!((j[(1, 0)] - 1.4 * 2.0 * p / (ex * rho * rho)).abs() < 1e-12);
    }

    fn state_strategy() -> impl Strategy<Value = State<3>> {
        (-6.0f64..3.0, -100.0f64..100.0, -8.0f64..6.0)
            .prop_map(|(lr, v, lp)| Euler::new(1.4).from_primitive(&prim(10f64.powf(lr), v, 10f64.powf(lp))))
    }

    proptest! {
        #[test]
        fn jacobian_eigenvalues_are_characteristic_speeds(u in state_strategy()) {
            let e = Euler::new(1.4);
            let w = e.to_transformed(&u).unwrap();
            let ev = sorted_eigenvalues(&e.jacobian_transformed(&w, &u));
            let v = u[1] / u[0];
            let c = e.sound_speed(u[0], e.pressure(&u).unwrap());
            let scale = v.abs() + c;
            for (got, want) in ev.iter().zip([v - c, v, v + c]) {
                prop_assert!((got - want).abs() <= 1e-8 * scale, "{:?} vs {:?}", ev, (v - c, v, v + c));
            }
        }

        #[test]
        fn similar_to_conservative_jacobian(lr in -1.0f64..1.0, v in -3.0f64..3.0, lp in -1.0f64..1.0) {
            let e = Euler::new(1.4);
            let u = e.from_primitive(&prim(10f64.powf(lr), v, 10f64.powf(lp)));
            let w = e.to_transformed(&u).unwrap();
            let a = sorted_eigenvalues(&e.jacobian_transformed(&w, &u));
            let b = sorted_eigenvalues(&flux_jacobian_fd(&e, &u));
            let scale = e.max_wave_speed(&u);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-5 * scale);
            }
        }

        #[test]
        fn primitive_round_trip(lr in -6.0f64..3.0, v in -100.0f64..100.0, lp in -8.0f64..6.0) {
            let e = Euler::new(1.4);
            let (r, p) = (10f64.powf(lr), 10f64.powf(lp));
            let back = e.to_primitive(&e.from_primitive(&prim(r, v, p)));
            prop_assert!(((back[0] - r) / r).abs() < 1e-15);
            // E - ½ρv² cancels when the kinetic energy dwarfs p/(γ-1)
            let kinetic = 0.5 * r * v * v;
            prop_assert!((back[2] - p).abs() <= 1e-13 * p + 4.0 * f64::EPSILON * kinetic);
        }
    }
}
