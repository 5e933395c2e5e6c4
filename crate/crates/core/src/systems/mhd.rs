use super::{DomainKind, EquationSystem, VelocityIndex};
use crate::error::DomainError;
use crate::transform::{density_to_q, dq_drho, entropy, point_density, pressure_from_entropy, resolvable_internal_energy};
use crate::{JacobianMatrix, State};

/// One-dimensional ideal MHD with constant normal field `B_x`.
///
/// `U = (ρ, ρv_x, ρv_y, ρv_z, B_y, B_z, E)`, primitives
/// `(ρ, v_x, v_y, v_z, B_y, B_z, p)`, point values
/// `W = (q, v_x, v_y, v_z, B_y, B_z, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mhd {
    pub gamma: f64,
    pub bx: f64,
    pub rho_ref: f64,
}

impl Mhd {
    pub fn new(gamma: f64, bx: f64) -> Self {
        Self {
            gamma,
            bx,
            rho_ref: 1.0,
        }
    }

    pub fn with_rho_ref(mut self, rho_ref: f64) -> Self {
        self.rho_ref = rho_ref;
        self
    }

    #[inline]
    fn raw_pressure(&self, u: &State<7>) -> f64 {
        let rho = u[0];
        let kinetic = 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / rho;
        let magnetic = 0.5 * (self.bx * self.bx + u[4] * u[4] + u[5] * u[5]);
        (self.gamma - 1.0) * (u[6] - kinetic - magnetic)
    }

    /// Fast magnetosonic speed.
    pub fn fast_speed(&self, u: &State<7>) -> f64 {
        self.fast_speed_from(u[0], self.raw_pressure(u), u[4], u[5])
    }

    fn fast_speed_from(&self, rho: f64, p: f64, by: f64, bz: f64) -> f64 {
        let b2 = self.bx * self.bx + by * by + bz * bz;
        let gp = self.gamma * p;
        let sum = (gp + b2) / rho;
        let disc = (sum * sum - 4.0 * gp * self.bx * self.bx / (rho * rho)).max(0.0);
        (0.5 * (sum + disc.sqrt())).sqrt()
    }
}

impl EquationSystem<7> for Mhd {
    fn name(&self) -> &'static str {
        "mhd"
    }

    fn conserved_names(&self) -> [&'static str; 7] {
        ["rho", "momentum_x", "momentum_y", "momentum_z", "By", "Bz", "energy"]
    }

    fn primitive_names(&self) -> [&'static str; 7] {
        ["rho", "vx", "vy", "vz", "By", "Bz", "p"]
    }

    fn flux(&self, u: &State<7>) -> State<7> {
        let rho = u[0];
        let (vx, vy, vz) = (u[1] / rho, u[2] / rho, u[3] / rho);
        let (bx, by, bz) = (self.bx, u[4], u[5]);
        let p = self.raw_pressure(u);
        let pt = p + 0.5 * (bx * bx + by * by + bz * bz);
        let vdotb = vx * bx + vy * by + vz * bz;
        State::<7>::from([
            u[1],
            u[1] * vx + pt - bx * bx,
            u[2] * vx - bx * by,
            u[3] * vx - bx * bz,
            by * vx - bx * vy,
            bz * vx - bx * vz,
            (u[6] + pt) * vx - bx * vdotb,
        ])
    }

    fn max_wave_speed(&self, u: &State<7>) -> f64 {
        (u[1] / u[0]).abs() + self.fast_speed(u)
    }

    fn wave_speed_range(&self, u: &State<7>) -> (f64, f64) {
        let vx = u[1] / u[0];
        let cf = self.fast_speed(u);
        (vx - cf, vx + cf)
    }

    fn idp_pair_speed(&self, ul: &State<7>, ur: &State<7>) -> f64 {
        let (rl, rr) = (ul[0], ur[0]);
        let (vl, vr) = (ul[1] / rl, ur[1] / rr);
        let (cl, cr) = (self.fast_speed(ul), self.fast_speed(ur));
        let (sl, sr) = (rl.sqrt(), rr.sqrt());
        let v_roe = (sl * vl + sr * vr) / (sl + sr);
        let jump_b = ((ul[4] - ur[4]).powi(2) + (ul[5] - ur[5]).powi(2)).sqrt();
        (vl.abs() + cl).max(vr.abs() + cr).max(v_roe.abs() + cl.max(cr)) + jump_b / (sl + sr)
    }

    fn domain_kind(&self) -> DomainKind {
        DomainKind::Positivity
    }

    fn pressure(&self, u: &State<7>) -> Option<f64> {
        if !(u[0] > 0.0) {
            return None;
        }
        let p = self.raw_pressure(u);
        p.is_finite().then_some(p)
    }

    fn to_primitive(&self, u: &State<7>) -> State<7> {
        let rho = u[0];
        State::<7>::from([
            rho,
            u[1] / rho,
            u[2] / rho,
            u[3] / rho,
            u[4],
            u[5],
            self.raw_pressure(u),
        ])
    }

    fn from_primitive(&self, v: &State<7>) -> State<7> {
        let rho = v[0];
        let kinetic = 0.5 * rho * (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
        let magnetic = 0.5 * (self.bx * self.bx + v[4] * v[4] + v[5] * v[5]);
        State::<7>::from([
            rho,
            rho * v[1],
            rho * v[2],
            rho * v[3],
            v[4],
            v[5],
            v[6] / (self.gamma - 1.0) + kinetic + magnetic,
        ])
    }

    fn to_transformed(&self, u: &State<7>) -> Result<State<7>, DomainError> {
        let rho = u[0];
        let p = self.pressure(u).unwrap_or(f64::NAN);
        if !(rho > 0.0 && p > 0.0) || u.iter().any(|x| !x.is_finite()) {
            return Err(DomainError::new(format!("mhd rho = {rho}, p = {p}")));
        }
        Ok(State::<7>::from([
            density_to_q(rho, self.rho_ref),
            u[1] / rho,
            u[2] / rho,
            u[3] / rho,
            u[4],
            u[5],
            entropy(rho, p, self.gamma),
        ]))
    }

    fn from_transformed(&self, w: &State<7>) -> State<7> {
        let rho = point_density(w[0], self.rho_ref);
        let p = pressure_from_entropy(rho, w[6], self.gamma);
        let mut u = self.from_primitive(&State::<7>::from([rho, w[1], w[2], w[3], w[4], w[5], 0.0]));
        u[6] += resolvable_internal_energy(p / (self.gamma - 1.0), u[6]);
        u
    }

    /// `T A_V T⁻¹`, with `A_V` the primitive-variable coefficient matrix and
    /// `T = ∂W/∂V`.
    fn jacobian_transformed(&self, _w: &State<7>, u: &State<7>) -> JacobianMatrix<7> {
        let g = self.gamma;
        let rho = u[0];
        let vx = u[1] / rho;
        let (bx, by, bz) = (self.bx, u[4], u[5]);
        let p = self.raw_pressure(u);
        let a = dq_drho(rho, self.rho_ref);

        let mut av = JacobianMatrix::<7>::from_diagonal_element(vx);
        av[(0, 1)] = rho;
        av[(1, 4)] = by / rho;
        av[(1, 5)] = bz / rho;
        av[(1, 6)] = 1.0 / rho;
        av[(2, 4)] = -bx / rho;
        av[(3, 5)] = -bx / rho;
        av[(4, 1)] = by;
        av[(4, 2)] = -bx;
        av[(5, 1)] = bz;
        av[(5, 3)] = -bx;
        av[(6, 1)] = g * p;

        let mut t = JacobianMatrix::<7>::identity();
        t[(0, 0)] = a;
        t[(6, 0)] = -g / rho;
        t[(6, 6)] = 1.0 / p;
        let mut t_inv = JacobianMatrix::<7>::identity();
        t_inv[(0, 0)] = 1.0 / a;
        t_inv[(6, 0)] = g * p / (rho * a);
        t_inv[(6, 6)] = p;

        t * av * t_inv
    }

    fn normal_velocity(&self) -> Option<VelocityIndex> {
        Some(VelocityIndex {
            conserved: 1,
            transformed: 1,
        })
    }
}
