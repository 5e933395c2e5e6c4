//! Variable maps for the point values.
//!
//! Euler and MHD point values carry `q = ln(e^{ρ/ρ_ref} − 1)` in place of the
//! density and the specific entropy `s = ln p − γ ln ρ` in place of the
//! pressure. The inverse `ρ = ρ_ref ln(1 + e^q)`, `p = ρ^γ e^s` is positive for
//! every finite `(q, s)`, so any finite point value is admissible.
//!
//! Scalar point values use the clipped-ReLU map onto `[U_min, U_max]`.

use crate::error::DomainError;
use crate::systems::ScalarBounds;

/// Past this argument `e^x` is within `1e-13` of `e^x ± 1` and the stable
/// asymptotic forms take over.
const SOFTPLUS_SWITCH: f64 = 30.0;

/// `q = ln(e^{ρ/ρ_ref} − 1)`, the inverse Softplus of `ρ/ρ_ref`.
pub fn density_to_q(rho: f64, rho_ref: f64) -> f64 {
    let r = rho / rho_ref;
    if r > SOFTPLUS_SWITCH {
        r + (-(-r).exp()).ln_1p()
    } else {
        r.exp_m1().ln()
    }
}

/// `ρ = ρ_ref ln(1 + e^q)`.
pub fn q_to_density(q: f64, rho_ref: f64) -> f64 {
    if q > SOFTPLUS_SWITCH {
        rho_ref * (q + (-q).exp().ln_1p())
    } else {
        rho_ref * q.exp().ln_1p()
    }
}

/// `dq/dρ = e^{ρ/ρ_ref − q} / ρ_ref = 1 / (ρ_ref (1 − e^{−ρ/ρ_ref}))`.
pub fn dq_drho(rho: f64, rho_ref: f64) -> f64 {
    let r = rho / rho_ref;
    1.0 / (rho_ref * -(-r).exp_m1())
}

/// Smallest internal energy, relative to the kinetic plus magnetic energy,
/// that survives the cancellation in `E − kinetic − magnetic`.
const ENERGY_RESOLUTION: f64 = 64.0 * f64::EPSILON;

/// Density of a point value, kept positive when Softplus underflows.
pub fn point_density(q: f64, rho_ref: f64) -> f64 {
    q_to_density(q, rho_ref).max(f64::MIN_POSITIVE)
}

/// Internal energy `ρe` to store for a point value whose other energies sum
/// to `rest`. Pressures below the rounding resolution of the total energy
/// are raised to it, so the pressure recomputed from the conservative
/// variables is strictly positive.
pub fn resolvable_internal_energy(internal: f64, rest: f64) -> f64 {
    internal.max(ENERGY_RESOLUTION * rest).max(f64::MIN_POSITIVE)
}

/// `s = ln p − γ ln ρ`.
pub fn entropy(rho: f64, p: f64, gamma: f64) -> f64 {
    p.ln() - gamma * rho.ln()
}

/// `p = exp(γ ln ρ + s)`.
pub fn pressure_from_entropy(rho: f64, s: f64, gamma: f64) -> f64 {
    (gamma * rho.ln() + s).exp()
}

/// Scalar point-value map. With `clipped` set this is the clipped-ReLU pair
/// `w = (u − U_min)/(U_max − U_min)`, `u = (U_max − U_min) min(max(w, 0), 1) + U_min`.
/// Without it the map is the plain affine rescaling in both directions, used
/// only by runs that switch the bound-preserving machinery off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMap {
    pub bounds: ScalarBounds,
    pub clipped: bool,
}

impl ScalarMap {
    pub fn clipped(bounds: ScalarBounds) -> Self {
        Self {
            bounds,
            clipped: true,
        }
    }

    pub fn affine(bounds: ScalarBounds) -> Self {
        Self {
            bounds,
            clipped: false,
        }
    }

    pub fn forward(&self, u: f64) -> Result<f64, DomainError> {
        let ScalarBounds { min, max } = self.bounds;
        if self.clipped {
            if !(u >= min && u <= max) {
                return Err(DomainError::new(format!("u = {u} outside [{min}, {max}]")));
            }
            if u == max {
                return Ok(1.0);
            }
            if u == min {
                return Ok(0.0);
            }
        }
        Ok((u - min) / (max - min))
    }

    pub fn inverse(&self, w: f64) -> f64 {
        let ScalarBounds { min, max } = self.bounds;
        if !self.clipped {
            return (max - min) * w + min;
        }
        if w >= 1.0 {
            max
        } else if w > 0.0 {
            ((max - min) * w + min).clamp(min, max)
        } else if w.is_nan() {
            f64::NAN
        } else {
            min
        }
    }
}
