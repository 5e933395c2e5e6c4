//! Per-cell modification of the point values that enter the cell-average
//! fluxes.
//!
//! Every limiter returns a [`LimitedCellTriple`] that keeps the cell average
//! decomposition `Ū = (Û_j^R + 4 Û_{j+1/2} + Û_{j+1}^L) / 6`. The oscillation
//! controls ([`oe`], [`mp`]) run first and the scaling limiter ([`idp`]) last.

pub mod idp;
pub mod mp;
pub mod oe;

use serde::{Deserialize, Serialize};

pub use idp::{idp_limit, idp_limit_scalar, idp_limit_system};
pub use mp::{mp_limit_left, mp_limit_right, MpParams, MpStencil};
pub use oe::{oe_apply, oe_sigma, oe_theta, OeInputs};

use crate::State;

/// Limited values of one cell: the trace at its left node, the midpoint and
/// the trace at its right node, plus the blend factor that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitedCellTriple<const D: usize> {
    pub left: State<D>,
    pub mid: State<D>,
    pub right: State<D>,
    pub theta: f64,
}

impl<const D: usize> LimitedCellTriple<D> {
    /// Unmodified triple.
    pub fn identity(left: State<D>, mid: State<D>, right: State<D>) -> Self {
        Self {
            left,
            mid,
            right,
            theta: 1.0,
        }
    }

    /// `(left + 4 mid + right) / 6`.
    pub fn decomposed_average(&self) -> State<D> {
        (self.left + self.mid * 4.0 + self.right) / 6.0
    }
}

/// `U_{j+1/2} = 3/2 Ū − (U_j + U_{j+1}) / 4`.
#[inline]
pub fn midpoint_value<const D: usize>(avg: &State<D>, left: &State<D>, right: &State<D>) -> State<D> {
    avg * 1.5 - (left + right) * 0.25
}

/// Oscillation control applied before the scaling limiter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OscillationControl {
    #[default]
    None,
    Oe,
    Mp(MpParams),
}

/// `sign · min |x|` if all four arguments share a sign, else zero.
pub fn minmod4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0 {
        a.min(b).min(c).min(d)
    } else if a < 0.0 && b < 0.0 && c < 0.0 && d < 0.0 {
        a.max(b).max(c).max(d)
    } else {
        0.0
    }
}

/// Middle value of three.
pub fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}
