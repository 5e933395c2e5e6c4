//! Monotonicity-preserving interval clipping of interface values.
//!
//! A trace at node `x_j` taken from the cell on its left is clipped against
//! bounds built from the averages `ū_{j−5/2} … ū_{j+3/2}`; the trace from the
//! cell on its right uses the mirrored stencil.

use serde::{Deserialize, Serialize};

use super::{median3, minmod4};

/// How the median/curvature clause of the bounds is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpStencil {
    /// `u^MD = (ū_{j−1/2} + ū_{j+1/2})/2 − d^M4_j/2`, compared with the two
    /// cells adjacent to the node.
    #[default]
    Standard,
    /// `u^MD = (ū_{j−1/2} + ū_{j+1/2} + d^M4_j)/2`, compared with the two
    /// upwind cells.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpParams {
    pub alpha: f64,
    pub beta: f64,
    pub stencil: MpStencil,
}

impl Default for MpParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 4.0,
            stencil: MpStencil::Standard,
        }
    }
}

/// `(u^min, u^max)` for a trace whose upwind direction runs from `s[0]` to
/// `s[2]`, with `s[3]` the average on the other side of the node.
pub fn mp_bounds(s: [f64; 5], params: &MpParams) -> (f64, f64) {
    let d1 = s[0] - 2.0 * s[1] + s[2];
    let d2 = s[1] - 2.0 * s[2] + s[3];
    let d3 = s[2] - 2.0 * s[3] + s[4];
    let dm4_node = minmod4(4.0 * d2 - d3, 4.0 * d3 - d2, d2, d3);
    let dm4_prev = minmod4(4.0 * d1 - d2, 4.0 * d2 - d1, d1, d2);

    let (md, other) = match params.stencil {
        MpStencil::Standard => (0.5 * (s[2] + s[3]) - 0.5 * dm4_node, s[3]),
        MpStencil::Literal => (0.5 * (s[2] + s[3] + dm4_node), s[1]),
    };
    let ul = s[2] + params.alpha * (s[2] - s[1]);
    let lc = s[2] + 0.5 * (s[2] - s[1]) + params.beta / 3.0 * dm4_prev;

    let lo = s[2].min(other).min(md).max(s[2].min(ul).min(lc));
    let hi = s[2].max(other).max(md).min(s[2].max(ul).max(lc));
    (lo, hi)
}

/// Trace at a node taken from the cell on its left, given
/// `[ū_{j−5/2}, ū_{j−3/2}, ū_{j−1/2}, ū_{j+1/2}, ū_{j+3/2}]`.
pub fn mp_limit_left(u: f64, averages: [f64; 5], params: &MpParams) -> f64 {
    let (lo, hi) = mp_bounds(averages, params);
    median3(u, lo, hi)
}

/// Trace at a node taken from the cell on its right, given
/// `[ū_{j−3/2}, ū_{j−1/2}, ū_{j+1/2}, ū_{j+3/2}, ū_{j+5/2}]`.
pub fn mp_limit_right(u: f64, averages: [f64; 5], params: &MpParams) -> f64 {
    let [a, b, c, d, e] = averages;
    let (lo, hi) = mp_bounds([e, d, c, b, a], params);
    median3(u, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn both() -> [MpParams; 2] {
        [
            MpParams::default(),
            MpParams {
                stencil: MpStencil::Literal,
                ..MpParams::default()
            },
        ]
    }

    #[test]
    fn linear_data_passes_through() {
        // averages of u = x on unit cells centered at -2..2; the node between
        // the cells at 0 and 1 carries 0.5, the one between -1 and 0 carries -0.5
        let avg = [-2.0, -1.0, 0.0, 1.0, 2.0];
        for p in both() {
            assert_eq!(mp_limit_left(0.5, avg, &p), 0.5);
            assert_eq!(mp_limit_right(-0.5, avg, &p), -0.5);
        }
    }

    #[test]
    fn constant_data_is_identity() {
        for p in both() {
            assert_eq!(mp_limit_left(0.3, [0.3; 5], &p), 0.3);
        }
    }

    #[test]
    fn overshoot_clipped_to_upper_bound() {
        // flat data: all curvatures zero, the bounds collapse onto the average
        let avg = [1.0; 5];
        for p in both() {
            let (lo, hi) = mp_bounds(avg, &p);
            assert_eq!((lo, hi), (1.0, 1.0));
            assert_eq!(mp_limit_left(3.0, avg, &p), hi);
        }
        // a step with zero curvature upwind: ū = 0, 0, 0 | 1, 1
        let avg = [0.0, 0.0, 0.0, 1.0, 1.0];
        let p = MpParams::default();
        let (_, hi) = mp_bounds(avg, &p);
        assert_eq!(hi, 0.0);
        assert_eq!(mp_limit_left(0.7, avg, &p), 0.0);
    }

    proptest! {
        #[test]
        fn output_inside_bounds(u in -5.0f64..5.0, avg in proptest::array::uniform5(-3.0f64..3.0)) {
            for p in both() {
                let (lo, hi) = mp_bounds(avg, &p);
                let v = mp_limit_left(u, avg, &p);
                if lo <= hi {
                    prop_assert!(v >= lo && v <= hi);
                    if u >= lo && u <= hi {
                        prop_assert_eq!(v, u);
                    }
                }
            }
        }

        #[test]
        fn right_is_mirror_of_left(u in -5.0f64..5.0, avg in proptest::array::uniform5(-3.0f64..3.0)) {
            let p = MpParams::default();
            let [a, b, c, d, e] = avg;
            prop_assert_eq!(mp_limit_right(u, avg, &p), mp_limit_left(u, [e, d, c, b, a], &p));
            // reflecting the data about zero reflects the result
            prop_assert_eq!(mp_limit_left(-u, avg.map(|x| -x), &p), -mp_limit_left(u, avg, &p));
        }
    }
}
