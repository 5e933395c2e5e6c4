//! Oscillation-eliminating damping of the endpoint traces.
//!
//! The damping strength `σ` compares the cell's parabola with the parabolas
//! of its two neighbors extended onto the cell; `θ = exp(−β Δt σ / Δx)`
//! blends the endpoints toward the cell average.

use super::{midpoint_value, LimitedCellTriple};
use crate::systems::EquationSystem;
use crate::State;

/// Endpoint traces and average of one cell: `[U_j, Ū_{j+1/2}, U_{j+1}]`.
pub type CellData<const D: usize> = [State<D>; 3];

/// A cell and its two neighbors with their sizes.
#[derive(Debug, Clone, Copy)]
pub struct OeInputs<const D: usize> {
    pub left: CellData<D>,
    pub cell: CellData<D>,
    pub right: CellData<D>,
    pub sizes: [f64; 3],
}

/// The PAMPA parabola of one cell in the local coordinate
/// `ξ = (x − x_center)/h ∈ [−1/2, 1/2]`:
/// `p(ξ) = c + (b − a) ξ + 2 (a − 2c + b) ξ²` with `c` the midpoint value.
#[derive(Debug, Clone, Copy)]
struct Parabola<const D: usize> {
    c0: State<D>,
    c1: State<D>,
    c2: State<D>,
    h: f64,
}

impl<const D: usize> Parabola<D> {
    /// Parabola of `data − shift`; shifting by the cell average keeps flat
    /// data exactly zero.
    fn new(data: &CellData<D>, h: f64, shift: &State<D>) -> Self {
        let [a, avg, b] = data.map(|u| u - shift);
        let c = midpoint_value(&avg, &a, &b);
        Self {
            c0: c,
            c1: b - a,
            c2: (a - c * 2.0 + b) * 2.0,
            h,
        }
    }

    fn at(&self, xi: f64) -> State<D> {
        self.c0 + self.c1 * xi + self.c2 * (xi * xi)
    }

    /// `d²p/dx²`.
    fn second_derivative(&self) -> State<D> {
        self.c2 * (2.0 / (self.h * self.h))
    }
}

const GAUSS3: [(f64, f64); 3] = [
    (0.0, 8.0 / 18.0),
    (-0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.387_298_334_620_741_7, 5.0 / 18.0),
];

/// `(η, d)` for one neighbor parabola `q` whose own center sits at
/// `offset` (in units of the cell size `h`) from the cell center. Both
/// parabolas are shifted by the cell average.
fn eta_and_d<const D: usize>(p: &Parabola<D>, q: &Parabola<D>, offset: f64) -> (f64, f64) {
    let h = p.h;
    let mut eta = 0.0;
    let mut d = 0.0;
    for &(xi, w) in GAUSS3.iter() {
        let pv = p.at(xi);
        let qv = q.at((xi - offset) * h / q.h);
        eta += w * (pv - qv).norm_squared();
        d += w * (qv.norm_squared() + pv.norm_squared());
    }
    let h5 = h.powi(5) / 3.0;
    let p2 = p.second_derivative();
    let q2 = q.second_derivative();
    (
        h * eta + h5 * (p2 - q2).norm_squared(),
        h * d + h5 * q2.norm_squared(),
    )
}

/// Smallest and largest characteristic speeds over the three averages,
/// clipped so that `S_L ≤ 0 ≤ S_R`.
pub fn oe_speeds<S: EquationSystem<D>, const D: usize>(system: &S, input: &OeInputs<D>) -> (f64, f64) {
    let mut sl = 0.0f64;
    let mut sr = 0.0f64;
    for c in [&input.left, &input.cell, &input.right] {
        let (lo, hi) = system.wave_speed_range(&c[1]);
        sl = sl.min(lo);
        sr = sr.max(hi);
    }
    (sl, sr)
}

/// Local wave-speed estimate `β`: the largest pointwise speed of the three
/// averages.
pub fn oe_beta<S: EquationSystem<D>, const D: usize>(system: &S, input: &OeInputs<D>) -> f64 {
    [&input.left, &input.cell, &input.right]
        .iter()
        .map(|c| system.max_wave_speed(&c[1]))
        .fold(0.0, f64::max)
}

/// Damping strength `σ ≥ 0`; zero when the weighted denominator vanishes.
pub fn oe_sigma<S: EquationSystem<D>, const D: usize>(system: &S, input: &OeInputs<D>) -> f64 {
    let [hl, h, hr] = input.sizes;
    let avg = &input.cell[1];
    let p = Parabola::new(&input.cell, h, avg);
    let pl = Parabola::new(&input.left, hl, avg);
    let pr = Parabola::new(&input.right, hr, avg);
    let (eta_l, d_l) = eta_and_d(&p, &pl, -0.5 * (hl + h) / h);
    let (eta_r, d_r) = eta_and_d(&p, &pr, 0.5 * (h + hr) / h);

    let (sl, sr) = oe_speeds(system, input);
    let span = sr - sl;
    if span == 0.0 {
        return 0.0;
    }
    let (wl, wr) = (sr / span, -sl / span);
    let den = wl * d_l + wr * d_r;
    if den == 0.0 {
        return 0.0;
    }
    (wl * eta_l + wr * eta_r) / den
}

/// `θ = exp(−β Δt σ / Δx)`.
pub fn oe_theta(beta: f64, dt: f64, dx: f64, sigma: f64) -> f64 {
    (-beta * dt / dx * sigma).exp()
}

/// Blend both endpoints toward the average and recompute the midpoint so the
/// average decomposition still holds.
pub fn oe_apply<const D: usize>(theta: f64, avg: &State<D>, uj: &State<D>, uj1: &State<D>) -> LimitedCellTriple<D> {
    if theta == 1.0 {
        return LimitedCellTriple::identity(*uj, midpoint_value(avg, uj, uj1), *uj1);
    }
    // the blended midpoint equals the midpoint of the blended endpoints
    let blend = |u: &State<D>| avg * (1.0 - theta) + u * theta;
    LimitedCellTriple {
        left: blend(uj),
        mid: blend(&midpoint_value(avg, uj, uj1)),
        right: blend(uj1),
        theta,
    }
}
