//! The PAMPA spatial operator.
//!
//! One evaluation of [`PampaScheme::residual`] runs, for every cell, the
//! oscillation control (if any) and the scaling limiter on the triple
//! `(U_j, U_{j+1/2}, U_{j+1})`, then
//!
//! * updates cell averages with local Lax–Friedrichs fluxes between the two
//!   one-sided limited traces at each node, and
//! * updates point values in `W` variables with the upwind-split stencil
//!   `dW_j/dt = −(J⁻ δ⁻W / (Δx_{j+1/2}/2) + J⁺ δ⁺W / (Δx_{j−1/2}/2))`, which
//!   reads the original node values and the limited midpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limiters::{
    idp_limit, midpoint_value, mp_limit_left, mp_limit_right, oe::oe_beta, oe_apply, oe_sigma, oe_theta,
    LimitedCellTriple, OeInputs, OscillationControl,
};
use crate::mesh::{BoundaryCondition, GhostExtended, Grid1D, GHOST_WIDTH};
use crate::systems::{EquationSystem, Floors};
use crate::{JacobianMatrix, State};

/// Largest CFL number for which the cell-average update is provably
/// invariant-domain preserving.
pub const MAX_IDP_CFL: f64 = 1.0 / 6.0;

/// Below this many items loops run sequentially.
const PAR_MIN: usize = 1024;

pub(crate) fn try_map_range<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if n >= PAR_MIN {
        (0..n).into_par_iter().with_min_len(256).map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Cell averages (conservative) and node values (transformed). `points` has
/// `N + 1` entries; on periodic grids the last one duplicates the first.
#[derive(Debug, Clone, PartialEq)]
pub struct DofField<const D: usize> {
    pub averages: Vec<State<D>>,
    pub points: Vec<State<D>>,
}

impl<const D: usize> DofField<D> {
    /// `self + c · rhs`, entrywise.
    pub fn axpy(&self, c: f64, rhs: &DofField<D>) -> DofField<D> {
        DofField {
            averages: self.averages.iter().zip(&rhs.averages).map(|(a, b)| a + b * c).collect(),
            points: self.points.iter().zip(&rhs.points).map(|(a, b)| a + b * c).collect(),
        }
    }

    /// `a · self + b · other`, entrywise.
    pub fn combine(&self, a: f64, other: &DofField<D>, b: f64) -> DofField<D> {
        DofField {
            averages: self.averages.iter().zip(&other.averages).map(|(x, y)| x * a + y * b).collect(),
            points: self.points.iter().zip(&other.points).map(|(x, y)| x * a + y * b).collect(),
        }
    }

    pub fn zeros_like(&self) -> DofField<D> {
        DofField {
            averages: vec![State::<D>::zeros(); self.averages.len()],
            points: vec![State::<D>::zeros(); self.points.len()],
        }
    }
}

/// Time derivatives of a [`DofField`].
pub type StageResidual<const D: usize> = DofField<D>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeOptions {
    /// Scaling limiter on the midpoints. Without it the scheme is plain
    /// PAMPA: the traces stay continuous and every interface flux reduces to
    /// `F(U_j)`.
    pub idp: bool,
    pub oscillation: OscillationControl,
    /// Upper bound of the positivity floors `ε_ρ`, `ε_p`.
    pub floor_cap: f64,
    /// Cap `α_j` at the largest wave speed of the stage's cell averages and
    /// point values. A midpoint limited onto the density floor can have an
    /// arbitrarily large wave speed (MHD: `|B|/√ε_ρ`), which would make the
    /// explicit point update unstable at any CFL-based time step.
    pub cap_alpha: bool,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            idp: true,
            oscillation: OscillationControl::None,
            floor_cap: Floors::DEFAULT_CAP,
            cap_alpha: true,
        }
    }
}

/// Limiter activity and the limited data of one residual evaluation.
#[derive(Debug, Clone)]
pub struct StageReport<const D: usize> {
    /// Limited triples of the interior cells.
    pub triples: Vec<LimitedCellTriple<D>>,
    pub floors: Floors,
    pub idp_active: usize,
    pub oe_active: usize,
    pub mp_active: usize,
    /// Scalar node values whose transformed variable left `[0, 1]`.
    pub clipped_points: usize,
}

/// Local Lax–Friedrichs flux with the pair speed of the system. Returns
/// `F(U)` exactly for `U_L == U_R`.
pub fn llf_flux<S: EquationSystem<D>, const D: usize>(system: &S, ul: &State<D>, ur: &State<D>) -> State<D> {
    if ul == ur {
        return system.flux(ul);
    }
    let lambda = system.idp_pair_speed(ul, ur);
    (system.flux(ul) + system.flux(ur)) * 0.5 - (ur - ul) * (0.5 * lambda)
}

/// `α_j`: the largest pointwise wave speed of the node state and the two
/// adjacent limited midpoints.
pub fn spectral_radius_alpha<S: EquationSystem<D>, const D: usize>(
    system: &S,
    uj: &State<D>,
    mid_left: &State<D>,
    mid_right: &State<D>,
) -> f64 {
    system
        .max_wave_speed(uj)
        .max(system.max_wave_speed(mid_left))
        .max(system.max_wave_speed(mid_right))
}

/// Point-value time derivative at one node.
#[allow(clippy::too_many_arguments)]
pub fn point_update<const D: usize>(
    jac: &JacobianMatrix<D>,
    alpha: f64,
    w_left: &State<D>,
    w: &State<D>,
    w_right: &State<D>,
    mid_left: &State<D>,
    mid_right: &State<D>,
    h_left: f64,
    h_right: f64,
) -> State<D> {
    let delta_minus = w * -1.5 + mid_right * 2.0 - w_right * 0.5;
    let delta_plus = w_left * 0.5 - mid_left * 2.0 + w * 1.5;
    let j_minus = (jac - JacobianMatrix::<D>::identity() * alpha) * 0.5;
    let j_plus = (jac + JacobianMatrix::<D>::identity() * alpha) * 0.5;
    -(j_minus * delta_minus / (0.5 * h_right) + j_plus * delta_plus / (0.5 * h_left))
}

#[derive(Debug, Clone)]
pub struct PampaScheme<S, const D: usize> {
    pub system: S,
    pub grid: Grid1D,
    pub bc: BoundaryCondition,
    pub options: SchemeOptions,
}

impl<S: EquationSystem<D>, const D: usize> PampaScheme<S, D> {
    pub fn new(system: S, grid: Grid1D, bc: BoundaryCondition, options: SchemeOptions) -> Result<Self> {
        if bc == BoundaryCondition::Reflective && system.normal_velocity().is_none() {
            return Err(Error::config(format!(
                "reflective boundaries need a velocity component; {} has none",
                system.name()
            )));
        }
        if !(options.floor_cap > 0.0) {
            return Err(Error::config("floor cap must be positive"));
        }
        Ok(Self {
            system,
            grid,
            bc,
            options,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.grid.num_cells()
    }

    /// Field from cell averages and conservative node values.
    pub fn field_from_conserved(&self, averages: Vec<State<D>>, nodes: &[State<D>]) -> Result<DofField<D>> {
        let n = self.num_cells();
        if averages.len() != n || nodes.len() != n + 1 {
            return Err(Error::Grid(format!(
                "expected {n} averages and {} nodes, got {} and {}",
                n + 1,
                averages.len(),
                nodes.len()
            )));
        }
        let points = nodes
            .iter()
            .map(|u| self.system.to_transformed(u).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let mut field = DofField { averages, points };
        self.sync_boundary(&mut field);
        Ok(field)
    }

    /// Node values in conservative variables.
    pub fn conserved_points(&self, field: &DofField<D>) -> Vec<State<D>> {
        field.points.iter().map(|w| self.system.from_transformed(w)).collect()
    }

    /// Restore the boundary identities after an update: the duplicated
    /// periodic node and zero normal velocity on reflective walls.
    pub fn sync_boundary(&self, field: &mut DofField<D>) {
        let n = self.num_cells();
        match self.bc {
            BoundaryCondition::Periodic => field.points[n] = field.points[0],
            BoundaryCondition::Reflective => {
                if let Some(v) = self.system.normal_velocity() {
                    field.points[0][v.transformed] = 0.0;
                    field.points[n][v.transformed] = 0.0;
                }
            }
            BoundaryCondition::Outflow => {}
        }
    }

    /// `Δt = cfl · min_c Δx_c / λ_c`, `λ_c` the largest pointwise speed of the
    /// cell average and its two node states. Infinite when nothing moves.
    pub fn compute_dt(&self, field: &DofField<D>, cfl: f64) -> Result<f64> {
        if !(cfl > 0.0 && cfl <= MAX_IDP_CFL) {
            return Err(Error::config(format!("cfl must lie in (0, 1/6], got {cfl}")));
        }
        let sys = &self.system;
        let nodes = self.conserved_points(field);
        let h = self.grid.cell_sizes();
        let mut dt = f64::INFINITY;
        for (c, avg) in field.averages.iter().enumerate() {
            let lambda = sys
                .max_wave_speed(avg)
                .max(sys.max_wave_speed(&nodes[c]))
                .max(sys.max_wave_speed(&nodes[c + 1]));
            if !lambda.is_finite() {
                return Err(Error::Invariant(format!("non-finite wave speed in cell {c}")));
            }
            if lambda > 0.0 {
                dt = dt.min(cfl * h[c] / lambda);
            }
        }
        Ok(dt)
    }

    /// Limited triples for extended cells `first..=last`.
    fn limited_triples(
        &self,
        ext: &GhostExtended<D>,
        nodes: &[State<D>],
        w_bar: &[State<D>],
        floors: &Floors,
        dt: f64,
        first: isize,
        last: isize,
    ) -> Result<(Vec<LimitedCellTriple<D>>, Vec<bool>)> {
        let sys = &self.system;
        let w = ext.width() as isize;
        let node = |j: isize| &nodes[(j + w) as usize];
        let wbar = |i: isize, k: usize| w_bar[(i + w) as usize][k];
        let count = (last - first + 1) as usize;
        let out = try_map_range(count, |idx| {
            let i = first + idx as isize;
            let avg = ext.average(i);
            let (uj, uj1) = (node(i), node(i + 1));
            let (pre, touched) = match self.options.oscillation {
                OscillationControl::None => (
                    LimitedCellTriple::identity(*uj, midpoint_value(avg, uj, uj1), *uj1),
                    false,
                ),
                OscillationControl::Oe => {
                    let input = OeInputs {
                        left: [*node(i - 1), *ext.average(i - 1), *uj],
                        cell: [*uj, *avg, *uj1],
                        right: [*uj1, *ext.average(i + 1), *node(i + 2)],
                        sizes: [ext.size(i - 1), ext.size(i), ext.size(i + 1)],
                    };
                    let sigma = oe_sigma(sys, &input);
                    let theta = oe_theta(oe_beta(sys, &input), dt, ext.size(i), sigma);
                    (oe_apply(theta, avg, uj, uj1), theta < 1.0)
                }
                OscillationControl::Mp(params) => {
                    let wl = *ext.point(i);
                    let wr = *ext.point(i + 1);
                    let mut left_w = wl;
                    let mut right_w = wr;
                    for k in 0..D {
                        // both traces of cell i read the averages of cells i-2..=i+2
                        let stencil = [wbar(i - 2, k), wbar(i - 1, k), wbar(i, k), wbar(i + 1, k), wbar(i + 2, k)];
                        left_w[k] = mp_limit_right(wl[k], stencil, &params);
                        right_w[k] = mp_limit_left(wr[k], stencil, &params);
                    }
                    // clamping a trace by a rounding error of Ψ is not reported
                    let moved = |a: &State<D>, b: &State<D>| {
                        a.iter().zip(b.iter()).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0))
                    };
                    if left_w != wl || right_w != wr {
                        let l = sys.from_transformed(&left_w);
                        let r = sys.from_transformed(&right_w);
                        let touched = moved(&left_w, &wl) || moved(&right_w, &wr);
                        (LimitedCellTriple::identity(l, midpoint_value(avg, &l, &r), r), touched)
                    } else {
                        (
                            LimitedCellTriple::identity(*uj, midpoint_value(avg, uj, uj1), *uj1),
                            false,
                        )
                    }
                }
            };
            let triple = if self.options.idp {
                idp_limit(sys, avg, &pre.left, &pre.mid, &pre.right, floors)?
            } else {
                pre
            };
            Ok((triple, touched))
        })?;
        Ok(out.into_iter().unzip())
    }

    /// Residual of the semi-discretization. `dt` is the step size of the
    /// surrounding time step; only the oscillation-eliminating damping reads
    /// it.
    pub fn residual(&self, field: &DofField<D>, dt: f64) -> Result<(StageResidual<D>, StageReport<D>)> {
        let sys = &self.system;
        let n = self.num_cells();
        let ext = {
            let mut e = GhostExtended::empty(GHOST_WIDTH);
            e.fill(field, &self.grid, self.bc, sys)?;
            e
        };
        let w = GHOST_WIDTH as isize;
        let n_i = n as isize;

        let floors = sys.floors(&field.averages, self.options.floor_cap);
        let ext_nodes = (n + 1 + 2 * GHOST_WIDTH) as isize;
        let nodes: Vec<State<D>> = (0..ext_nodes).map(|k| sys.from_transformed(ext.point(k - w))).collect();
        let w_bar: Vec<State<D>> = if matches!(self.options.oscillation, OscillationControl::Mp(_)) {
            (0..(n as isize + 2 * w))
                .map(|k| sys.to_transformed(ext.average(k - w)).map_err(Error::from))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };

        // cells -1..=N so that both boundary nodes see two traces
        let (triples, touched) = self.limited_triples(&ext, &nodes, &w_bar, &floors, dt, -1, n_i)?;
        let triple = |i: isize| &triples[(i + 1) as usize];

        let fluxes: Vec<State<D>> = try_map_range(n + 1, |j| {
            let j = j as isize;
            Ok(llf_flux(sys, &triple(j - 1).right, &triple(j).left))
        })?;
        let h = self.grid.cell_sizes();
        let averages: Vec<State<D>> = (0..n).map(|c| -(fluxes[c + 1] - fluxes[c]) / h[c]).collect();

        let mids: Vec<State<D>> = triples
            .iter()
            .map(|t| sys.to_transformed(&t.mid).map_err(Error::from))
            .collect::<Result<_>>()?;
        let alpha_cap = if self.options.cap_alpha {
            field
                .averages
                .iter()
                .chain(&nodes)
                .map(|u| sys.max_wave_speed(u))
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let node_count = if self.bc == BoundaryCondition::Periodic { n } else { n + 1 };
        let node = |j: isize| &nodes[(j + w) as usize];
        let mut points = try_map_range(node_count, |j| {
            let j = j as isize;
            let wj = ext.point(j);
            let uj = node(j);
            let (ml, mr) = (triple(j - 1), triple(j));
            let alpha = spectral_radius_alpha(sys, uj, &ml.mid, &mr.mid).min(alpha_cap);
            let jac = sys.jacobian_transformed(wj, uj);
            Ok(point_update(
                &jac,
                alpha,
                ext.point(j - 1),
                wj,
                ext.point(j + 1),
                &mids[j as usize],
                &mids[(j + 1) as usize],
                ext.size(j - 1),
                ext.size(j),
            ))
        })?;
        if self.bc == BoundaryCondition::Periodic {
            points.push(points[0]);
        }
        let residual = DofField { averages, points };
        if let Some(c) = residual.averages.iter().position(|r| r.iter().any(|x| !x.is_finite())) {
            return Err(Error::Invariant(format!("non-finite cell residual in cell {c}")));
        }
        if let Some(j) = residual.points.iter().position(|r| r.iter().any(|x| !x.is_finite())) {
            return Err(Error::Invariant(format!("non-finite point residual at node {j}")));
        }

        let interior = &triples[1..=n];
        let clipped_points = match sys.domain_kind() {
            crate::systems::DomainKind::Interval(_) => field.points[..n + 1]
                .iter()
                .filter(|p| !(p[0] >= 0.0 && p[0] <= 1.0))
                .count(),
            crate::systems::DomainKind::Positivity => 0,
        };
        let is_mp = matches!(self.options.oscillation, OscillationControl::Mp(_));
        let touched_count = touched[1..=n].iter().filter(|&&t| t).count();
        let report = StageReport {
            triples: interior.to_vec(),
            floors,
            idp_active: interior.iter().filter(|t| t.theta < 1.0).count(),
            oe_active: if is_mp { 0 } else { touched_count },
            mp_active: if is_mp { touched_count } else { 0 },
            clipped_points,
        };
        Ok((residual, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Advection, Burgers, Euler, ScalarBounds};
    use proptest::prelude::*;

    fn s(x: f64) -> State<1> {
        State::<1>::new(x)
    }

    fn advection_scheme(n: usize, bounds: (f64, f64), options: SchemeOptions) -> PampaScheme<Advection, 1> {
        let sys = Advection::new(ScalarBounds::new(bounds.0, bounds.1).unwrap());
        PampaScheme::new(sys, Grid1D::uniform(0.0, 1.0, n).unwrap(), BoundaryCondition::Periodic, options).unwrap()
    }

    /// Exact cell averages and node values of a smooth periodic profile.
    fn sample_field(scheme: &PampaScheme<Advection, 1>, f: impl Fn(f64) -> f64, big_f: impl Fn(f64) -> f64) -> DofField<1> {
        let x = scheme.grid.nodes();
        let averages = (0..scheme.num_cells())
            .map(|c| s((big_f(x[c + 1]) - big_f(x[c])) / (x[c + 1] - x[c])))
            .collect();
        let nodes: Vec<_> = x.iter().map(|&xj| s(f(xj))).collect();
        scheme.field_from_conserved(averages, &nodes).unwrap()
    }

    #[test]
    fn llf_examples() {
        let a = Advection::new(ScalarBounds::new(0.0, 1.0).unwrap());
        assert_eq!(llf_flux(&a, &s(1.0), &s(0.0))[0], 1.0);
        let b = Burgers::new(ScalarBounds::new(-1.0, 2.0).unwrap());
        assert_eq!(llf_flux(&b, &s(2.0), &s(-1.0))[0], 4.25);
        let e = Euler::new(1.4);
        let u = e.from_primitive(&State::<3>::new(0.7, 0.3, 2.0));
        assert_eq!(llf_flux(&e, &u, &u), e.flux(&u));
    }

    #[test]
    fn alpha_is_the_largest_speed() {
        let b = Burgers::new(ScalarBounds::new(-1.0, 2.0).unwrap());
        assert_eq!(spectral_radius_alpha(&b, &s(2.0), &s(-1.0), &s(0.5)), 2.0);
        let a = Advection::new(ScalarBounds::new(0.0, 1.0).unwrap());
        assert_eq!(spectral_radius_alpha(&a, &s(0.3), &s(0.3), &s(0.3)), 1.0);
    }

    #[test]
    fn advection_split_is_one_sided_upwind() {
        let jac = JacobianMatrix::<1>::new(1.0);
        // w(x) = x at nodes x - h, x, x + h with exact midpoints
        let (x, h) = (0.3, 0.01);
        let r = point_update(&jac, 1.0, &s(x - h), &s(x), &s(x + h), &s(x - h / 2.0), &s(x + h / 2.0), h, h);
        assert!((r[0] + 1.0).abs() < 1e-12);
        // downwind data does not enter
        let r2 = point_update(&jac, 1.0, &s(x - h), &s(x), &s(7.0), &s(x - h / 2.0), &s(-3.0), h, h);
        assert_eq!(r[0], r2[0]);
    }

    #[test]
    fn quadratic_profile_is_differentiated_exactly() {
        let jac = JacobianMatrix::<1>::new(1.0);
        let (x, h) = (0.4, 0.05);
        let q = |y: f64| 2.0 * y * y - y + 0.5;
        let r = point_update(&jac, 1.0, &s(q(x - h)), &s(q(x)), &s(q(x + h)), &s(q(x - h / 2.0)), &s(q(x + h / 2.0)), h, h);
        assert!((r[0] + (4.0 * x - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let scheme = advection_scheme(16, (0.0, 1.0), SchemeOptions::default());
        let field = sample_field(&scheme, |_| 0.4, |x| 0.4 * x);
        let (r, rep) = scheme.residual(&field, 0.01).unwrap();
        assert!(r.averages.iter().all(|a| a[0].abs() < 1e-14));
        assert!(r.points.iter().all(|p| p[0].abs() < 1e-13));
        assert_eq!(rep.idp_active, 0);
    }

    #[test]
    fn smooth_data_matches_continuous_flux() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let scheme = advection_scheme(40, (0.0, 3.0), SchemeOptions::default());
        let field = sample_field(&scheme, |x| 1.0 + (two_pi * x).sin(), |x| x - (two_pi * x).cos() / two_pi);
        let (r, rep) = scheme.residual(&field, 0.001).unwrap();
        assert_eq!(rep.idp_active, 0);
        let h = scheme.grid.cell_sizes()[0];
        let nodes = scheme.conserved_points(&field);
        for c in 0..40 {
            let continuous = -(nodes[c + 1][0] - nodes[c][0]) / h;
            assert_eq!(r.averages[c][0], continuous);
        }
    }

    #[test]
    fn periodic_residual_telescopes() {
        let scheme = advection_scheme(33, (0.0, 1.0), SchemeOptions::default());
        // a square pulse triggers the limiter
        let field = sample_field(
            &scheme,
            |x| if (0.3..0.6).contains(&x) { 1.0 } else { 0.0 },
            |x| x.clamp(0.3, 0.6) - 0.3,
        );
        let (r, rep) = scheme.residual(&field, 0.001).unwrap();
        assert!(rep.idp_active > 0);
        let h = scheme.grid.cell_sizes();
        let total: f64 = r.averages.iter().zip(h).map(|(a, h)| a[0] * h).sum();
        assert!(total.abs() < 1e-14);
    }

    #[test]
    fn dt_selection() {
        let sys = Advection::new(ScalarBounds::new(0.0, 1.0).unwrap());
        let grid = Grid1D::uniform(-1.0, 1.0, 400).unwrap();
        let scheme = PampaScheme::new(sys, grid, BoundaryCondition::Periodic, SchemeOptions::default()).unwrap();
        let field = scheme
            .field_from_conserved(vec![s(0.5); 400], &vec![s(0.5); 401])
            .unwrap();
        assert!((scheme.compute_dt(&field, 0.1).unwrap() - 5e-4).abs() < 1e-18);
        assert!(scheme.compute_dt(&field, 0.2).is_err());
        assert!(scheme.compute_dt(&field, 0.0).is_err());

        let b = Burgers::new(ScalarBounds::new(-1.0, 1.0).unwrap());
        let scheme = PampaScheme::new(b, Grid1D::uniform(0.0, 1.0, 4).unwrap(), BoundaryCondition::Outflow, SchemeOptions::default()).unwrap();
        let field = scheme.field_from_conserved(vec![s(0.0); 4], &[s(0.0); 5]).unwrap();
        assert_eq!(scheme.compute_dt(&field, 0.1).unwrap(), f64::INFINITY);
    }

    #[test]
    fn reflective_scalar_is_rejected() {
        let sys = Advection::new(ScalarBounds::new(0.0, 1.0).unwrap());
        let grid = Grid1D::uniform(0.0, 1.0, 8).unwrap();
        assert!(PampaScheme::new(sys, grid, BoundaryCondition::Reflective, SchemeOptions::default()).is_err());
    }

    proptest! {
        #[test]
        fn periodic_shift_invariance(vals in proptest::collection::vec(0.0f64..1.0, 12), k in 0usize..12) {
            let opts = SchemeOptions { oscillation: OscillationControl::Oe, ..SchemeOptions::default() };
            let scheme = advection_scheme(12, (0.0, 1.0), opts);
            let n = 12;
            // node values between neighboring averages keep every state in G
            let nodes: Vec<_> = (0..=n).map(|j| s(0.5 * (vals[j % n] + vals[(j + n - 1) % n]))).collect();
            let averages: Vec<_> = vals.iter().map(|&v| s(v)).collect();
            let field = scheme.field_from_conserved(averages.clone(), &nodes).unwrap();
            let shifted_avg: Vec<_> = (0..n).map(|c| averages[(c + n - k) % n]).collect();
            let shifted_nodes: Vec<_> = (0..=n).map(|j| nodes[(j + n - k) % n]).collect();
            let shifted = scheme.field_from_conserved(shifted_avg, &shifted_nodes).unwrap();
            let (r, _) = scheme.residual(&field, 0.005).unwrap();
            let (rs, _) = scheme.residual(&shifted, 0.005).unwrap();
            for c in 0..n {
                prop_assert!((rs.averages[(c + k) % n][0] - r.averages[c][0]).abs() < 1e-12);
                prop_assert!((rs.points[(c + k) % n][0] - r.points[c][0]).abs() < 1e-12);
            }
        }
    }
}
