//! SSP time integration as convex combinations of forward-Euler stages.
//!
//! The stepping functions are generic over [`LinearState`] so they can be
//! checked on scalar ODEs; [`advance`] drives a [`PampaScheme`] to a final
//! time.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{DofField, PampaScheme, StageReport};
use crate::systems::{EquationSystem, Floors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    ForwardEuler,
    SspRk3,
    SspMs3,
}

/// Vector-space operations the integrators need.
pub trait LinearState: Clone {
    /// `a · self + b · other`.
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl LinearState for f64 {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }
}

impl<const D: usize> LinearState for DofField<D> {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.combine(a, other, b)
    }
}

/// `u + dt · L(u)`, given `L(u)`.
fn euler_update<T: LinearState>(u: &T, lu: &T, dt: f64) -> T {
    u.lincomb(1.0, lu, dt)
}

pub fn forward_euler_step<T: LinearState>(
    u: &T,
    dt: f64,
    eval: &mut dyn FnMut(&T, usize) -> Result<T>,
    post: &mut dyn FnMut(&mut T),
) -> Result<T> {
    let lu = eval(u, 0)?;
    let mut next = euler_update(u, &lu, dt);
    post(&mut next);
    Ok(next)
}

/// Three-stage Shu–Osher SSP Runge–Kutta step. `lu0`, if given, is `L(u)`.
pub fn ssp_rk3_step<T: LinearState>(
    u: &T,
    dt: f64,
    lu0: Option<T>,
    eval: &mut dyn FnMut(&T, usize) -> Result<T>,
    post: &mut dyn FnMut(&mut T),
) -> Result<T> {
    let lu = match lu0 {
        Some(l) => l,
        None => eval(u, 0)?,
    };
    let mut u1 = euler_update(u, &lu, dt);
    post(&mut u1);
    let l1 = eval(&u1, 1)?;
    let mut u2 = u.lincomb(0.75, &euler_update(&u1, &l1, dt), 0.25);
    post(&mut u2);
    let l2 = eval(&u2, 2)?;
    let mut u3 = u.lincomb(1.0 / 3.0, &euler_update(&u2, &l2, dt), 2.0 / 3.0);
    post(&mut u3);
    Ok(u3)
}

/// Four-step third-order SSP multistep method
/// `u^{n+1} = 16/27 (u^n + 3Δt L(u^n)) + 11/27 (u^{n−3} + 12/11 Δt L(u^{n−3}))`
/// with three SSP-RK3 steps to start. The step size must stay fixed while
/// history is kept; [`SspMs3::reset`] starts over.
#[derive(Debug, Clone)]
pub struct SspMs3<T> {
    history: VecDeque<(T, T)>,
}

impl<T: LinearState> Default for SspMs3<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: LinearState> SspMs3<T> {
    /// Ratio of the SSP coefficient to forward Euler's.
    pub const SSP_COEFFICIENT: f64 = 1.0 / 3.0;

    pub fn new() -> Self {
        Self {
            history: VecDeque::with_capacity(3),
        }
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }

    pub fn is_starting(&self) -> bool {
        self.history.len() < 3
    }

    pub fn step(
        &mut self,
        u: &T,
        dt: f64,
        eval: &mut dyn FnMut(&T, usize) -> Result<T>,
        post: &mut dyn FnMut(&mut T),
    ) -> Result<T> {
        let lu = eval(u, 0)?;
        if self.is_starting() {
            let next = ssp_rk3_step(u, dt, Some(lu.clone()), eval, post)?;
            self.history.push_back((u.clone(), lu));
            return Ok(next);
        }
        let (old, l_old) = self.history.front().expect("three history states");
        let a = euler_update(u, &lu, 3.0 * dt);
        let b = euler_update(old, l_old, 12.0 / 11.0 * dt);
        let mut next = a.lincomb(16.0 / 27.0, &b, 11.0 / 27.0);
        post(&mut next);
        self.history.pop_front();
        self.history.push_back((u.clone(), lu));
        Ok(next)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeSettings {
    pub integrator: IntegratorKind,
    pub cfl: f64,
    /// Step rejections allowed per step when a stage leaves the invariant
    /// domain; each retry halves `Δt`. Zero aborts on the first violation.
    pub max_retries: u32,
    pub max_steps: usize,
}

impl Default for TimeSettings {
    fn default() -> Self {
        Self {
            integrator: IntegratorKind::SspRk3,
            cfl: 0.1,
            max_retries: 0,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    pub idp_active: usize,
    pub oe_active: usize,
    pub mp_active: usize,
    pub clipped_points: usize,
    pub retries: u32,
}

/// Callbacks from [`advance`]. Stage callbacks only fire for accepted steps.
pub trait RunObserver<const D: usize> {
    /// Whether [`RunObserver::on_stage`] should be called; recording stages
    /// costs a copy of every stage input.
    fn wants_stages(&self) -> bool {
        false
    }

    /// `field` is the input of residual evaluation `stage` of step `step`;
    /// `report` holds the limited data built from it.
    fn on_stage(&mut self, _step: usize, _stage: usize, _field: &DofField<D>, _report: &StageReport<D>) -> Result<()> {
        Ok(())
    }

    /// Called with the field at the end of each accepted step.
    fn on_step(&mut self, _info: &StepInfo, _field: &DofField<D>) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl<const D: usize> RunObserver<D> for NoObserver {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub t: f64,
    pub rejected_steps: usize,
    pub idp_activations: usize,
    pub oe_activations: usize,
    pub mp_activations: usize,
}

fn is_stage_failure(e: &Error) -> bool {
    matches!(e, Error::Invariant(_) | Error::Domain(_))
}

/// Advance `field` to `t_final`.
pub fn advance<S: EquationSystem<D>, const D: usize>(
    scheme: &PampaScheme<S, D>,
    mut field: DofField<D>,
    t_final: f64,
    settings: &TimeSettings,
    observer: &mut dyn RunObserver<D>,
) -> Result<(DofField<D>, RunStats)> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::config(format!("final time must be finite and non-negative, got {t_final}")));
    }
    let sys = &scheme.system;
    let record = observer.wants_stages();
    let mut stats = RunStats::default();
    let mut t = 0.0;
    let mut ms3 = SspMs3::<DofField<D>>::new();
    // fixed multistep size and the number of steps left at that size
    let mut ms3_plan: Option<(f64, usize)> = None;

    while t < t_final {
        if stats.steps >= settings.max_steps {
            return Err(Error::Aborted(format!("step limit {} reached at t = {t}", settings.max_steps)));
        }
        let remaining = t_final - t;
        let dt_cfl = scheme.compute_dt(&field, settings.cfl)?;
        let mut dt = match settings.integrator {
            IntegratorKind::SspMs3 => {
                let allowed = dt_cfl * SspMs3::<DofField<D>>::SSP_COEFFICIENT;
                let keep = matches!(ms3_plan, Some((h, left)) if left > 0 && h <= allowed);
                if !keep {
                    let k = (remaining / allowed).ceil().max(1.0);
                    ms3_plan = Some((remaining / k, k as usize));
                    ms3.reset();
                }
                let (h, left) = ms3_plan.unwrap();
                if left == 1 {
                    remaining
                } else {
                    h
                }
            }
            _ => dt_cfl.min(remaining),
        };

        let mut retries = 0;
        let (next, info) = loop {
            let mut stages: Vec<(usize, DofField<D>, StageReport<D>)> = Vec::new();
            let mut info = StepInfo {
                step: stats.steps + 1,
                dt,
                retries,
                ..StepInfo::default()
            };
            let mut eval = |u: &DofField<D>, stage: usize| -> Result<DofField<D>> {
                let (r, rep) = scheme.residual(u, dt)?;
                info.idp_active += rep.idp_active;
                info.oe_active += rep.oe_active;
                info.mp_active += rep.mp_active;
                info.clipped_points += rep.clipped_points;
                if record {
                    stages.push((stage, u.clone(), rep));
                }
                Ok(r)
            };
            let mut post = |u: &mut DofField<D>| scheme.sync_boundary(u);
            let attempt = match settings.integrator {
                IntegratorKind::ForwardEuler => forward_euler_step(&field, dt, &mut eval, &mut post),
                IntegratorKind::SspRk3 => ssp_rk3_step(&field, dt, None, &mut eval, &mut post),
                IntegratorKind::SspMs3 => ms3.step(&field, dt, &mut eval, &mut post),
            };
            // plain runs carry no guarantee, so their averages are not checked
            let outcome = attempt.and_then(|u| {
                if !scheme.options.idp {
                    return Ok(u);
                }
                match u.averages.iter().position(|a| !sys.in_domain(a, &Floors::zero())) {
                    Some(c) => Err(Error::Invariant(format!(
                        "cell average {c} left the invariant domain: {:?}",
                        u.averages[c].as_slice()
                    ))),
                    None => Ok(u),
                }
            });
            match outcome {
                Ok(u) => {
                    for (stage, f, rep) in &stages {
                        observer.on_stage(info.step, *stage, f, rep)?;
                    }
                    break (u, info);
                }
                Err(e) if is_stage_failure(&e) && retries < settings.max_retries => {
                    retries += 1;
                    stats.rejected_steps += 1;
                    dt *= 0.5;
                    ms3.reset();
                    ms3_plan = None;
                }
                Err(e) => {
                    return Err(Error::Aborted(format!(
                        "step {} at t = {t} with dt = {dt}: {e}",
                        stats.steps + 1
                    )))
                }
            }
        };

        if let Some((h, left)) = ms3_plan {
            if settings.integrator == IntegratorKind::SspMs3 && info.retries == 0 {
                ms3_plan = Some((h, left.saturating_sub(1)));
            }
        }
        field = next;
        t = if dt == remaining { t_final } else { t + dt };
        stats.steps += 1;
        stats.t = t;
        stats.idp_activations += info.idp_active;
        stats.oe_activations += info.oe_active;
        stats.mp_activations += info.mp_active;
        observer.on_step(&StepInfo { t, ..info }, &field)?;
    }
    Ok((field, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> impl FnMut(&f64, usize) -> Result<f64> {
        |u: &f64, _| Ok(-u)
    }

    fn integrate(kind: IntegratorKind, dt: f64, t_final: f64) -> f64 {
        let steps = (t_final / dt).round() as usize;
        let mut u = 1.0;
        let mut ms3 = SspMs3::new();
        let mut eval = decay();
        let mut post = |_: &mut f64| {};
        for _ in 0..steps {
            u = match kind {
                IntegratorKind::ForwardEuler => forward_euler_step(&u, dt, &mut eval, &mut post).unwrap(),
                IntegratorKind::SspRk3 => ssp_rk3_step(&u, dt, None, &mut eval, &mut post).unwrap(),
                IntegratorKind::SspMs3 => ms3.step(&u, dt, &mut eval, &mut post).unwrap(),
            };
        }
        u
    }

    #[test]
    fn rk3_one_step_is_third_order_taylor() {
        let u = integrate(IntegratorKind::SspRk3, 0.1, 0.1);
        // 1 - h + h²/2 - h³/6 at h = 0.1
        assert!((u - 0.904_833_333_333_333_3).abs() < 1e-15);
        assert!((u - (-0.1f64).exp()).abs() < 5e-6);
    }

    #[test]
    fn zero_residual_leaves_state_unchanged() {
        let mut zero = |_: &f64, _| Ok(0.0);
        let mut post = |_: &mut f64| {};
        assert_eq!(forward_euler_step(&0.7, 0.1, &mut zero, &mut post).unwrap(), 0.7);
        assert_eq!(ssp_rk3_step(&0.7, 0.1, None, &mut zero, &mut post).unwrap(), 0.7);
        let mut ms3 = SspMs3::new();
        for _ in 0..6 {
            assert_eq!(ms3.step(&0.7, 0.1, &mut zero, &mut post).unwrap(), 0.7);
        }
    }

    #[test]
    fn observed_orders_are_three() {
        for kind in [IntegratorKind::SspRk3, IntegratorKind::SspMs3] {
            let dts = [0.1, 0.05, 0.025, 0.0125];
            let errs: Vec<f64> = dts
                .iter()
                .map(|&dt| (integrate(kind, dt, 2.0) - (-2.0f64).exp()).abs())
                .collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((order - 3.0).abs() < 0.1, "{kind:?}: order {order}, errors {errs:?}");
            }
        }
    }

    #[test]
    fn multistep_is_a_convex_combination() {
        // coefficients of the two forward-Euler branches
        let (a, b): (f64, f64) = (16.0 / 27.0, 11.0 / 27.0);
        assert!((a + b - 1.0).abs() < 1e-16);
        // effective step sizes 3Δt and 12/11 Δt: the larger fixes the SSP coefficient
        assert!((SspMs3::<f64>::SSP_COEFFICIENT - 1.0 / 3.0).abs() < 1e-16);
    }
}
