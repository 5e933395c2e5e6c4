//! Brute-force verifiers.
//!
//! Nothing in here goes through the flux or limiter code paths of
//! [`crate::scheme`]: domain predicates, fluxes and splitting states are
//! recomputed from the conservative variables, and the splitting checks run
//! in exact rational arithmetic.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Float, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limiters::idp::{idp_limit, idp_limit_scalar};
use crate::scheme::{DofField, StageReport};
use crate::systems::{Advection, Burgers, EquationSystem, Euler, Mhd, ScalarBounds};
use crate::timeint::{RunObserver, StepInfo};
use crate::State;

/// Invariant domain restated independently of the systems module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Interval { min: f64, max: f64 },
    Euler { gamma: f64 },
    Mhd { gamma: f64, bx: f64 },
}

impl DomainSpec {
    /// Signed distance-like margin: non-negative inside an interval, positive
    /// inside the positivity domains. NaN for non-finite states.
    pub fn margin(&self, u: &[f64]) -> f64 {
        if u.iter().any(|x| !x.is_finite()) {
            return f64::NAN;
        }
        match *self {
            DomainSpec::Interval { min, max } => (u[0] - min).min(max - u[0]),
            DomainSpec::Euler { gamma } => {
                let rho = u[0];
                if !(rho > 0.0) {
                    return rho;
                }
                rho.min((gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / rho))
            }
            DomainSpec::Mhd { gamma, bx } => {
                let rho = u[0];
                if !(rho > 0.0) {
                    return rho;
                }
                let kinetic = 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / rho;
                let magnetic = 0.5 * (bx * bx + u[4] * u[4] + u[5] * u[5]);
                rho.min((gamma - 1.0) * (u[6] - kinetic - magnetic))
            }
        }
    }

    /// Closed interval for scalars, strict positivity of `ρ` and `p` for the
    /// systems.
    pub fn contains(&self, u: &[f64]) -> bool {
        let m = self.margin(u);
        match self {
            DomainSpec::Interval { .. } => m >= 0.0,
            _ => m > 0.0,
        }
    }
}

/// Systems the oracle knows how to restate.
pub trait OracleDomain<const D: usize>: EquationSystem<D> {
    fn domain_spec(&self) -> DomainSpec;
}

fn interval(b: ScalarBounds) -> DomainSpec {
    DomainSpec::Interval { min: b.min, max: b.max }
}

impl OracleDomain<1> for Advection {
    fn domain_spec(&self) -> DomainSpec {
        interval(self.map.bounds)
    }
}

impl OracleDomain<1> for Burgers {
    fn domain_spec(&self) -> DomainSpec {
        interval(self.map.bounds)
    }
}

impl OracleDomain<3> for Euler {
    fn domain_spec(&self) -> DomainSpec {
        DomainSpec::Euler { gamma: self.gamma }
    }
}

impl OracleDomain<7> for Mhd {
    fn domain_spec(&self) -> DomainSpec {
        DomainSpec::Mhd {
            gamma: self.gamma,
            bx: self.bx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Average,
    Point,
    /// Limited trace at the left end of a cell.
    LeftTrace,
    Midpoint,
    /// Limited trace at the right end of a cell.
    RightTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Cell(usize),
    Node(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub step: usize,
    /// Residual evaluation within the step; `None` for the end-of-step field.
    pub stage: Option<usize>,
    pub location: Location,
    pub kind: ValueKind,
    pub state: Vec<f64>,
    pub margin: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stage = self.stage.map_or("end".to_string(), |s| s.to_string());
        write!(
            f,
            "step {} stage {stage} {:?} {:?}: margin {:e}, state {:?}",
            self.step, self.location, self.kind, self.margin, self.state
        )
    }
}

/// Findings of a domain sweep. Only the first `cap` violations are stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    pub total: usize,
    pub checked: usize,
    /// Smallest margin seen over all checked positivity values, relative to
    /// nothing (absolute `min(ρ, p)`); for intervals the smallest distance
    /// to the bounds.
    pub min_margin: f64,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

/// Observer checking every stage input (averages and nodes), every limited
/// triple, and the field at the end of every step.
pub struct DomainSweep<S> {
    system: S,
    dom: DomainSpec,
    cap: usize,
    report: ViolationReport,
}

impl<S> DomainSweep<S> {
    pub fn new<const D: usize>(system: S) -> Self
    where
        S: OracleDomain<D>,
    {
        let dom = system.domain_spec();
        Self {
            system,
            dom,
            cap: 100,
            report: ViolationReport {
                min_margin: f64::INFINITY,
                ..ViolationReport::default()
            },
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn report(&self) -> &ViolationReport {
        &self.report
    }

    pub fn into_report(self) -> ViolationReport {
        self.report
    }

    fn check(&mut self, step: usize, stage: Option<usize>, location: Location, kind: ValueKind, u: &[f64]) {
        let r = &mut self.report;
        r.checked += 1;
        let margin = self.dom.margin(u);
        if margin < r.min_margin {
            r.min_margin = margin;
        }
        if !self.dom.contains(u) {
            r.total += 1;
            if r.violations.len() < self.cap {
                r.violations.push(Violation {
                    step,
                    stage,
                    location,
                    kind,
                    state: u.to_vec(),
                    margin,
                });
            }
        }
    }

    /// Check the averages and the node values of a field.
    pub fn check_field<const D: usize>(&mut self, step: usize, stage: Option<usize>, field: &DofField<D>)
    where
        S: EquationSystem<D>,
    {
        for (c, a) in field.averages.iter().enumerate() {
            self.check(step, stage, Location::Cell(c), ValueKind::Average, a.as_slice());
        }
        for (j, w) in field.points.iter().enumerate() {
            let u = self.system.from_transformed(w);
            self.check(step, stage, Location::Node(j), ValueKind::Point, u.as_slice());
        }
    }

    pub fn check_triples<const D: usize>(&mut self, step: usize, stage: usize, report: &StageReport<D>) {
        for (c, t) in report.triples.iter().enumerate() {
            let loc = Location::Cell(c);
            self.check(step, Some(stage), loc, ValueKind::LeftTrace, t.left.as_slice());
            self.check(step, Some(stage), loc, ValueKind::Midpoint, t.mid.as_slice());
            self.check(step, Some(stage), loc, ValueKind::RightTrace, t.right.as_slice());
        }
    }
}

impl<S: EquationSystem<D>, const D: usize> RunObserver<D> for DomainSweep<S> {
    fn wants_stages(&self) -> bool {
        true
    }

    fn on_stage(&mut self, step: usize, stage: usize, field: &DofField<D>, report: &StageReport<D>) -> Result<()> {
        self.check_field(step, Some(stage), field);
        self.check_triples(step, stage, report);
        Ok(())
    }

    fn on_step(&mut self, info: &StepInfo, field: &DofField<D>) -> Result<()> {
        self.check_field(info.step, None, field);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lax–Friedrichs splitting in exact arithmetic

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite sample")
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// Exact `2ρ(ρe)`-type pressure certificate: `p · 2ρ / (γ − 1)`, whose sign
/// is the sign of the pressure for `ρ > 0`.
fn pressure_certificate(u: &[BigRational], mhd: Option<&BigRational>) -> BigRational {
    let rho = &u[0];
    match mhd {
        None => rho * &u[2] * BigRational::from_integer(2.into()) - &u[1] * &u[1],
        Some(bx) => {
            let m2 = &u[1] * &u[1] + &u[2] * &u[2] + &u[3] * &u[3];
            let b2 = bx * bx + &u[4] * &u[4] + &u[5] * &u[5];
            rho * &u[6] * BigRational::from_integer(2.into()) - m2 - rho * b2
        }
    }
}

/// Exact flux, written out from the conservative variables.
fn exact_flux(u: &[BigRational], gamma: &BigRational, mhd: Option<&BigRational>) -> Vec<BigRational> {
    let one = BigRational::from_integer(1.into());
    let rho = &u[0];
    let g1 = gamma - &one;
    match mhd {
        None => {
            let v = &u[1] / rho;
            let p = &g1 * (&u[2] - half() * &u[1] * &v);
            vec![u[1].clone(), &u[1] * &v + &p, (&u[2] + &p) * &v]
        }
        Some(bx) => {
            let (vx, vy, vz) = (&u[1] / rho, &u[2] / rho, &u[3] / rho);
            let (by, bz) = (&u[4], &u[5]);
            let b2 = bx * bx + by * by + bz * bz;
            let m2v = &u[1] * &vx + &u[2] * &vy + &u[3] * &vz;
            let p = &g1 * (&u[6] - half() * m2v - half() * &b2);
            let pt = &p + half() * &b2;
            let vdotb = &vx * bx + &vy * by + &vz * bz;
            vec![
                u[1].clone(),
                &u[1] * &vx + &pt - bx * bx,
                &u[2] * &vx - bx * by,
                &u[3] * &vx - bx * bz,
                by * &vx - bx * &vy,
                bz * &vx - bx * &vz,
                (&u[6] + &pt) * &vx - bx * vdotb,
            ]
        }
    }
}

/// `(U_L + U_R)/2 − (F(U_R) − F(U_L))/(2λ)` in exact arithmetic.
pub fn exact_splitting_state(
    ul: &[f64],
    ur: &[f64],
    lambda: f64,
    gamma: f64,
    bx: Option<f64>,
) -> Vec<BigRational> {
    let gq = q(gamma);
    let bq = bx.map(q);
    let ul: Vec<_> = ul.iter().map(|&x| q(x)).collect();
    let ur: Vec<_> = ur.iter().map(|&x| q(x)).collect();
    let fl = exact_flux(&ul, &gq, bq.as_ref());
    let fr = exact_flux(&ur, &gq, bq.as_ref());
    let two_lambda = q(lambda) * BigRational::from_integer(2.into());
    (0..ul.len())
        .map(|k| (&ul[k] + &ur[k]) * half() - (&fr[k] - &fl[k]) / &two_lambda)
        .collect()
}

/// Exact dyadic number `m · 2^e`. Every finite `f64` is one, and sums and
/// products stay dyadic, so no gcd reductions are needed.
#[derive(Debug, Clone, PartialEq)]
struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self { m: BigInt::zero(), e: 0 };
        }
        let (mant, exp, sign) = x.integer_decode();
        Self {
            m: BigInt::from(mant) * BigInt::from(sign),
            e: exp as i64,
        }
    }

    fn half() -> Self {
        Self { m: BigInt::from(1), e: -1 }
    }

    fn sign(&self) -> Sign {
        self.m.sign()
    }

    fn add(&self, o: &Self) -> Self {
        if self.m.is_zero() {
            return o.clone();
        }
        if o.m.is_zero() {
            return self.clone();
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        Self { m: a + b, e }
    }

    fn neg(&self) -> Self {
        Self {
            m: -&self.m,
            e: self.e,
        }
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            m: &self.m * &o.m,
            e: self.e + o.e,
        }
    }

    /// `(mantissa, exponent)` with the mantissa an `f64` of magnitude below
    /// `2^62`; avoids overflow for huge values.
    fn parts(&self) -> (f64, i64) {
        let bits = self.m.bits() as i64;
        let shift = (bits - 62).max(0);
        let top = (&self.m >> shift as u64).to_f64().unwrap_or(0.0);
        (top, self.e + shift)
    }
}

/// `a / b` in floating point for dyadic `a`, `b`.
fn ratio(a: &Dyadic, b: &Dyadic) -> f64 {
    let (ma, ea) = a.parts();
    let (mb, eb) = b.parts();
    ma / mb * 2f64.powi((ea - eb).clamp(-2000, 2000) as i32)
}

fn dsum(terms: &[Dyadic]) -> Dyadic {
    terms.iter().fold(Dyadic::from_f64(0.0), |acc, t| acc.add(t))
}

/// `ρ²F(U)`, which is polynomial in `U`.
fn rho2_flux(u: &[Dyadic], g1: &Dyadic, bx: Option<&Dyadic>) -> Vec<Dyadic> {
    let h = Dyadic::half();
    let rho = &u[0];
    match bx {
        None => {
            let (m, e) = (&u[1], &u[2]);
            // ρp = (γ − 1)(ρE − m²/2)
            let rho_p = g1.mul(&rho.mul(e).sub(&h.mul(&m.mul(m))));
            vec![
                rho.mul(rho).mul(m),
                rho.mul(&m.mul(m).add(&rho_p)),
                rho.mul(e).add(&rho_p).mul(m),
            ]
        }
        Some(b) => {
            let (mx, my, mz, by, bz, e) = (&u[1], &u[2], &u[3], &u[4], &u[5], &u[6]);
            let b2 = dsum(&[b.mul(b), by.mul(by), bz.mul(bz)]);
            let m2 = dsum(&[mx.mul(mx), my.mul(my), mz.mul(mz)]);
            let rho_p = g1.mul(&rho.mul(e).sub(&h.mul(&m2)).sub(&h.mul(&rho.mul(&b2))));
            let rho_pt = rho_p.add(&h.mul(&rho.mul(&b2)));
            let mdotb = dsum(&[mx.mul(b), my.mul(by), mz.mul(bz)]);
            vec![
                rho.mul(rho).mul(mx),
                rho.mul(&mx.mul(mx).add(&rho_pt).sub(&rho.mul(&b.mul(b)))),
                rho.mul(&my.mul(mx).sub(&rho.mul(&b.mul(by)))),
                rho.mul(&mz.mul(mx).sub(&rho.mul(&b.mul(bz)))),
                rho.mul(&by.mul(mx).sub(&b.mul(my))),
                rho.mul(&bz.mul(mx).sub(&b.mul(mz))),
                rho.mul(e).add(&rho_pt).mul(mx).sub(&rho.mul(&b.mul(&mdotb))),
            ]
        }
    }
}

/// Splitting state scaled by `D = 2λρ_L²ρ_R² > 0`: returns `(D·U*, D)`.
fn scaled_splitting_state(ul: &[f64], ur: &[f64], lambda: f64, gamma: f64, bx: Option<f64>) -> (Vec<Dyadic>, Dyadic) {
    let g1 = Dyadic::from_f64(gamma).sub(&Dyadic::from_f64(1.0));
    let b = bx.map(Dyadic::from_f64);
    let ul: Vec<_> = ul.iter().map(|&x| Dyadic::from_f64(x)).collect();
    let ur: Vec<_> = ur.iter().map(|&x| Dyadic::from_f64(x)).collect();
    let (rl2, rr2) = (ul[0].mul(&ul[0]), ur[0].mul(&ur[0]));
    let lam = Dyadic::from_f64(lambda);
    let fl = rho2_flux(&ul, &g1, b.as_ref());
    let fr = rho2_flux(&ur, &g1, b.as_ref());
    let c = lam.mul(&rl2).mul(&rr2);
    let v = (0..ul.len())
        .map(|k| c.mul(&ul[k].add(&ur[k])).sub(&rl2.mul(&fr[k]).sub(&rr2.mul(&fl[k]))))
        .collect();
    (v, c.add(&c))
}

/// `2ρE − |m|² − ρ|B|²`, a positive multiple of the pressure when `ρ > 0`,
/// for a state scaled by `d`: the result is scaled by `d³`.
fn scaled_certificate(v: &[Dyadic], d: &Dyadic, bx: Option<f64>) -> Dyadic {
    let two = Dyadic::from_f64(2.0);
    match bx {
        None => two.mul(&v[0]).mul(&v[2]).sub(&v[1].mul(&v[1])).mul(d),
        Some(b) => {
            let db = d.mul(&Dyadic::from_f64(b));
            let m2 = dsum(&[v[1].mul(&v[1]), v[2].mul(&v[2]), v[3].mul(&v[3])]);
            let b2 = dsum(&[db.mul(&db), v[4].mul(&v[4]), v[5].mul(&v[5])]);
            two.mul(&v[0]).mul(&v[6]).sub(&m2).mul(d).sub(&v[0].mul(&b2))
        }
    }
}

/// Membership of the splitting state through the direct rational formula;
/// slower than the sampler's route and used to cross-check it.
pub fn exact_splitting_admissible(ul: &[f64], ur: &[f64], lambda: f64, gamma: f64, bx: Option<f64>) -> bool {
    let star = exact_splitting_state(ul, ur, lambda, gamma, bx);
    star[0] > BigRational::zero() && pressure_certificate(&star, bx.map(q).as_ref()) > BigRational::zero()
}

/// Relative margin `min(ρ*/ρ̄, p*/p̄)` of the splitting state, decided
/// exactly in sign.
fn splitting_margin(
    ul: &[f64],
    ur: &[f64],
    lambda: f64,
    gamma: f64,
    bx: Option<f64>,
    scales: (f64, f64),
) -> f64 {
    let (v, d) = scaled_splitting_state(ul, ur, lambda, gamma, bx);
    if v[0].sign() != Sign::Plus {
        return ratio(&v[0], &d).min(-f64::MIN_POSITIVE) / scales.0;
    }
    let cert = scaled_certificate(&v, &d, bx);
    // p* = (γ − 1) cert / (2 V₀ D²)
    let den = Dyadic::from_f64(2.0).mul(&v[0]).mul(&d).mul(&d);
    let p = (gamma - 1.0) * ratio(&cert, &den);
    let p = match cert.sign() {
        Sign::Plus => p.max(f64::MIN_POSITIVE),
        _ => p.min(-0.0).min(-f64::MIN_POSITIVE),
    };
    (ratio(&v[0], &d) / scales.0).min(p / scales.1)
}

fn exactly_admissible(u: &[f64], bx: Option<f64>) -> bool {
    let v: Vec<_> = u.iter().map(|&x| Dyadic::from_f64(x)).collect();
    v[0].sign() == Sign::Plus && scaled_certificate(&v, &Dyadic::from_f64(1.0), bx).sign() == Sign::Plus
}

/// Which system the splitting sampler draws pairs for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingSystem {
    Euler { gamma: f64 },
    /// `B_x` is drawn once per pair and shared by both states.
    Mhd { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingRanges {
    pub density: (f64, f64),
    pub pressure: (f64, f64),
    /// Each velocity component is uniform in `[−v, v]`.
    pub velocity: f64,
    /// Magnetic field magnitudes are log-uniform in this range with a random
    /// sign.
    pub field: (f64, f64),
}

impl Default for SamplingRanges {
    fn default() -> Self {
        Self {
            density: (1e-6, 1e3),
            pressure: (1e-8, 1e6),
            velocity: 100.0,
            field: (1e-3, 1e3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingPair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bx: Option<f64>,
    pub lambda: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingReport {
    pub system: SplittingSystem,
    pub samples: usize,
    pub seed: u64,
    pub lambda_scale: f64,
    pub failures: usize,
    /// Draws discarded because the rounded conservative state was not
    /// exactly admissible.
    pub redraws: usize,
    pub worst: Option<SplittingPair>,
}

impl SplittingReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const CHUNK: usize = 1024;

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn signed_field(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    let m = log_uniform(rng, range);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

/// One admissible conservative state with its primitive pressure; `None` if
/// rounding put it outside the domain.
fn draw_state(rng: &mut ChaCha8Rng, system: SplittingSystem, r: &SamplingRanges, bx: f64) -> Option<(Vec<f64>, f64)> {
    let rho = log_uniform(rng, r.density);
    let p = log_uniform(rng, r.pressure);
    let mut vel = || rng.random_range(-r.velocity..=r.velocity);
    match system {
        SplittingSystem::Euler { gamma } => {
            let v = vel();
            let u = Euler::new(gamma).from_primitive(&State::<3>::new(rho, v, p));
            exactly_admissible(u.as_slice(), None).then(|| (u.as_slice().to_vec(), p))
        }
        SplittingSystem::Mhd { gamma } => {
            let (vx, vy, vz) = (vel(), vel(), vel());
            let by = signed_field(rng, r.field);
            let bz = signed_field(rng, r.field);
            let u = Mhd::new(gamma, bx).from_primitive(&State::<7>::from([rho, vx, vy, vz, by, bz, p]));
            exactly_admissible(u.as_slice(), Some(bx)).then(|| (u.as_slice().to_vec(), p))
        }
    }
}

fn pair_speed(system: SplittingSystem, ul: &[f64], ur: &[f64], bx: f64) -> f64 {
    match system {
        SplittingSystem::Euler { gamma } => {
            Euler::new(gamma).idp_pair_speed(&State::<3>::from_column_slice(ul), &State::<3>::from_column_slice(ur))
        }
        SplittingSystem::Mhd { gamma } => {
            Mhd::new(gamma, bx).idp_pair_speed(&State::<7>::from_column_slice(ul), &State::<7>::from_column_slice(ur))
        }
    }
}

/// Draw `samples` random admissible pairs and check that the splitting state
/// with `λ = lambda_scale · idp_pair_speed` is admissible, exactly.
/// Deterministic in `seed` regardless of the thread count.
pub fn sample_lf_splitting(
    system: SplittingSystem,
    samples: usize,
    seed: u64,
    lambda_scale: f64,
    ranges: &SamplingRanges,
) -> SplittingReport {
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<(usize, usize, Option<SplittingPair>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let (mut failures, mut redraws) = (0, 0);
            let mut worst: Option<SplittingPair> = None;
            for _ in 0..count {
                let (bx, gamma) = match system {
                    SplittingSystem::Euler { gamma } => (None, gamma),
                    SplittingSystem::Mhd { gamma } => (Some(signed_field(&mut rng, ranges.field)), gamma),
                };
                let b = bx.unwrap_or(0.0);
                let (ul, pl, ur, pr) = loop {
                    match (draw_state(&mut rng, system, ranges, b), draw_state(&mut rng, system, ranges, b)) {
                        (Some((ul, pl)), Some((ur, pr))) => break (ul, pl, ur, pr),
                        _ => redraws += 1,
                    }
                };
                let lambda = lambda_scale * pair_speed(system, &ul, &ur, b);
                let margin = splitting_margin(&ul, &ur, lambda, gamma, bx, (0.5 * (ul[0] + ur[0]), 0.5 * (pl + pr)));
                if !(margin > 0.0) {
                    failures += 1;
                }
                if worst.as_ref().is_none_or(|w| margin < w.margin || margin.is_nan()) {
                    worst = Some(SplittingPair {
                        left: ul,
                        right: ur,
                        bx,
                        lambda,
                        margin,
                    });
                }
            }
            (failures, redraws, worst)
        })
        .collect();

    let mut report = SplittingReport {
        system,
        samples,
        seed,
        lambda_scale,
        failures: 0,
        redraws: 0,
        worst: None,
    };
    // merged in chunk order so the result does not depend on scheduling
    for (f, r, w) in per_chunk {
        report.failures += f;
        report.redraws += r;
        if let Some(w) = w {
            if report.worst.as_ref().is_none_or(|cur| w.margin < cur.margin) {
                report.worst = Some(w);
            }
        }
    }
    report
}

/// Burgers splitting state for the pair `(u_L, u_R)` with
/// `λ = scale · max(|u_L|, |u_R|)`, exactly.
pub fn burgers_splitting_state(ul: f64, ur: f64, lambda_scale: f64) -> BigRational {
    let (a, b) = (q(ul), q(ur));
    let lambda = q(lambda_scale * ul.abs().max(ur.abs()));
    let flux = |u: &BigRational| u * u * half();
    (&a + &b) * half() - (flux(&b) - flux(&a)) / (lambda * BigRational::from_integer(2.into()))
}

/// Scan the family `u_L = 2`, `u_R = r ∈ [−1, 2]` on `points` equally spaced
/// values of `r`; returns the `(r, splitting state)` pairs that leave
/// `[min(u_L, r), max(u_L, r)]`.
pub fn burgers_family_violations(lambda_scale: f64, points: usize) -> Vec<(f64, f64)> {
    let ul = 2.0;
    (0..points)
        .filter_map(|k| {
            let r = -1.0 + 3.0 * k as f64 / (points - 1).max(1) as f64;
            let s = burgers_splitting_state(ul, r, lambda_scale);
            let (lo, hi) = (q(ul.min(r)), q(ul.max(r)));
            (s < lo || s > hi).then(|| (r, s.to_f64().unwrap_or(f64::NAN)))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// randomized property checks of the variable maps and the scaling limiter

/// Outcome of a randomized property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    pub failures: usize,
    /// Largest relative error seen; zero for pure domain checks.
    pub max_error: f64,
    /// Smallest domain margin of the produced states.
    pub min_margin: f64,
    pub first_failure: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} samples (seed {}), {} failures, max relative error {:.3e}, min margin {:.3e}",
            self.name, self.samples, self.seed, self.failures, self.max_error, self.min_margin
        )
    }
}

#[derive(Default)]
struct Tally {
    failures: usize,
    max_error: f64,
    min_margin: f64,
    first_failure: Option<(usize, String)>,
}

impl Tally {
    fn new() -> Self {
        Self {
            min_margin: f64::INFINITY,
            ..Self::default()
        }
    }

    fn record(&mut self, index: usize, error: f64, margin: f64, ok: bool, describe: impl FnOnce() -> String) {
        self.max_error = self.max_error.max(error);
        self.min_margin = self.min_margin.min(margin);
        if !ok {
            self.failures += 1;
            if self.first_failure.as_ref().is_none_or(|(k, _)| index < *k) {
                self.first_failure = Some((index, describe()));
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.failures += other.failures;
        self.max_error = self.max_error.max(other.max_error);
        self.min_margin = self.min_margin.min(other.min_margin);
        if let Some((k, s)) = other.first_failure {
            if self.first_failure.as_ref().is_none_or(|(j, _)| k < *j) {
                self.first_failure = Some((k, s));
            }
        }
        self
    }
}

/// Run `check(rng, index, tally)` for every sample on seed-partitioned
/// streams and merge in chunk order.
fn sample_property<F>(name: &str, samples: usize, seed: u64, check: F) -> PropertyReport
where
    F: Fn(&mut ChaCha8Rng, usize, &mut Tally) + Sync,
{
    let tally = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let mut t = Tally::new();
            for k in chunk * CHUNK..samples.min((chunk + 1) * CHUNK) {
                check(&mut rng, k, &mut t);
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    PropertyReport {
        name: name.to_string(),
        samples,
        seed,
        failures: tally.failures,
        max_error: tally.max_error,
        min_margin: tally.min_margin,
        first_failure: tally.first_failure.map(|(_, s)| s),
    }
}

/// `Ψ⁻¹(W)` for `W` with entries uniform in `[−w_max, w_max]` must be
/// strictly inside the domain. For MHD `B_x` is drawn in the same range.
pub fn check_transform_domain(system: SplittingSystem, samples: usize, seed: u64, w_max: f64) -> PropertyReport {
    let name = match system {
        SplittingSystem::Euler { .. } => "euler transform domain",
        SplittingSystem::Mhd { .. } => "mhd transform domain",
    };
    sample_property(name, samples, seed, |rng, k, t| {
        let mut draw = || rng.random_range(-w_max..=w_max);
        let (u, dom) = match system {
            SplittingSystem::Euler { gamma } => {
                let w = State::<3>::from_fn(|_, _| draw());
                let u = Euler::new(gamma).from_transformed(&w);
                (u.as_slice().to_vec(), DomainSpec::Euler { gamma })
            }
            SplittingSystem::Mhd { gamma } => {
                let bx = draw();
                let w = State::<7>::from_fn(|_, _| draw());
                let u = Mhd::new(gamma, bx).from_transformed(&w);
                (u.as_slice().to_vec(), DomainSpec::Mhd { gamma, bx })
            }
        };
        let m = dom.margin(&u);
        t.record(k, 0.0, m, m > 0.0, || format!("sample {k}: U = {u:?}"));
    })
}

/// Largest componentwise relative error of `b` against `a`.
fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() / x.abs() })
        .fold(0.0, f64::max)
}

/// `Ψ⁻¹(Ψ(U))` against `U` for admissible states with `ρ, p` log-uniform in
/// `[1e-3, 1e3]`, velocities and fields uniform in `[−10, 10]`.
pub fn check_transform_round_trip(system: SplittingSystem, samples: usize, seed: u64, tolerance: f64) -> PropertyReport {
    let name = match system {
        SplittingSystem::Euler { .. } => "euler transform round trip",
        SplittingSystem::Mhd { .. } => "mhd transform round trip",
    };
    sample_property(name, samples, seed, |rng, k, t| {
        let rho = log_uniform(rng, (1e-3, 1e3));
        let p = log_uniform(rng, (1e-3, 1e3));
        let mut draw = || rng.random_range(-10.0..=10.0);
        let (u, back) = match system {
            SplittingSystem::Euler { gamma } => {
                let e = Euler::new(gamma);
                let u = e.from_primitive(&State::<3>::new(rho, draw(), p));
                let back = e.to_transformed(&u).map(|w| e.from_transformed(&w));
                (u.as_slice().to_vec(), back.map(|b| b.as_slice().to_vec()))
            }
            SplittingSystem::Mhd { gamma } => {
                let bx = draw();
                let m = Mhd::new(gamma, bx);
                let u = m.from_primitive(&State::<7>::from([rho, draw(), draw(), draw(), draw(), draw(), p]));
                let back = m.to_transformed(&u).map(|w| m.from_transformed(&w));
                (u.as_slice().to_vec(), back.map(|b| b.as_slice().to_vec()))
            }
        };
        match back {
            Ok(b) => {
                let err = relative_error(&u, &b);
                t.record(k, err, f64::INFINITY, err <= tolerance, || {
                    format!("sample {k}: U = {u:?}, round trip {b:?}, error {err:.3e}")
                });
            }
            Err(e) => t.record(k, f64::INFINITY, f64::INFINITY, false, || format!("sample {k}: {e}")),
        }
    })
}

/// Which limiter the limiter check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimiterCase {
    /// Random intervals `G`; averages and traces uniform in `G`.
    Scalar,
    /// Averages and traces drawn like the splitting sampler's states.
    Euler { gamma: f64 },
    Mhd { gamma: f64 },
}

/// Feed random admissible `(Ū, u_j, u_{j+1})` with the midpoint from the
/// average decomposition into the scaling limiter; the limited triple must
/// reproduce `Ū` through `(u_L + 4 u_M + u_R)/6` to `tolerance` (relative to
/// the largest input magnitude per component) and lie in the domain.
pub fn check_limiter(case: LimiterCase, samples: usize, seed: u64, tolerance: f64) -> PropertyReport {
    let ranges = SamplingRanges::default();
    let name = match case {
        LimiterCase::Scalar => "scalar limiter",
        LimiterCase::Euler { .. } => "euler limiter",
        LimiterCase::Mhd { .. } => "mhd limiter",
    };
    sample_property(name, samples, seed, |rng, k, t| match case {
        LimiterCase::Scalar => {
            let min = rng.random_range(-10.0..=10.0);
            let max = min + log_uniform(rng, (1e-3, 1e3));
            let mut draw = || rng.random_range(min..=max);
            let (avg, uj, uj1) = (draw(), draw(), draw());
            let sys = Advection::new(ScalarBounds::new(min, max).expect("bounds"));
            let s = |x: f64| State::<1>::new(x);
            check_triple(&sys, DomainSpec::Interval { min, max }, [s(avg), s(uj), s(uj1)], k, tolerance, t);
        }
        LimiterCase::Euler { gamma } => {
            let sys = SplittingSystem::Euler { gamma };
            let mut state = || loop {
                if let Some((u, _)) = draw_state(rng, sys, &ranges, 0.0) {
                    break State::<3>::from_column_slice(&u);
                }
            };
            let triple = [state(), state(), state()];
            check_triple(&Euler::new(gamma), DomainSpec::Euler { gamma }, triple, k, tolerance, t);
        }
        LimiterCase::Mhd { gamma } => {
            let bx = signed_field(rng, ranges.field);
            let sys = SplittingSystem::Mhd { gamma };
            let mut state = || loop {
                if let Some((u, _)) = draw_state(rng, sys, &ranges, bx) {
                    break State::<7>::from_column_slice(&u);
                }
            };
            let triple = [state(), state(), state()];
            check_triple(&Mhd::new(gamma, bx), DomainSpec::Mhd { gamma, bx }, triple, k, tolerance, t);
        }
    })
}

fn check_triple<S: EquationSystem<D>, const D: usize>(
    system: &S,
    dom: DomainSpec,
    [avg, uj, uj1]: [State<D>; 3],
    k: usize,
    tolerance: f64,
    t: &mut Tally,
) {
    let mid = avg * 1.5 - (uj + uj1) * 0.25;
    let floors = system.floors(std::slice::from_ref(&avg), crate::systems::Floors::DEFAULT_CAP);
    let limited = match idp_limit(system, &avg, &uj, &mid, &uj1, &floors) {
        Ok(l) => l,
        Err(e) => return t.record(k, f64::INFINITY, f64::NAN, false, || format!("sample {k}: {e}")),
    };
    let decomposed = (limited.left + limited.mid * 4.0 + limited.right) / 6.0;
    let err = (0..D)
        .map(|c| {
            let scale = [avg[c], uj[c], mid[c], uj1[c]].iter().fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()));
            (decomposed[c] - avg[c]).abs() / scale
        })
        .fold(0.0, f64::max);
    let margin = [limited.left, limited.mid, limited.right]
        .iter()
        .map(|u| dom.margin(u.as_slice()))
        .fold(f64::INFINITY, f64::min);
    t.record(k, err, margin, err <= tolerance && dom.contains(limited.left.as_slice()) && dom.contains(limited.mid.as_slice()) && dom.contains(limited.right.as_slice()), || {
        format!(
            "sample {k}: avg {:?}, traces {:?} {:?}, theta {}, error {err:.3e}, margin {margin:.3e}",
            avg.as_slice(),
            uj.as_slice(),
            uj1.as_slice(),
            limited.theta
        )
    });
}

// ---------------------------------------------------------------------------
// single-cell counterexample for the plain point-value flux

/// One advection step of a single cell with `Ū = 1 − 2ε/3`, `u_j = 1`,
/// `u_{j+1} = 0` and a constant state 1 on the left, at `Δt/Δx = ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleRecord {
    pub eps: f64,
    pub ratio: f64,
    pub average: f64,
    pub midpoint: f64,
    /// Updated average when the interface fluxes are `f(u_j)`, `f(u_{j+1})`.
    pub continuous_average: f64,
    /// Scaling factor of the limiter on this cell.
    pub theta: f64,
    /// Updated average with upwind fluxes of the limited traces.
    pub idp_average: f64,
}

impl CounterexampleRecord {
    pub fn continuous_in_bounds(&self) -> bool {
        (0.0..=1.0).contains(&self.continuous_average)
    }

    pub fn idp_in_bounds(&self) -> bool {
        (0.0..=1.0).contains(&self.idp_average)
    }
}

pub fn counterexample(eps: f64, ratio: f64) -> Result<CounterexampleRecord> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::Config(format!("need 0 < eps < 1/4, got {eps}")));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Config(format!("need a positive step ratio, got {ratio}")));
    }
    let avg = 1.0 - 2.0 * eps / 3.0;
    let (uj, uj1) = (1.0, 0.0);
    let mid = 1.5 * avg - 0.25 * (uj + uj1);
    // f(u) = u: the flux difference is u_{j+1} − u_j
    let continuous_average = avg - ratio * (uj1 - uj);

    let bounds = ScalarBounds::new(0.0, 1.0)?;
    let limited = idp_limit_scalar(avg, uj, mid, uj1, bounds)?;
    // upwind fluxes: the left neighbor is constant 1 and the velocity is +1
    let inflow = 1.0;
    let outflow = limited.right[0];
    let idp_average = avg - ratio * (outflow - inflow);
    Ok(CounterexampleRecord {
        eps,
        ratio,
        average: avg,
        midpoint: mid,
        continuous_average,
        theta: limited.theta,
        idp_average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limiters::LimitedCellTriple;
    use crate::systems::Floors;

    #[test]
    fn predicates() {
        let s = DomainSpec::Interval { min: 0.0, max: 1.0 };
        assert!(s.contains(&[0.0]) && s.contains(&[1.0]) && !s.contains(&[1.0 + 1e-16 * 2.0]));
        assert!(!s.contains(&[f64::NAN]));
        let e = DomainSpec::Euler { gamma: 1.4 };
        assert!(e.contains(&[1.0, 0.0, 2.5]));
        assert!(!e.contains(&[1.0, 0.0, 0.0]));
        assert!(!e.contains(&[-1.0, 0.0, 2.5]));
        // E = ½ρv² exactly: zero pressure is outside
        assert!(!e.contains(&[2.0, 2.0, 1.0]));
    }

    #[test]
    fn planted_negative_pressure_is_located() {
        let e = Euler::new(1.4);
        let mut sweep = DomainSweep::new(e);
        let good = e.from_primitive(&State::<3>::new(1.0, 0.0, 1.0));
        let mut averages = vec![good; 5];
        averages[3] = State::<3>::new(1.0, 0.0, -0.1);
        let w = e.to_transformed(&good).unwrap();
        let field = DofField {
            averages,
            points: vec![w; 6],
        };
        sweep.check_field(7, Some(2), &field);
        let report = sweep.into_report();
        assert_eq!(report.total, 1);
        let v = &report.violations[0];
        assert_eq!((v.step, v.stage, v.location, v.kind), (7, Some(2), Location::Cell(3), ValueKind::Average));
        assert!(v.margin < 0.0);
        assert_eq!(report.checked, 11);
    }

    #[test]
    fn triples_are_checked() {
        let a = Advection::new(ScalarBounds::new(0.0, 1.0).unwrap());
        let mut sweep = DomainSweep::new(a);
        let s = |x: f64| State::<1>::new(x);
        let report = StageReport {
            triples: vec![
                LimitedCellTriple::identity(s(0.5), s(0.5), s(0.5)),
                LimitedCellTriple::identity(s(1.0), s(1.25), s(0.0)),
            ],
            floors: Floors::zero(),
            idp_active: 0,
            oe_active: 0,
            mp_active: 0,
            clipped_points: 0,
        };
        sweep.check_triples(1, 0, &report);
        let r = sweep.into_report();
        assert_eq!(r.total, 1);
        assert_eq!((r.violations[0].location, r.violations[0].kind), (Location::Cell(1), ValueKind::Midpoint));
    }

    #[test]
    fn exact_flux_agrees_with_system_flux() {
        let e = Euler::new(1.4);
        let u = e.from_primitive(&State::<3>::new(0.7, -1.3, 2.1));
        let uq: Vec<_> = u.iter().map(|&x| q(x)).collect();
        let f = exact_flux(&uq, &q(1.4), None);
        for (a, b) in f.iter().zip(e.flux(&u).iter()) {
            assert!((a.to_f64().unwrap() - b).abs() < 1e-13 * b.abs().max(1.0));
        }
        let m = Mhd::new(5.0 / 3.0, 0.75);
        let u = m.from_primitive(&State::<7>::from([0.9, 0.3, -0.2, 0.1, 1.1, -0.4, 0.8]));
        let uq: Vec<_> = u.iter().map(|&x| q(x)).collect();
        let f = exact_flux(&uq, &q(5.0 / 3.0), Some(&q(0.75)));
        for (a, b) in f.iter().zip(m.flux(&u).iter()) {
            assert!((a.to_f64().unwrap() - b).abs() < 1e-13 * b.abs().max(1.0));
        }
    }

    #[test]
    fn identical_states_split_to_themselves() {
        let e = Euler::new(1.4);
        let u = e.from_primitive(&State::<3>::new(0.3, 4.0, 1e-5));
        let star = exact_splitting_state(u.as_slice(), u.as_slice(), 1.0, 1.4, None);
        for (a, b) in star.iter().zip(u.iter()) {
            assert_eq!(*a, q(*b));
        }
    }

    #[test]
    fn small_samples_pass_and_are_deterministic() {
        let r = SamplingRanges::default();
        let a = sample_lf_splitting(SplittingSystem::Euler { gamma: 1.4 }, 3000, 42, 1.0, &r);
        assert!(a.passed(), "{a:?}");
        let b = sample_lf_splitting(SplittingSystem::Euler { gamma: 1.4 }, 3000, 42, 1.0, &r);
        assert_eq!(a, b);
        let m = sample_lf_splitting(SplittingSystem::Mhd { gamma: 5.0 / 3.0 }, 2000, 7, 1.0, &r);
        assert!(m.passed(), "{m:?}");
    }

    #[test]
    fn dyadic_and_rational_routes_agree() {
        // the sampler's polynomial form against the direct rational formula
        let r = SamplingRanges::default();
        for (system, bx) in [
            (SplittingSystem::Euler { gamma: 1.4 }, None),
            (SplittingSystem::Mhd { gamma: 5.0 / 3.0 }, Some(0.37)),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let b = bx.unwrap_or(0.0);
            let mut checked = 0;
            while checked < 50 {
                let (Some((ul, _)), Some((ur, _))) = (draw_state(&mut rng, system, &r, b), draw_state(&mut rng, system, &r, b))
                else {
                    continue;
                };
                for scale in [0.05, 0.3, 1.0] {
                    let lambda = scale * pair_speed(system, &ul, &ur, b);
                    let star = exact_splitting_state(&ul, &ur, lambda, system_gamma(system), bx);
                    let rational_ok = exact_splitting_admissible(&ul, &ur, lambda, system_gamma(system), bx);
                    let margin = splitting_margin(&ul, &ur, lambda, system_gamma(system), bx, (1.0, 1.0));
                    assert_eq!(rational_ok, margin > 0.0, "{ul:?} {ur:?} {lambda}");
                    let (v, d) = scaled_splitting_state(&ul, &ur, lambda, system_gamma(system), bx);
                    for (a, b) in v.iter().zip(&star) {
                        let (x, y) = (ratio(a, &d), b.to_f64().unwrap());
                        assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-300), "{x} vs {y}");
                    }
                }
                checked += 1;
            }
        }
    }

    fn system_gamma(s: SplittingSystem) -> f64 {
        match s {
            SplittingSystem::Euler { gamma } | SplittingSystem::Mhd { gamma } => gamma,
        }
    }

    #[test]
    fn burgers_family() {
        // u_L = 2, u_R = 1 with λ halved to 1: (3/2) − (1/2 − 2)/2 = 2.25
        assert_eq!(burgers_splitting_state(2.0, 1.0, 0.5), q(2.25));
        assert!(burgers_family_violations(1.0, 301).is_empty());
        let v = burgers_family_violations(0.5, 301);
        assert!(!v.is_empty());
        assert!(v.iter().any(|&(r, s)| r == 1.0 && s == 2.25));
    }

    #[test]
    fn counterexample_values() {
        let c = counterexample(0.1, 1.0 / 6.0).unwrap();
        assert!((c.continuous_average - 1.1).abs() < 1e-12);
        assert!((c.midpoint - 1.15).abs() < 1e-12);
        assert!((c.theta - 0.307_692_307_692_307_7).abs() < 1e-12);
        assert!(c.idp_in_bounds() && !c.continuous_in_bounds());
        let c = counterexample(0.24, 1.0 / 6.0).unwrap();
        assert!((c.continuous_average - (1.0 - 0.16 + 1.0 / 6.0)).abs() < 1e-12);
        assert!(c.continuous_average > 1.0);
        // at Δt/Δx = 2ε/3 the plain update lands on the bound
        let c = counterexample(0.15, 0.1).unwrap();
        assert!((c.continuous_average - 1.0).abs() < 1e-15);
        assert!(counterexample(0.3, 0.1).is_err());
    }
}
