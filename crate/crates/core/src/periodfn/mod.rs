//! Period functions of the closed orbits of the reduced profile equation.
//!
//! Sign-changing orbits are parametrized by their `y`-intercept `ν` and
//! positive orbits by their left `w`-intercept `μ`. Periods are measured by
//! event timing, and for sign-changing orbits also by an angular quadrature
//! of the quarter orbit; the two are cross-checked.

pub mod p1;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nlparams::{Nonlinearity, ReducedParams};
use crate::numerics::{brent, integrate, MonotoneCubic, QuadConfig};
use crate::odeint::{integrate as ode, integrate_grid, Direction, Event, IntegratorConfig};
use crate::vfield::{field_wy, PhasePoint};

pub use p1::{admissible_interval, p1_period_event, p1_period_quadrature, tbar_p1, TbarP1};

/// Longest time span searched for an axis crossing.
const T_MAX: f64 = 1e7;
/// Time samples per quarter orbit feeding the angular quadrature.
const QUARTER_KNOTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodMethod {
    EventTiming,
    Quadrature,
}

/// A period measurement by one method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub method: PeriodMethod,
    pub period: f64,
    pub est_error: f64,
}

/// Least period of one closed orbit. `amplitude` is `ν` for sign-changing
/// orbits and `μ` for positive ones; `check` holds the independent second
/// measurement when one was made, and `check_skipped` the reason when the
/// second method does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSample {
    pub amplitude: f64,
    pub period: f64,
    pub method: PeriodMethod,
    pub est_error: f64,
    pub check: Option<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_skipped: Option<String>,
}

impl PeriodSample {
    fn single(amplitude: f64, m: Measurement) -> Self {
        Self {
            amplitude,
            period: m.period,
            method: m.method,
            est_error: m.est_error,
            check: None,
            check_skipped: None,
        }
    }

    /// Whether the two measurements agree within ten times their combined
    /// error estimate (trivially true with a single measurement).
    pub fn methods_agree(&self) -> bool {
        match self.check {
            None => true,
            Some(c) => (c.period - self.period).abs() <= 10.0 * (c.est_error + self.est_error),
        }
    }
}

/// A limit that is either a finite number or divergent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Limit {
    Finite(f64),
    Infinite,
}

impl Limit {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            Limit::Finite(v) => Some(v),
            Limit::Infinite => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Limits of a period function at the two ends of its amplitude range, with
/// tags naming the formulas used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodLimits {
    pub at_zero: Limit,
    pub at_upper: Limit,
    pub formulas: Vec<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitKind {
    SignChanging,
    Positive,
}

fn require_p_gt_1(rp: &ReducedParams) -> Result<()> {
    if rp.p > 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("requires p > 1, got p = {}", rp.p)))
    }
}

fn cartesian<'a>(rp: &'a ReducedParams, nl: &'a dyn Nonlinearity) -> impl FnMut(f64, &[f64; 2]) -> Result<[f64; 2]> + 'a {
    move |_, s| field_wy(PhasePoint { w: s[0], y: s[1] }, rp, nl).map(|e| e.value)
}

/// Time from `(0, ν)` to the first `y = 0` crossing.
fn quarter_time(nu: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<(f64, [f64; 2])> {
    let ev = [Event::new("y=0", |_, s: &[f64; 2]| s[1]).direction(Direction::Falling).terminal()];
    let tr = ode(cartesian(rp, nl), 0.0, [0.0, nu], T_MAX, &ev, cfg)?;
    tr.events
        .first()
        .map(|e| (e.t, e.state))
        .ok_or_else(|| Error::NoCrossing(format!("orbit through (0, {nu}) never reaches y = 0")))
}

/// Tolerances relative to the distance from the origin.
fn scaled(cfg: &IntegratorConfig, size: f64) -> IntegratorConfig {
    cfg.with_tol(cfg.rel_tol, cfg.abs_tol.min(cfg.rel_tol * size * 1e-3)).with_radial_norm()
}

/// Event-timing period with an error estimate from a rerun at looser
/// tolerance.
fn timed<F: FnMut(&IntegratorConfig) -> Result<f64>>(mut run: F, cfg: &IntegratorConfig) -> Result<Measurement> {
    let t = run(cfg)?;
    let loose = cfg.with_tol(cfg.rel_tol * 1e3, cfg.abs_tol * 1e3);
    let t_loose = run(&loose)?;
    Ok(Measurement {
        method: PeriodMethod::EventTiming,
        period: t,
        est_error: (t - t_loose).abs() / 999.0 + 4.0 * f64::EPSILON * t,
    })
}

/// Period of the sign-changing orbit through `(0, ν)` by event timing only.
pub fn sign_changing_event_period(nu: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<f64> {
    require_p_gt_1(rp)?;
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("need ν > 0, got {nu}")));
    }
    Ok(4.0 * quarter_time(nu, rp, nl, &scaled(cfg, nu))?.0)
}

/// Least period `T(ν)` of the sign-changing orbit through `(0, ν)`, by event
/// timing, checked against the angular quadrature of the quarter orbit.
pub fn period_sign_changing(nu: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<PeriodSample> {
    require_p_gt_1(rp)?;
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("need ν > 0, got {nu}")));
    }
    let cfg = scaled(cfg, nu);
    let ev = timed(|c| Ok(4.0 * quarter_time(nu, rp, nl, c)?.0), &cfg)?;
    let mut s = PeriodSample::single(nu, ev);
    match quarter_quadrature(nu, ev.period / 4.0, rp, nl, &cfg) {
        Ok(quad) => {
            s.check = Some(Measurement {
                est_error: quad.est_error + ev.est_error,
                ..quad
            })
        }
        Err(e @ (Error::Inconclusive(_) | Error::Quadrature(_))) => s.check_skipped = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(s)
}

/// Angular quadrature `4∫₀^{π/2} (cos²+(p-1)sin²) / ((p-1)sin² - b cos² + (h(w(θ)) - d) cos^p) dθ`
/// with `w(θ)` interpolated along the quarter orbit.
fn quarter_quadrature(
    nu: f64,
    t_quarter: f64,
    rp: &ReducedParams,
    nl: &dyn Nonlinearity,
    cfg: &IntegratorConfig,
) -> Result<Measurement> {
    let grid: Vec<f64> = (0..=QUARTER_KNOTS)
        .map(|i| t_quarter * i as f64 / QUARTER_KNOTS as f64)
        .collect();
    let states = integrate_grid(cartesian(rp, nl), [0.0, nu], &grid, cfg)?;
    let mut theta = Vec::with_capacity(states.len());
    let mut w = Vec::with_capacity(states.len());
    let mut slope = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate().rev() {
        let (wi, yi) = (s[0], if i == QUARTER_KNOTS { 0.0 } else { s[1] });
        let wi = if i == 0 { 0.0 } else { wi };
        let th = yi.atan2(wi);
        let g = field_wy(PhasePoint { w: wi, y: yi }, rp, nl)?.value[1];
        let rho2 = wi * wi + yi * yi;
        let dtheta = (wi * g - yi * yi) / rho2;
        if !(dtheta < 0.0) {
            return Err(Error::Inconclusive(format!("angle not monotone along the quarter orbit near θ = {th}")));
        }
        theta.push(th);
        w.push(wi);
        slope.push(yi / dtheta);
    }
    let p = rp.p;
    let (b, d) = (rp.b, rp.d);
    let run = |stride: usize| -> Result<(f64, f64)> {
        let idx: Vec<usize> = (0..theta.len()).step_by(stride).collect();
        if *idx.last().unwrap() != theta.len() - 1 {
            return Err(Error::GridTooCoarse("knot count incompatible with stride".into()));
        }
        let interp = MonotoneCubic::new(
            idx.iter().map(|&i| theta[i]).collect(),
            idx.iter().map(|&i| w[i]).collect(),
            Some(idx.iter().map(|&i| slope[i]).collect()),
        )?;
        let r = integrate(
            |t| {
                let (s, c) = t.sin_cos();
                let num = c * c + (p - 1.0) * s * s;
                let den = (p - 1.0) * s * s - b * c * c + (nl.h(interp.eval(t)) - d) * c.powf(p);
                num / den
            },
            0.0,
            FRAC_PI_2,
            QuadConfig {
                abs_tol: 1e-12 * t_quarter,
                rel_tol: 1e-12,
                max_intervals: 4000,
            },
        )?;
        Ok((4.0 * r.value, 4.0 * r.error))
    };
    let (full, qerr) = run(1)?;
    let (half, _) = run(2)?;
    Ok(Measurement {
        method: PeriodMethod::Quadrature,
        period: full,
        est_error: (full - half).abs() / 15.0 + qerr,
    })
}

/// Least period `T⁺(μ)` of the positive orbit through `(μ, 0)` (`p > 1`).
pub fn period_positive(mu: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<PeriodSample> {
    require_p_gt_1(rp)?;
    let a = rp
        .stationary_amplitude(nl)
        .ok_or_else(|| Error::Parameter(format!("positive orbits need b + d > 0, got {}", rp.b + rp.d)))?;
    if !(mu > 0.0 && mu < a) {
        return Err(Error::Domain(format!("need 0 < μ < a = {a}, got μ = {mu}")));
    }
    let cfg = scaled(cfg, mu);
    let m = timed(
        |c| {
            let ev = [Event::new("y=0", |_, s: &[f64; 2]| s[1]).direction(Direction::Falling).terminal()];
            let tr = ode(cartesian(rp, nl), 0.0, [mu, 0.0], T_MAX, &ev, c)?;
            let e = tr
                .events
                .first()
                .ok_or_else(|| Error::NoCrossing(format!("orbit through ({mu}, 0) never returns to y = 0")))?;
            Ok(2.0 * e.t)
        },
        &cfg,
    )?;
    Ok(PeriodSample::single(mu, m))
}

/// Least period of a positive orbit when `p = 1`, by quadrature, checked
/// against event timing.
pub fn p1_period(mu: f64, rp: &ReducedParams, cfg: &IntegratorConfig) -> Result<PeriodSample> {
    let t = p1_period_quadrature(mu, rp)?;
    let quad = Measurement {
        method: PeriodMethod::Quadrature,
        period: t,
        est_error: 1e-12 * t,
    };
    let check = timed(|c| p1_period_event(mu, rp, c), cfg)?;
    let mut s = PeriodSample::single(mu, quad);
    s.check = Some(check);
    Ok(s)
}

/// Limit `T_d` of `T(ν)` as `ν → 0`: the period of the orbits of the
/// homogeneous field obtained by dropping the source.
pub fn t_d_limit(rp: &ReducedParams) -> Result<Limit> {
    require_p_gt_1(rp)?;
    let e = rp.energy();
    let below_min = e.minimum().is_some_and(|m| rp.d < m.value);
    let increasing = e.minimum().is_none();
    if !(below_min || (increasing && rp.b + rp.d <= 0.0)) {
        return Err(Error::Parameter(format!(
            "T_d requires b + d <= 0 with E increasing, or d < min E (b = {}, d = {})",
            rp.b, rp.d
        )));
    }
    if rp.b + rp.d == 0.0 {
        return Ok(Limit::Infinite);
    }
    let (p, b, d) = (rp.p, rp.b, rp.d);
    let r = integrate(
        |t| {
            let (s, c) = t.sin_cos();
            (c * c + (p - 1.0) * s * s) / ((p - 1.0) * s * s - b * c * c - d * c.powf(p))
        },
        0.0,
        FRAC_PI_2,
        QuadConfig::abs(1e-13),
    )?;
    Ok(Limit::Finite(4.0 * r.value))
}

/// Closed form of `T_d` when `d = 0`, `b < 0`: `2π((p-1)γ+1) / ((p-1)γ(γ+1))`
/// with `γ = √(|b|/(p-1))`.
pub fn t0_closed(rp: &ReducedParams) -> Result<f64> {
    if !(rp.p > 1.0 && rp.b < 0.0 && rp.d == 0.0) {
        return Err(Error::Parameter(format!(
            "closed form needs p > 1, b < 0, d = 0 (p = {}, b = {}, d = {})",
            rp.p, rp.b, rp.d
        )));
    }
    let k = rp.p - 1.0;
    let g = (-rp.b / k).sqrt();
    Ok(2.0 * PI * (k * g + 1.0) / (k * g * (g + 1.0)))
}

/// Small-amplitude extrapolation of `T(ν)` from `ν` and `ν/2`, assuming
/// `T(ν) - T_d ∝ ν^(q+1-p)`.
pub fn extrapolate_small_amplitude(nu: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<f64> {
    let r = 2f64.powf(rp.q + 1.0 - rp.p);
    let t1 = sign_changing_event_period(nu, rp, nl, cfg)?;
    let t2 = sign_changing_event_period(nu / 2.0, rp, nl, cfg)?;
    Ok((r * t2 - t1) / (r - 1.0))
}

/// End-point limits of the period function of the given orbit family.
pub fn period_limits(kind: OrbitKind, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<PeriodLimits> {
    match kind {
        OrbitKind::SignChanging => {
            require_p_gt_1(rp)?;
            let at_zero = match t_d_limit(rp) {
                Ok(l) => l,
                Err(Error::Parameter(_)) => Limit::Infinite,
                Err(e) => return Err(e),
            };
            let tag = if at_zero == Limit::Infinite { "divergent-small-amplitude" } else { "homogeneous-angular-quadrature" };
            Ok(PeriodLimits {
                at_zero,
                at_upper: Limit::Finite(0.0),
                formulas: vec![tag, "superlinear-large-amplitude"],
            })
        }
        OrbitKind::Positive => {
            let a = rp
                .stationary_amplitude(nl)
                .ok_or_else(|| Error::Parameter("positive orbits need b + d > 0".into()))?;
            let at_upper = Limit::Finite(2.0 * PI / (a * nl.h_prime(a)).sqrt());
            if rp.p == 1.0 {
                let at_zero = if rp.d >= 0.0 {
                    Limit::Finite(p1::period_from_turning(0.0, rp)?)
                } else {
                    Limit::Infinite
                };
                Ok(PeriodLimits {
                    at_zero,
                    at_upper,
                    formulas: vec!["unit-slope-boundary-quadrature", "linearization-at-stationary-point"],
                })
            } else {
                Ok(PeriodLimits {
                    at_zero: Limit::Infinite,
                    at_upper,
                    formulas: vec!["homoclinic-divergence", "linearization-at-stationary-point"],
                })
            }
        }
    }
}

/// Period of one orbit of the given family.
pub fn period_of(kind: OrbitKind, amplitude: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<PeriodSample> {
    match kind {
        OrbitKind::SignChanging => period_sign_changing(amplitude, rp, nl, cfg),
        OrbitKind::Positive if rp.p == 1.0 => p1_period(amplitude, rp, cfg),
        OrbitKind::Positive => period_positive(amplitude, rp, nl, cfg),
    }
}

/// Period alone, by the cheapest reliable method.
fn fast_period(kind: OrbitKind, amplitude: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<f64> {
    match kind {
        OrbitKind::SignChanging => sign_changing_event_period(amplitude, rp, nl, cfg),
        OrbitKind::Positive if rp.p == 1.0 => p1_period_quadrature(amplitude, rp),
        OrbitKind::Positive => Ok(period_positive(amplitude, rp, nl, cfg)?.period),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    NonMonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodScan {
    pub kind: OrbitKind,
    pub samples: Vec<PeriodSample>,
    pub verdict: Monotonicity,
    /// Largest step against the overall trend (`0` when strictly monotone).
    pub max_violation: f64,
}

/// Relative spread below which a scan is reported constant.
pub const CONSTANT_SPREAD: f64 = 1e-8;

/// Monotonicity verdict for periods listed in amplitude order.
pub fn monotonicity(periods: &[f64]) -> (Monotonicity, f64) {
    if periods.len() < 2 {
        return (Monotonicity::Constant, 0.0);
    }
    let hi = periods.iter().cloned().fold(f64::MIN, f64::max);
    let lo = periods.iter().cloned().fold(f64::MAX, f64::min);
    if hi - lo <= CONSTANT_SPREAD * hi.abs() {
        return (Monotonicity::Constant, 0.0);
    }
    let trend = (periods[periods.len() - 1] - periods[0]).signum();
    let violation = periods
        .windows(2)
        .map(|w| (-(w[1] - w[0]) * trend).max(0.0))
        .fold(0.0, f64::max);
    let strict = periods.windows(2).all(|w| (w[1] - w[0]) * trend > 0.0);
    let verdict = match (strict, trend > 0.0) {
        (false, _) => Monotonicity::NonMonotone,
        (true, true) => Monotonicity::Increasing,
        (true, false) => Monotonicity::Decreasing,
    };
    (verdict, violation)
}

/// Evaluates the period function on `grid` (in parallel) and classifies its
/// monotonicity.
pub fn period_scan(kind: OrbitKind, grid: &[f64], rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<PeriodScan> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("amplitude grid must increase strictly".into()));
    }
    let samples = parallel_map(grid, |&a| period_of(kind, a, rp, nl, cfg))?;
    let periods: Vec<f64> = samples.iter().map(|s| s.period).collect();
    let (verdict, max_violation) = monotonicity(&periods);
    Ok(PeriodScan {
        kind,
        samples,
        verdict,
        max_violation,
    })
}

/// Maps `f` over `items` on scoped worker threads, preserving order.
pub fn parallel_map<T: Sync, R: Send, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    F: Fn(&T) -> Result<R> + Sync,
{
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    let f = &f;
    let parts: Vec<Result<Vec<R>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(f).collect::<Result<Vec<R>>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("period worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Amplitudes whose orbits have least period `target`.
///
/// Sign-changing periods decrease in `ν`, so there is at most one root,
/// found by bracketing in `ln ν`. Positive periods are scanned over the
/// amplitude interval and every sign change is refined.
pub fn find_amplitude_for_period(
    target: f64,
    kind: OrbitKind,
    rp: &ReducedParams,
    nl: &dyn Nonlinearity,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Domain(format!("target period must be positive and finite, got {target}")));
    }
    match kind {
        OrbitKind::SignChanging => Ok(vec![sign_changing_root(target, rp, nl, cfg)?]),
        OrbitKind::Positive => positive_roots(target, rp, nl, cfg),
    }
}

fn sign_changing_root(target: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<f64> {
    let sup = period_limits(OrbitKind::SignChanging, rp, nl)?.at_zero;
    if let Limit::Finite(td) = sup {
        if target >= td {
            return Err(Error::OutOfRange { target, lo: 0.0, hi: td });
        }
    }
    let g = |x: f64| fast_period(OrbitKind::SignChanging, x.exp(), rp, nl, cfg).map(|t| t - target);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let g0 = g(0.0)?;
    if g0 > 0.0 {
        let mut tv = g0 + target;
        while g(hi)? > 0.0 {
            lo = hi;
            hi += 2.0;
            if hi > 120.0 {
                return Err(Error::OutOfRange { target, lo: tv, hi: sup.as_f64() });
            }
            tv = g(hi)? + target;
        }
    } else {
        let mut tv = g0 + target;
        while g(lo)? < 0.0 {
            hi = lo;
            lo -= 2.0;
            if lo < -120.0 {
                return Err(Error::OutOfRange { target, lo: 0.0, hi: tv });
            }
            tv = g(lo)? + target;
        }
    }
    if lo == hi {
        return Ok(lo.exp());
    }
    let mut failure = None;
    let x = brent(
        |x| match g(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-14,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(x?.exp())
}

/// Scan grid over `(lo, hi)`: clustered geometrically toward both ends.
fn positive_grid(lo: f64, hi: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..=40).map(|i| i as f64 / 41.0).collect();
    for k in 2..=8 {
        let e = 10f64.powi(-k);
        xs.push(e);
        xs.push(1.0 - e);
    }
    xs.sort_by(f64::total_cmp);
    xs.into_iter().map(|x| lo + (hi - lo) * x).filter(|&m| m > lo && m < hi).collect()
}

fn positive_roots(target: f64, rp: &ReducedParams, nl: &dyn Nonlinearity, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let (lo, hi) = if rp.p == 1.0 {
        admissible_interval(rp)?
    } else {
        let a = rp
            .stationary_amplitude(nl)
            .ok_or_else(|| Error::Parameter("positive orbits need b + d > 0".into()))?;
        (0.0, a)
    };
    let mut grid = positive_grid(lo, hi);
    let mut periods = parallel_map(&grid, |&m| fast_period(OrbitKind::Positive, m, rp, nl, cfg))?;
    // Extend geometrically toward μ = 0 until the target is exceeded.
    if lo == 0.0 && periods.iter().all(|&t| t < target) && period_limits(OrbitKind::Positive, rp, nl)?.at_zero == Limit::Infinite {
        let mut mu = grid[0];
        while periods[0] < target {
            mu *= 1e-8;
            if mu < 1e-290 * hi {
                break;
            }
            grid.insert(0, mu);
            periods.insert(0, fast_period(OrbitKind::Positive, mu, rp, nl, cfg)?);
        }
    }
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (f0, f1) = (periods[i] - target, periods[i + 1] - target);
        if f0 == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if f0 * f1 < 0.0 {
            let mut failure = None;
            let r = brent(
                |m| match fast_period(OrbitKind::Positive, m, rp, nl, cfg) {
                    Ok(t) => t - target,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                grid[i],
                grid[i + 1],
                1e-14 * grid[i + 1],
            );
            if let Some(e) = failure {
                return Err(e);
            }
            roots.push(r?);
        }
    }
    if roots.is_empty() {
        let pmin = periods.iter().cloned().fold(f64::INFINITY, f64::min);
        let pmax = periods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::OutOfRange { target, lo: pmin, hi: pmax });
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlparams::{reduce, Power, ProblemParams};

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default().with_tol(1e-11, 1e-13)
    }

    fn duffing() -> (ReducedParams, Power) {
        let rp = reduce(&ProblemParams::new(2.0, 3.0, 0.0).unwrap());
        (rp, rp.nonlinearity())
    }

    #[test]
    fn duffing_reduces_to_unit_linear_part() {
        let (rp, _) = duffing();
        assert!((rp.b + 1.0).abs() < 1e-14 && rp.d == 0.0);
    }

    #[test]
    fn duffing_period_matches_energy_quadrature() {
        let (rp, nl) = duffing();
        let s = period_sign_changing(1.0, &rp, &nl, &cfg()).unwrap();
        // y² = 1 - w² - w⁴/2 on the orbit; w = A sin φ removes the endpoint singularity.
        let a = (3f64.sqrt() - 1.0).sqrt();
        let oracle = 4.0
            * integrate(
                |phi| {
                    let w = a * phi.sin();
                    a * phi.cos() / (1.0 - w * w - 0.5 * w.powi(4)).sqrt()
                },
                0.0,
                FRAC_PI_2,
                QuadConfig::abs(1e-14),
            )
            .unwrap()
            .value;
        assert!((s.period - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", s.period);
        let q = s.check.unwrap();
        assert!((q.period - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", q.period);
        assert!(s.methods_agree());
    }

    #[test]
    fn duffing_small_amplitude_is_harmonic() {
        let (rp, nl) = duffing();
        let t = sign_changing_event_period(1e-4, &rp, &nl, &cfg()).unwrap();
        assert!((t - 2.0 * PI).abs() < 1e-6);
        assert!((extrapolate_small_amplitude(1e-2, &rp, &nl, &cfg()).unwrap() - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn limit_period_values() {
        let rp = ReducedParams::new(2.0, 3.0, -1.0, 0.0).unwrap();
        assert!((t_d_limit(&rp).unwrap().as_f64() - 2.0 * PI).abs() < 1e-12);
        let rp = ReducedParams::new(3.0, 5.0, -3.0, 0.0).unwrap();
        let closed = t0_closed(&rp).unwrap();
        assert!((closed - 3.977).abs() < 1e-3, "{closed}");
        assert!((t_d_limit(&rp).unwrap().as_f64() - closed).abs() < 1e-8);
        let rp = ReducedParams::new(2.0, 3.0, -4.0, 0.0).unwrap();
        assert!((t0_closed(&rp).unwrap() - PI).abs() < 1e-14);
        let rp = ReducedParams::new(3.0, 5.0, -1.0, 1.0).unwrap();
        assert_eq!(t_d_limit(&rp).unwrap(), Limit::Infinite);
        let rp = ReducedParams::new(3.0, 5.0, 1.0, 1.0).unwrap();
        assert!(matches!(t_d_limit(&rp), Err(Error::Parameter(_))));
    }

    #[test]
    fn positive_period_small_oscillation_limit() {
        let rp = ReducedParams::new(3.0, 5.0, 1.0, 0.5).unwrap();
        let nl = rp.nonlinearity();
        let a = rp.stationary_amplitude(&nl).unwrap();
        let s = period_positive(a * (1.0 - 1e-4), &rp, &nl, &cfg()).unwrap();
        let lim = 2.0 * PI / ((rp.q + 1.0 - rp.p) * (rp.b + rp.d)).sqrt();
        assert!((s.period - lim).abs() < 1e-3 * lim, "{} vs {lim}", s.period);
        assert!(period_positive(a, &rp, &nl, &cfg()).is_err());
    }

    #[test]
    fn monotonicity_verdicts() {
        assert_eq!(monotonicity(&[3.0, 2.0, 1.0]).0, Monotonicity::Decreasing);
        assert_eq!(monotonicity(&[1.0, 2.0, 3.0]).0, Monotonicity::Increasing);
        assert_eq!(monotonicity(&[1.0, 1.0 + 1e-12]).0, Monotonicity::Constant);
        let (v, viol) = monotonicity(&[3.0, 2.0, 2.5, 1.0]);
        assert_eq!(v, Monotonicity::NonMonotone);
        assert!((viol - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sign_changing_round_trip() {
        let (rp, nl) = duffing();
        let t1 = sign_changing_event_period(1.0, &rp, &nl, &cfg()).unwrap();
        let nu = find_amplitude_for_period(t1, OrbitKind::SignChanging, &rp, &nl, &cfg()).unwrap();
        assert_eq!(nu.len(), 1);
        assert!((nu[0] - 1.0).abs() < 1e-8, "{nu:?}");
    }

    #[test]
    fn out_of_range_targets() {
        let rp = ReducedParams::new(2.0, 3.0, -1.0, -0.5).unwrap();
        let nl = rp.nonlinearity();
        let err = find_amplitude_for_period(10.0, OrbitKind::SignChanging, &rp, &nl, &cfg()).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }), "{err:?}");
        let rp = ReducedParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let err = find_amplitude_for_period(100.0, OrbitKind::Positive, &rp, &nl, &cfg()).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }), "{err:?}");
    }

    #[test]
    fn p1_root_for_half_period() {
        let rp = ReducedParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let roots = find_amplitude_for_period(PI, OrbitKind::Positive, &rp, &rp.nonlinearity(), &cfg()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((p1_period_quadrature(roots[0], &rp).unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn p1_limits() {
        let rp = ReducedParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let l = period_limits(OrbitKind::Positive, &rp, &rp.nonlinearity()).unwrap();
        assert!((l.at_zero.as_f64() - tbar_p1(1.0).unwrap().angle_form).abs() < 1e-12);
        assert!((l.at_upper.as_f64() - 2.0 * PI / 2f64.sqrt()).abs() < 1e-12);
        let rp = ReducedParams::new(1.0, 1.0, 1.0, -0.5).unwrap();
        assert_eq!(period_limits(OrbitKind::Positive, &rp, &rp.nonlinearity()).unwrap().at_zero, Limit::Infinite);
    }
}
