//! Adaptive Dormand-Prince 5(4) integration with dense output and event
//! detection.
//!
//! The integrator is chart-agnostic: it advances any `N`-dimensional
//! autonomous or time-dependent field. Fields report failures through
//! [`Result`]; a failed evaluation during a trial step shrinks the step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::brent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub event_tol: f64,
    /// Scale every component's error by the Euclidean norm of the state
    /// instead of by the component itself.
    pub radial_norm: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            event_tol: 1e-12,
            radial_norm: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.event_tol > 0.0
            && self.max_step > 0.0
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid integrator configuration {self:?}")))
        }
    }

    /// Same configuration with tighter or looser tolerances.
    pub fn with_tol(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_radial_norm(mut self) -> Self {
        self.radial_norm = true;
        self
    }

    fn scale<const N: usize>(&self, a: &[f64; N], b: &[f64; N], i: usize) -> f64 {
        let mag = if self.radial_norm {
            let r = |v: &[f64; N]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            r(a).max(r(b))
        } else {
            a[i].abs().max(b[i].abs())
        };
        self.abs_tol + self.rel_tol * mag
    }
}

/// Coordinate chart a trajectory lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    Cartesian,
    Polar,
    Slope,
    Regularized,
    Other,
}

/// Which sign changes of a monitor count as events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

impl Direction {
    fn accepts(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Either => rising || falling,
        }
    }
}

type Monitor<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// A scalar monitor whose sign changes are recorded as events.
pub struct Event<'a, const N: usize> {
    pub kind: &'static str,
    pub monitor: Monitor<'a, N>,
    pub direction: Direction,
    /// Stop the integration at the first occurrence.
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(kind: &'static str, monitor: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Self {
            kind,
            monitor: Box::new(monitor),
            direction: Direction::Either,
            terminal: false,
        }
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord<const N: usize> {
    pub t: f64,
    pub kind: &'static str,
    #[serde(with = "array_serde")]
    pub state: [f64; N],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedEnd,
    TerminalEvent,
}

/// Sampled solution. `t` is monotone in the integration direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<const N: usize> {
    pub chart: Chart,
    pub t: Vec<f64>,
    #[serde(with = "vec_array_serde")]
    pub states: Vec<[f64; N]>,
    pub events: Vec<EventRecord<N>>,
    pub termination: Termination,
    pub steps: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        let i = self.t.len() - 1;
        (self.t[i], self.states[i])
    }

    pub fn first_event(&self, kind: &str) -> Option<&EventRecord<N>> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

mod array_serde {
    use serde::Serializer;

    pub fn serialize<S: Serializer, const N: usize>(a: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(a.iter())
    }
}

mod vec_array_serde {
    use serde::Serializer;

    pub fn serialize<S: Serializer, const N: usize>(v: &[[f64; N]], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|a| a.to_vec()))
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy)]
struct Dense<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            let r = &self.r;
            *o = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        out
    }
}

struct StepResult<const N: usize> {
    y: [f64; N],
    k7: [f64; N],
    err: f64,
    dense: Dense<N>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (k, a) in terms {
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}

fn check_finite<const N: usize>(t: f64, v: &[f64; N]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(t))
    }
}

fn dopri_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, cfg: &IntegratorConfig) -> Result<StepResult<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut eval = |tt: f64, yy: [f64; N]| -> Result<[f64; N]> {
        check_finite(tt, &yy)?;
        let k = f(tt, &yy)?;
        check_finite(tt, &k)?;
        Ok(k)
    };
    let k2 = eval(t + C[1] * h, axpy(y, h, &[(k1, A21)]))?;
    let k3 = eval(t + C[2] * h, axpy(y, h, &[(k1, A3[0]), (&k2, A3[1])]))?;
    let k4 = eval(t + C[3] * h, axpy(y, h, &[(k1, A4[0]), (&k2, A4[1]), (&k3, A4[2])]))?;
    let k5 = eval(
        t + C[4] * h,
        axpy(y, h, &[(k1, A5[0]), (&k2, A5[1]), (&k3, A5[2]), (&k4, A5[3])]),
    )?;
    let k6 = eval(
        t + h,
        axpy(y, h, &[(k1, A6[0]), (&k2, A6[1]), (&k3, A6[2]), (&k4, A6[3]), (&k5, A6[4])]),
    )?;
    let y_new = axpy(
        y,
        h,
        &[(k1, B[0]), (&k3, B[2]), (&k4, B[3]), (&k5, B[4]), (&k6, B[5])],
    );
    let k7 = eval(t + h, y_new)?;
    let mut acc = 0.0;
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let e = h * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
        let sc = cfg.scale(y, &y_new, i);
        acc += (e / sc) * (e / sc);
        let diff = y_new[i] - y[i];
        let bspl = h * k1[i] - diff;
        r[0][i] = y[i];
        r[1][i] = diff;
        r[2][i] = bspl;
        r[3][i] = diff - h * k7[i] - bspl;
        r[4][i] = h * (D[0] * k1[i] + D[2] * k3[i] + D[3] * k4[i] + D[4] * k5[i] + D[5] * k6[i] + D[6] * k7[i]);
    }
    Ok(StepResult {
        y: y_new,
        k7,
        err: (acc / N as f64).sqrt(),
        dense: Dense { t0: t, h, r },
    })
}

fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], dir: f64, cfg: &IntegratorConfig) -> f64
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = cfg.scale(y, y, i);
        d0 += (y[i] / sc).powi(2);
        d1 += (k1[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.max_step);
    let y1 = axpy(y, dir * h0, &[(k1, 1.0)]);
    let d2 = match f(t + dir * h0, &y1) {
        Ok(k) => {
            let mut acc = 0.0;
            for i in 0..N {
                let sc = cfg.scale(y, y, i);
                acc += ((k[i] - k1[i]) / sc).powi(2);
            }
            (acc / N as f64).sqrt() / h0
        }
        Err(_) => return h0 * 1e-3,
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

/// Integrates `field` from `(t0, y0)` toward `t_end` (either direction),
/// recording every accepted step and every monitored event.
pub fn integrate<const N: usize, F>(
    mut field: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[Event<'_, N>],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    run(&mut field, t0, y0, t_end, events, cfg, None)
}

/// Integrates and returns the states at the prescribed monotone `grid` of
/// times (the first grid point must be `t0`). Steps are clipped so that each
/// grid time is hit exactly rather than interpolated.
pub fn integrate_grid<const N: usize, F>(mut field: F, y0: [f64; N], grid: &[f64], cfg: &IntegratorConfig) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let traj = run(&mut field, grid[0], y0, grid[grid.len() - 1], &[], cfg, Some(grid))?;
    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0;
    for (t, s) in traj.t.iter().zip(&traj.states) {
        if j < grid.len() && *t == grid[j] {
            out.push(*s);
            j += 1;
        }
    }
    if out.len() != grid.len() {
        return Err(Error::Domain("grid times must be strictly monotone".into()));
    }
    Ok(out)
}

fn run<const N: usize, F>(
    field: &mut F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[Event<'_, N>],
    cfg: &IntegratorConfig,
    stops: Option<&[f64]>,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    cfg.validate()?;
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::Domain("integration span must be finite".into()));
    }
    check_finite(t0, &y0)?;
    let mut traj = Trajectory {
        chart: Chart::Other,
        t: vec![t0],
        states: vec![y0],
        events: Vec::new(),
        termination: Termination::ReachedEnd,
        steps: 0,
    };
    if t_end == t0 {
        return Ok(traj);
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = field(t, &y)?;
    check_finite(t, &k1)?;
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.monitor)(t, &y)).collect();
    let mut h = initial_step(field, t, &y, &k1, dir, cfg);
    let mut next_stop = 1usize;
    let mut last_err = None;
    loop {
        if traj.steps >= cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
        let mut target = t_end;
        if let Some(s) = stops {
            while next_stop < s.len() && (s[next_stop] - t) * dir <= 0.0 {
                next_stop += 1;
            }
            if next_stop < s.len() {
                target = s[next_stop];
            }
        }
        h = h.min(cfg.max_step);
        let mut hit_target = false;
        let remaining = (target - t).abs();
        if h >= remaining * (1.0 - 1e-2) {
            h = remaining;
            hit_target = true;
        }
        let h_min = 8.0 * f64::EPSILON * t.abs().max(span.min(1.0));
        if h < h_min && !(hit_target && h > 0.0) {
            return Err(last_err.unwrap_or(Error::StepUnderflow { t, h }));
        }
        let step = match dopri_step(field, t, &y, &k1, dir * h, cfg) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                h *= 0.25;
                continue;
            }
        };
        traj.steps += 1;
        if step.err > 1.0 || !step.err.is_finite() {
            h *= (0.9 * step.err.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }
        last_err = None;
        let t_new = if hit_target { target } else { t + dir * h };
        // Event detection on the accepted step.
        let g_new: Vec<f64> = events.iter().map(|e| (e.monitor)(t_new, &step.y)).collect();
        let mut found: Vec<(f64, usize, [f64; N])> = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            if ev.direction.accepts(g_prev[i], g_new[i]) {
                let (te, ye) = locate(field, ev, t, &y, &k1, &step.dense, t_new, cfg)?;
                found.push((te, i, ye));
            }
        }
        found.sort_by(|a, b| ((a.0 - t) * dir).total_cmp(&((b.0 - t) * dir)));
        let mut stop_at = None;
        for (te, i, ye) in found {
            traj.events.push(EventRecord {
                t: te,
                kind: events[i].kind,
                state: ye,
            });
            if events[i].terminal {
                stop_at = Some((te, ye));
                break;
            }
        }
        if let Some((te, ye)) = stop_at {
            if te != t {
                traj.t.push(te);
                traj.states.push(ye);
            }
            traj.termination = Termination::TerminalEvent;
            return Ok(traj);
        }
        t = t_new;
        y = step.y;
        k1 = step.k7;
        g_prev = g_new;
        traj.t.push(t);
        traj.states.push(y);
        if hit_target && target == t_end {
            return Ok(traj);
        }
        let fac = if step.err == 0.0 { 10.0 } else { (0.9 * step.err.powf(-0.2)).clamp(0.2, 10.0) };
        if !hit_target {
            h *= fac;
        } else {
            h = h.max(h * fac);
        }
    }
}

/// Localizes an event inside an accepted step: a root of the monitor along
/// the dense output, refined with direct Runge-Kutta steps from the step
/// start until the monitor is within `event_tol`.
#[allow(clippy::too_many_arguments)]
fn locate<const N: usize, F>(
    field: &mut F,
    ev: &Event<'_, N>,
    t0: f64,
    y0: &[f64; N],
    k1: &[f64; N],
    dense: &Dense<N>,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let g = |t: f64| (ev.monitor)(t, &dense.eval(t));
    let span = (t1 - t0).abs();
    let mut te = brent(g, t0, t1, 1e-3 * cfg.event_tol.min(span))?;
    let exact = |field: &mut F, te: f64| -> Result<[f64; N]> {
        if te == t0 {
            return Ok(*y0);
        }
        Ok(dopri_step(field, t0, y0, k1, te - t0, cfg)?.y)
    };
    let mut ye = exact(field, te)?;
    let mut ge = (ev.monitor)(te, &ye);
    // Secant refinement on the exact-step map.
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..8 {
        if ge.abs() <= cfg.event_tol {
            break;
        }
        let slope = match prev {
            Some((tp, gp)) if tp != te => (ge - gp) / (te - tp),
            _ => {
                let dt = 1e-6 * span.max(1e-12);
                (g(te + dt) - g(te - dt)) / (2.0 * dt)
            }
        };
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = te - ge / slope;
        let lo = t0.min(t1);
        let hi = t0.max(t1);
        if !(next >= lo && next <= hi) {
            break;
        }
        prev = Some((te, ge));
        te = next;
        ye = exact(field, te)?;
        ge = (ev.monitor)(te, &ye);
    }
    Ok((te, ye))
}

/// Loci of the `(w, y)` phase plane monitored by [`advance_to_axis`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Axis {
    /// `w = 0`.
    W,
    /// `y = 0`.
    Y,
    /// `y = η w`.
    Slope(f64),
}

impl Axis {
    pub fn value(&self, s: &[f64; 2]) -> f64 {
        match *self {
            Axis::W => s[0],
            Axis::Y => s[1],
            Axis::Slope(eta) => s[1] - eta * s[0],
        }
    }
}

/// First crossing of `axis` within `|τ| <= t_max` (sign of `t_max` sets the
/// direction). A start on the axis returns `τ = 0`.
pub fn advance_to_axis<F>(field: F, start: [f64; 2], axis: Axis, t_max: f64, cfg: &IntegratorConfig) -> Result<(f64, [f64; 2])>
where
    F: FnMut(f64, &[f64; 2]) -> Result<[f64; 2]>,
{
    if axis.value(&start).abs() <= cfg.event_tol {
        return Ok((0.0, start));
    }
    let ev = [Event::new("axis", move |_, s: &[f64; 2]| axis.value(s)).terminal()];
    let traj = integrate(field, 0.0, start, t_max, &ev, cfg)?;
    match traj.events.first() {
        Some(e) => Ok((e.t, e.state)),
        None => Err(Error::NoCrossing(format!(
            "{axis:?} not reached within τ = {t_max} (final state {:?})",
            traj.last().1
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate as quad, QuadConfig};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn harmonic(_: f64, s: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([s[1], -s[0]])
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let cfg = IntegratorConfig::default();
        let tr = integrate(harmonic, 0.0, [1.0, 0.0], 10.0, &[], &cfg).unwrap();
        let (t, s) = tr.last();
        assert_eq!(t, 10.0);
        assert!((s[0] - 10f64.cos()).abs() < 1e-8);
        assert!((s[1] + 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn circle_quarter_event() {
        // Restriction of the p = 1 flow to its invariant circle of radius b + 1.
        let b = 1.0;
        let cfg = IntegratorConfig::default();
        let ev = [
            Event::new("w=0", |_, s: &[f64; 2]| s[0]),
            Event::new("y=0", |_, s: &[f64; 2]| s[1]).terminal(),
        ];
        let tr = integrate(harmonic, 0.0, [0.0, b + 1.0], 10.0, &ev, &cfg).unwrap();
        let e = tr.first_event("y=0").unwrap();
        assert!((e.t - FRAC_PI_2).abs() < 1e-8, "{}", e.t);
        assert!((e.state[0] - (b + 1.0)).abs() < 1e-8);
        assert!(e.state[1].abs() < 1e-12);
        // The start lies on w = 0 itself.
        let (t, s) = advance_to_axis(harmonic, [0.0, b + 1.0], Axis::W, 10.0, &cfg).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(s, [0.0, b + 1.0]);
        let (t, _) = advance_to_axis(harmonic, [1e-3, b + 1.0], Axis::W, 10.0, &cfg).unwrap();
        assert!((t - (PI - (1e-3f64 / (b + 1.0)).atan())).abs() < 1e-8, "{t}");
    }

    #[test]
    fn zero_field_is_static() {
        let cfg = IntegratorConfig::default();
        let ev = [Event::new("w", |_, s: &[f64; 2]| s[0] - 5.0)];
        let tr = integrate(|_, _: &[f64; 2]| Ok([0.0, 0.0]), 0.0, [1.0, 2.0], 3.0, &ev, &cfg).unwrap();
        assert!(tr.events.is_empty());
        assert_eq!(tr.last().1, [1.0, 2.0]);
    }

    #[test]
    fn duffing_quarter_period_matches_energy_quadrature() {
        let cfg = IntegratorConfig::default();
        let field = |_: f64, s: &[f64; 2]| Ok([s[1], -s[0] - s[0].powi(3)]);
        let (t, s) = advance_to_axis(field, [0.0, 1.0], Axis::Y, 100.0, &cfg).unwrap();
        let amp = (3f64.sqrt() - 1.0).sqrt();
        // Substituting w = A sin φ removes the endpoint singularity.
        let oracle = quad(
            |ph: f64| {
                let w = amp * ph.sin();
                amp * ph.cos() / (1.0 - w * w - 0.5 * w.powi(4)).sqrt()
            },
            0.0,
            FRAC_PI_2,
            QuadConfig::abs(1e-13),
        )
        .unwrap()
        .value;
        assert!((t - oracle).abs() < 1e-7, "{t} vs {oracle}");
        assert!((s[0] - amp).abs() < 1e-7);
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let cfg = IntegratorConfig::default();
        let field = |_: f64, s: &[f64; 2]| Ok([s[1], -s[0] - s[0].powi(3)]);
        let fwd = integrate(field, 0.0, [0.3, 0.7], 5.0, &[], &cfg).unwrap().last().1;
        let back = integrate(field, 5.0, fwd, 0.0, &[], &cfg).unwrap().last().1;
        assert!((back[0] - 0.3).abs() < 100.0 * cfg.rel_tol);
        assert!((back[1] - 0.7).abs() < 100.0 * cfg.rel_tol);
    }

    #[test]
    fn grid_hits_exact_times() {
        let cfg = IntegratorConfig::default();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let out = integrate_grid(harmonic, [1.0, 0.0], &grid, &cfg).unwrap();
        for (t, s) in grid.iter().zip(&out) {
            assert!((s[0] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn direction_filter() {
        let cfg = IntegratorConfig::default();
        let ev = [Event::new("down", |_, s: &[f64; 2]| s[0]).direction(Direction::Falling)];
        let tr = integrate(harmonic, 0.0, [1.0, 0.0], 7.0, &ev, &cfg).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert!((tr.events[0].t - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn underflow_near_blowup() {
        let cfg = IntegratorConfig::default();
        let r = integrate(|_, s: &[f64; 1]| Ok([s[0] * s[0]]), 0.0, [1.0], 2.0, &[], &cfg);
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite(_)) | Err(Error::MaxSteps(_))));
    }

    #[test]
    fn no_crossing_reported() {
        let cfg = IntegratorConfig::default();
        let r = advance_to_axis(|_, _: &[f64; 2]| Ok([1.0, 0.0]), [1.0, 1.0], Axis::W, 5.0, &cfg);
        assert!(matches!(r, Err(Error::NoCrossing(_))));
    }
}
