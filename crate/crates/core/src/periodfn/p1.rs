//! Periods of positive solutions when `p = 1` and `f₁ = id`.
//!
//! Along the upper half of a positive orbit the slope variable `u` rises
//! from `0` to a turning value `u*` and falls back; the period is
//! `T⁺ = 2 u* Σᵢ ∫₀¹ dλ / |u'ᵢ(λ u*)|` over the two branches of the orbit.
//! All integrals use `λ = sin φ`, which absorbs the inverse square-root
//! singularity at `λ = 1`, and every branch inversion is posed in terms of
//! the small quantity `δ = √(1-λ²u*²) - √(1-u*²)` to keep full precision
//! near the turning point.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::numerics::{brent, integrate, QuadConfig};
use crate::nlparams::{Power, ReducedParams};
use crate::odeint::{integrate as ode, Direction, Event, IntegratorConfig};
use crate::vfield::{field_p1, SlopeState};

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `ln(1+x) - x`, accurate for small `x`.
fn log1p_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut term = x;
        let mut sum = 0.0;
        for k in 2..60 {
            term *= -x;
            sum += term / k as f64;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

/// `√(1 - u*²)` at the turning point, as a function of the left crossing
/// `μ`; it decreases to `0` as `μ` decreases to the lower end `μ̄`.
fn turning_root(mu: f64, rp: &ReducedParams) -> f64 {
    let (b, d) = (rp.b, rp.d);
    if b == 1.0 {
        (mu * (2.0 * d + 2.0 - mu)).sqrt() - d
    } else if b == 0.0 {
        // 1 - √(1-u*²) = K(d) - K(μ) with K(w) = d ln w - w.
        1.0 + d * log1p_minus_x((mu - d) / d)
    } else if b == -1.0 {
        d - mu * ((d - 1.0) / mu - 1.0).exp()
    } else {
        let c = (1.0 + d / b) * mu.powf(b) - mu.powf(b + 1.0) / (b + 1.0);
        let a = (c * b * (b + 1.0)).powf(1.0 / (b + 1.0));
        (a - d) / b
    }
}

/// Admissible interval `(μ̄, a)` of left crossings.
pub fn admissible_interval(rp: &ReducedParams) -> Result<(f64, f64)> {
    check(rp)?;
    let a = rp.b + rp.d;
    if rp.d <= 0.0 {
        return Ok((0.0, a));
    }
    if rp.b == 1.0 {
        return Ok((rp.d + 1.0 - (2.0 * rp.d + 1.0).sqrt(), a));
    }
    let g = |mu: f64| turning_root(mu, rp);
    // turning_root increases from <= 0 near 0 to 1 at a.
    let mut lo = a * 0.5;
    let mut k = 0;
    while g(lo) > 0.0 {
        lo *= 0.5;
        k += 1;
        if k > 1000 || lo == 0.0 {
            return Ok((0.0, a));
        }
    }
    let mubar = brent(g, lo, a, 1e-15 * a)?;
    Ok((mubar, a))
}

fn check(rp: &ReducedParams) -> Result<()> {
    if rp.p != 1.0 {
        return Err(Error::Parameter(format!("p = 1 period requested at p = {}", rp.p)));
    }
    if !(rp.b + rp.d > 0.0) {
        return Err(Error::Parameter(format!("positive orbits need b + d > 0, got {}", rp.b + rp.d)));
    }
    Ok(())
}

/// Period from the turning data `r = √(1 - u*²) ∈ [0, 1)`; `r = 0` gives the
/// limiting period at the lower end of the admissible interval.
pub fn period_from_turning(r: f64, rp: &ReducedParams) -> Result<f64> {
    check(rp)?;
    let (b, d) = (rp.b, rp.d);
    let s = (1.0 - r) * (1.0 + r);
    let us = s.sqrt();
    // √(1 - λ²u*²) and δ at λ = sin φ.
    let a1 = |phi: f64| {
        let (sp, cp) = phi.sin_cos();
        (cp * cp + r * r * sp * sp).sqrt()
    };
    let delta = |phi: f64| {
        let c = phi.cos();
        s * c * c / (a1(phi) + r)
    };
    if b == 1.0 {
        let v = integrate(
            |phi| {
                let x = a1(phi) + r;
                (x / (2.0 * d + x)).sqrt()
            },
            0.0,
            FRAC_PI_2,
            quad_cfg(),
        )?;
        return Ok(4.0 * v.value);
    }
    let mut total = 0.0;
    for branch in [Branch::Lower, Branch::Upper] {
        let mut failure = None;
        let v = integrate(
            |phi| {
                let c = phi.cos();
                if c <= 0.0 {
                    // λ = 1 limit of the integrand; the quadrature never samples it.
                    return 0.0;
                }
                let dl = delta(phi);
                let denom = if b == 0.0 {
                    solve_log_branch(dl, d, branch).map(|h| h.abs())
                } else if b == -1.0 {
                    let eb = d - r;
                    solve_entropy_branch(dl / eb, branch).map(|x| eb * (1.0 + x) * x.ln_1p().abs())
                } else {
                    let base = d + b * a1(phi);
                    let eps = b * dl / base;
                    solve_g_branch(eps, b, branch).map(|z| base * z.abs())
                };
                match denom {
                    Ok(den) if den > 0.0 => 2.0 * us * c / den,
                    Ok(den) => {
                        failure.get_or_insert(Error::Domain(format!("degenerate branch speed {den}")));
                        f64::NAN
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            0.0,
            FRAC_PI_2,
            quad_cfg(),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        total += v?.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Lower,
    Upper,
}

/// Finds `t ∈ (0, end)` with `f(t) = 0` where `f(0) < 0`, moving toward the
/// (possibly infinite) end of the domain.
fn march<F: FnMut(f64) -> f64>(mut f: F, end: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut k = 1;
    loop {
        let hi = if end.is_finite() {
            end * (1.0 - 0.5f64.powi(k))
        } else {
            end.signum() * 2f64.powi(k - 20)
        };
        let v = f(hi);
        if v >= 0.0 || v.is_nan() {
            if v.is_nan() {
                return Err(Error::Bracket("branch function undefined".into()));
            }
            return brent(f, lo, hi, 0.0);
        }
        lo = hi;
        k += 1;
        if k > 1100 {
            return Err(Error::Bracket("branch inversion did not bracket".into()));
        }
    }
}

/// Root `s` of `1 - G(s) = eps` on the chosen side of `0`, with
/// `G(s) = (1-s)^(b/(b+1)) (1+bs)^(1/(b+1))`; returns `|s|`.
fn solve_g_branch(eps: f64, b: f64, branch: Branch) -> Result<f64> {
    if eps == 0.0 {
        return Ok(0.0);
    }
    // ln G(s) = (b ℓ(-s) + ℓ(bs)) / (b+1) with ℓ(x) = ln(1+x) - x.
    let ln_g = |s: f64| (b * log1p_minus_x(-s) + log1p_minus_x(b * s)) / (b + 1.0);
    let target = (-eps).ln_1p();
    let end = match branch {
        Branch::Lower => {
            if b > 0.0 {
                -1.0 / b
            } else {
                f64::NEG_INFINITY
            }
        }
        Branch::Upper => {
            if b < -1.0 {
                -1.0 / b
            } else {
                1.0
            }
        }
    };
    if eps >= 1.0 {
        // η = 0: the branch reaches the end of its domain.
        return Ok(end.abs());
    }
    // |ln G| grows away from 0 on both sides.
    let sign = if b > 0.0 { -1.0 } else { 1.0 };
    let s = march(|s| sign * (ln_g(s) - target), end)?;
    Ok(s.abs())
}

/// Root `h` of `h - d ln(1 + h/d) = δ` (returned with its sign).
fn solve_log_branch(delta: f64, d: f64, branch: Branch) -> Result<f64> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    let g = |h: f64| -d * log1p_minus_x(h / d) - delta;
    match branch {
        Branch::Lower => march(g, -d),
        Branch::Upper => march(g, f64::INFINITY),
    }
}

/// Root `x` of `(1+x) ln(1+x) - x = δ`.
fn solve_entropy_branch(delta: f64, branch: Branch) -> Result<f64> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| x * x.ln_1p() + log1p_minus_x(x) - delta;
    match branch {
        Branch::Lower => march(g, -1.0),
        Branch::Upper => march(g, f64::INFINITY),
    }
}

/// Least period `T⁺(μ)` of the positive orbit through `(μ, 0)`, by
/// quadrature.
pub fn p1_period_quadrature(mu: f64, rp: &ReducedParams) -> Result<f64> {
    let (lo, hi) = admissible_interval(rp)?;
    if !(mu > lo && mu < hi) {
        return Err(Error::Domain(format!("μ = {mu} outside the admissible interval ({lo}, {hi})")));
    }
    let r = turning_root(mu, rp).clamp(0.0, 1.0);
    period_from_turning(r, rp)
}

/// Least period by integrating the slope chart from `(μ, 0)` to the return
/// to `u = 0`.
pub fn p1_period_event(mu: f64, rp: &ReducedParams, cfg: &IntegratorConfig) -> Result<f64> {
    let (lo, hi) = admissible_interval(rp)?;
    if !(mu > lo && mu < hi) {
        return Err(Error::Domain(format!("μ = {mu} outside the admissible interval ({lo}, {hi})")));
    }
    let nl = Power::new(1.0, 1.0);
    let field = |_: f64, s: &[f64; 2]| field_p1(SlopeState { w: s[0], u: s[1] }, rp, &nl);
    let ev = [Event::new("u=0", |_, s: &[f64; 2]| s[1]).direction(Direction::Falling).terminal()];
    let cfg = cfg.with_tol(cfg.rel_tol, cfg.abs_tol.min(cfg.rel_tol * mu));
    let tr = ode(field, 0.0, [mu, 0.0], 1e4, &ev, &cfg)?;
    let e = tr
        .events
        .first()
        .ok_or_else(|| Error::NoCrossing(format!("orbit through μ = {mu} did not close")))?;
    Ok(2.0 * e.t)
}

/// `T̄⁺(d) = 4∫₀^{π/2} √(cos θ / (cos θ + 2d)) dθ` together with the
/// equivalent slope-variable form; errors if they disagree beyond `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TbarP1 {
    pub angle_form: f64,
    pub slope_form: f64,
}

pub fn tbar_p1(d: f64) -> Result<TbarP1> {
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("T̄⁺ needs d >= 0, got {d}")));
    }
    let angle_form = 4.0 * crate::nlparams::p1_mode_integral(d)?;
    // u = 1 - t⁴ turns the (1-u)^(-1/4) endpoint behaviour into a smooth integrand.
    let slope_form = 4.0
        * integrate(
            |t| {
                let t4 = t.powi(4);
                let root = (2.0 - t4).sqrt();
                4.0 * t * t / (root * (2.0 * d + t * t * root)).sqrt()
            },
            0.0,
            1.0,
            quad_cfg(),
        )?
        .value;
    if (angle_form - slope_form).abs() > 1e-9 * angle_form {
        return Err(Error::Quadrature(format!(
            "T̄⁺ forms disagree: {angle_form} vs {slope_form}"
        )));
    }
    Ok(TbarP1 { angle_form, slope_form })
}

/// Left crossing `μ` in terms of the turning value `u*` when `b = 1`.
pub fn mu_from_turning_b1(u_star: f64, d: f64) -> f64 {
    let x = d + (1.0 - u_star * u_star).sqrt();
    d + 1.0 - ((d + 1.0).powi(2) - x * x).sqrt()
}
