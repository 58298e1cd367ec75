//! Right-hand sides of the reduced profile equation in its coordinate charts.
//!
//! * `(w, y)` with `y = w'`: the Cartesian phase plane, singular at the origin.
//! * `(θ, ρ)`: polar coordinates of the Cartesian plane.
//! * `(w, u)` with `u = phi(y/w)`: the slope chart, regular for `w > 0`.
//! * `(v, u)` with `v = w^(q+1-p)`: the regularized slope chart for the pure
//!   power source, regular up to `v = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nlparams::{phi_prime, varphi, Nonlinearity, ReducedParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub w: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeState {
    pub w: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegState {
    pub v: f64,
    pub u: f64,
}

/// A field value, tagged when it was evaluated on a locus where the field is
/// continuous but not Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: [f64; 2],
    pub singular: Option<&'static str>,
}

impl FieldEval {
    pub fn is_singular(&self) -> bool {
        self.singular.is_some()
    }
}

fn signed_pow(s: f64, e: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(e).copysign(s)
    }
}

/// Cartesian field `(y, G(w, y))`.
///
/// For `p = 1` the field is singular on the whole line `w = 0`; off that line
/// the same formula applies.
pub fn field_wy(pt: PhasePoint, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<FieldEval> {
    let PhasePoint { w, y } = pt;
    if w == 0.0 && y == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let p = rp.p;
    if p == 1.0 && w == 0.0 {
        return Err(Error::SingularField {
            t: f64::NAN,
            reason: "p = 1 field is singular on w = 0".into(),
        });
    }
    let mut singular = None;
    if w == 0.0 && ((p < 2.0 && rp.d != 0.0) || rp.q < 1.0) {
        singular = Some("non-Lipschitz on w = 0");
    }
    if p == 2.0 {
        return Ok(FieldEval {
            value: [y, (rp.b + rp.d) * w - nl.f(w)],
            singular,
        });
    }
    let (w2, y2) = (w * w, y * y);
    let source = nl.f(w) - rp.d * signed_pow(w, p - 1.0);
    let num = rp.b * w2 * w + (rp.b + 2.0 - p) * w * y2 - source * (w2 + y2).powf(2.0 - 0.5 * p);
    let den = w2 + (p - 1.0) * y2;
    Ok(FieldEval {
        value: [y, num / den],
        singular,
    })
}

/// Polar form `(θ', ρ')` of the Cartesian field for `θ ∈ (0, π/2)`.
pub fn field_polar(theta: f64, rho: f64, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<[f64; 2]> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("polar chart needs θ in (0, π/2), got {theta}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("polar chart needs ρ > 0, got {rho}")));
    }
    let p = rp.p;
    let (s, c) = theta.sin_cos();
    let t = s / c;
    let k = 1.0 + (p - 1.0) * t * t;
    let dtheta = (rp.b - (p - 1.0) * t * t + (rp.d - nl.h(rho * c)) * c.powf(p - 2.0)) / k;
    Ok([dtheta, rho * (1.0 + dtheta) * t])
}

/// Polar rates for `p = 1`, `d = 0` in a form valid for every `θ`; there
/// `θ' = b - h(ρ cos θ)/cos θ` and the circle `ρ = b + 1` (for `h = id`) is
/// invariant.
pub fn field_polar_p1(theta: f64, rho: f64, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<[f64; 2]> {
    if rp.p != 1.0 || rp.d != 0.0 {
        return Err(Error::Parameter("closed polar form needs p = 1 and d = 0".into()));
    }
    let (s, c) = theta.sin_cos();
    let w = rho * c;
    let ratio = if w == 0.0 { rho * nl.h_prime(0.0) } else { nl.h(w) / c };
    let dtheta = rp.b - ratio;
    let gain = 1.0 + dtheta;
    let drho = if gain == 0.0 { 0.0 } else { rho * gain * s / c };
    Ok([dtheta, drho])
}

fn h_is_c1_at_zero(rp: &ReducedParams, nl: &dyn Nonlinearity) -> bool {
    match nl.power_exponent() {
        Some(q) => q + 1.0 - rp.p >= 1.0,
        None => false,
    }
}

/// Slope chart `(w φ(u), -E(φ(u)) - h(w) + d)` where `φ = varphi`.
pub fn field_slope(st: SlopeState, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<FieldEval> {
    if st.w < 0.0 {
        return Err(Error::Domain(format!("slope chart needs w >= 0, got {}", st.w)));
    }
    let xi = varphi(st.u, rp.p)?;
    let du = -rp.energy().value(xi) - nl.h(st.w) + rp.d;
    let singular = (st.w == 0.0 && !h_is_c1_at_zero(rp, nl)).then_some("h is not C¹ at w = 0");
    Ok(FieldEval {
        value: [st.w * xi, du],
        singular,
    })
}

/// Regularized chart for the pure power source:
/// `v' = (q+1-p) v φ(u)`, `u' = -E(φ(u)) - v + d`.
pub fn field_reg(st: RegState, rp: &ReducedParams) -> Result<[f64; 2]> {
    let xi = varphi(st.u, rp.p)?;
    Ok([
        (rp.q + 1.0 - rp.p) * st.v * xi,
        -rp.energy().value(xi) - st.v + rp.d,
    ])
}

/// Slope chart at `p = 1`: `(w u/√(1-u²), b √(1-u²) - f₁(w) + d)`.
pub fn field_p1(st: SlopeState, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<[f64; 2]> {
    if rp.p != 1.0 {
        return Err(Error::Parameter(format!("p = 1 field requested with p = {}", rp.p)));
    }
    if st.u.abs() >= 1.0 {
        return Err(Error::Domain(format!("p = 1 slope chart needs |u| < 1, got {}", st.u)));
    }
    if !(st.w > 0.0) {
        return Err(Error::Domain(format!("p = 1 slope chart needs w > 0, got {}", st.w)));
    }
    let r = (1.0 - st.u * st.u).sqrt();
    Ok([st.w * st.u / r, rp.b * r - nl.f(st.w) + rp.d])
}

/// Right-hand side of the second-order equation `u'' = B(φ(u)) u' + (q+1-p)(E(φ(u)) - d) φ(u)`
/// satisfied by `u` along the regularized flow.
pub fn u_second_derivative(u: f64, uprime: f64, rp: &ReducedParams) -> Result<f64> {
    let xi = varphi(u, rp.p)?;
    let b = crate::nlparams::b_coeff(xi, rp.p, rp.q, rp.b);
    Ok(b * uprime + (rp.q + 1.0 - rp.p) * (rp.energy().value(xi) - rp.d) * xi)
}

/// Pushforward of the Cartesian field to the slope chart at a point with
/// `w > 0`: returns `(w', u')` computed from `(y, G)` by the chain rule.
pub fn pushforward_slope(pt: PhasePoint, rp: &ReducedParams, nl: &dyn Nonlinearity) -> Result<[f64; 2]> {
    let [dw, dy] = field_wy(pt, rp, nl)?.value;
    let xi = pt.y / pt.w;
    let dxi = (dy * pt.w - pt.y * dw) / (pt.w * pt.w);
    Ok([dw, phi_prime(xi, rp.p) * dxi])
}

/// Sign pattern of the λ-derivatives of `F(λw, λy)/λ` and `G(λw, λy)/λ`
/// over `λ ∈ [0.5, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub points: usize,
    pub min_df: f64,
    pub max_df: f64,
    pub min_dg: f64,
    pub max_dg: f64,
    /// `∂F ≥ 0` and `∂G < 0` everywhere: the period decreases with amplitude.
    pub decreasing: bool,
    /// `∂F ≤ 0` and `∂G > 0` everywhere.
    pub increasing: bool,
}

pub fn check_scaling_conditions(
    rp: &ReducedParams,
    nl: &dyn Nonlinearity,
    sample_points: &[PhasePoint],
) -> Result<ScalingReport> {
    const N: usize = 32;
    let mut min_df = f64::INFINITY;
    let mut max_df = f64::NEG_INFINITY;
    let mut min_dg = f64::INFINITY;
    let mut max_dg = f64::NEG_INFINITY;
    for &pt in sample_points {
        let scaled = |lam: f64| -> Result<[f64; 2]> {
            let v = field_wy(PhasePoint { w: lam * pt.w, y: lam * pt.y }, rp, nl)?.value;
            Ok([v[0] / lam, v[1] / lam])
        };
        for i in 0..N {
            let lam = 0.5 * 4f64.powf(i as f64 / (N - 1) as f64);
            let step = 1e-5 * lam;
            let hi = scaled(lam + step)?;
            let lo = scaled(lam - step)?;
            let df = (hi[0] - lo[0]) / (2.0 * step);
            let dg = (hi[1] - lo[1]) / (2.0 * step);
            min_df = min_df.min(df);
            max_df = max_df.max(df);
            min_dg = min_dg.min(dg);
            max_dg = max_dg.max(dg);
        }
    }
    // Absorb finite-difference noise in the flat F component.
    let noise = 1e-7;
    Ok(ScalingReport {
        points: sample_points.len(),
        min_df,
        max_df,
        min_dg,
        max_dg,
        decreasing: min_df >= -noise && max_dg < 0.0,
        increasing: max_df <= noise && min_dg > 0.0,
    })
}
