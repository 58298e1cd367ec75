//! Scalar constants, parameter reductions and the scalar functions of the
//! phase-plane analysis.

mod nonlinearity;
mod slope;

pub use nonlinearity::{Nonlinearity, Power};
pub use slope::{b_coeff, phi, phi_prime, psi, varphi, EMinimum, SlopeEnergy};

use serde::Serialize;
use twofloat::TwoFloat;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadConfig};

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::Domain(format!("non-finite exponents p = {p}, q = {q}")));
    }
    if q <= p - 1.0 {
        return Err(Error::Domain(format!("need q > p - 1, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `β_q` in double-double precision.
fn beta_dd(p: f64, q: f64) -> TwoFloat {
    let den = TwoFloat::new_add(q, 1.0) - p;
    let hi = p / den.hi();
    let residual = TwoFloat::from(p) - den * hi;
    TwoFloat::new_add(hi, residual.hi() / den.hi())
}

fn lambda_value(p: f64, q: f64) -> f64 {
    let b = beta_dd(p, q);
    (b * (b * q - 2.0)).hi()
}

fn c_q_value(p: f64, q: f64) -> f64 {
    let num = TwoFloat::new_add(p, -2.0) * q + TwoFloat::new_add(p, -1.0) * 2.0;
    let den = (TwoFloat::new_add(q, 1.0) - p).hi();
    p.powf(p - 1.0) * num.hi() / den.powf(p)
}

/// Scaling exponent `β_q = p / (q + 1 - p)`.
pub fn beta_q(p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    Ok(p / (q + 1.0 - p))
}

/// `λ_q = β_q (q β_q - 2)`, accurate near its zero.
pub fn lambda_q(p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    Ok(lambda_value(p, q))
}

/// The equivalent form `λ_q = β_q (p - 2 + (p - 1) β_q)`.
pub fn lambda_q_expanded(p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    let b = beta_dd(p, q);
    Ok((b * (TwoFloat::new_add(p, -2.0) + TwoFloat::new_add(p, -1.0) * b)).hi())
}

/// Critical potential coefficient `c_q = p^(p-1) ((p-2) q + 2(p-1)) / (q+1-p)^p`.
pub fn c_q(p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    Ok(c_q_value(p, q))
}

/// Signed power `|s|^e sign(s)` shared by the lifting maps.
pub(crate) fn signed_pow(s: f64, e: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(e).copysign(s)
    }
}

/// The user-facing triple `(p, q, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl ProblemParams {
    pub fn new(p: f64, q: f64, c: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && c.is_finite()) {
            return Err(Error::Domain(format!("parameters must be finite: p = {p}, q = {q}, c = {c}")));
        }
        if p < 1.0 {
            return Err(Error::Domain(format!("need p >= 1, got p = {p}")));
        }
        check_exponents(p, q)?;
        Ok(Self { p, q, c })
    }

    pub fn beta(&self) -> f64 {
        self.p / (self.q + 1.0 - self.p)
    }

    pub fn lambda(&self) -> f64 {
        lambda_value(self.p, self.q)
    }

    pub fn c_q(&self) -> f64 {
        c_q_value(self.p, self.q)
    }

    /// Exponent `q + 1 - p` of the p-homogeneous quotient `h`.
    pub fn h_exponent(&self) -> f64 {
        self.q + 1.0 - self.p
    }

    /// Values `±ω` of the nonzero constant solutions, if any.
    pub fn constant_solution(&self) -> Option<f64> {
        if self.p == 1.0 {
            (self.c > -1.0).then(|| (self.c + 1.0).powf(1.0 / self.q))
        } else {
            let gap = self.c - self.c_q();
            (gap > 0.0).then(|| gap.powf(1.0 / self.h_exponent()))
        }
    }
}

/// Canonical coefficients of the reduced profile equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedParams {
    pub p: f64,
    pub q: f64,
    pub b: f64,
    pub d: f64,
}

impl ReducedParams {
    pub fn new(p: f64, q: f64, b: f64, d: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && b.is_finite() && d.is_finite()) {
            return Err(Error::Domain("reduced parameters must be finite".into()));
        }
        if p < 1.0 {
            return Err(Error::Domain(format!("need p >= 1, got p = {p}")));
        }
        check_exponents(p, q)?;
        Ok(Self { p, q, b, d })
    }

    pub fn energy(&self) -> SlopeEnergy {
        SlopeEnergy::new(self.p, self.b)
    }

    /// The source in reduced variables: the pure power `|w|^(q-1) w`, or the
    /// identity when `p = 1`.
    pub fn nonlinearity(&self) -> Power {
        if self.p == 1.0 {
            Power::new(1.0, 1.0)
        } else {
            Power::new(self.q, self.p)
        }
    }

    /// Abscissa `a = h⁻¹(b + d)` of the stationary point `P₀`, when `b + d > 0`.
    pub fn stationary_amplitude(&self, nl: &dyn Nonlinearity) -> Option<f64> {
        let s = self.b + self.d;
        (s > 0.0).then(|| nl.h_inverse(s))
    }

    /// Root `m` of `E(m) = d` on the increasing branch of `E`: the slope at
    /// which the homoclinic orbit leaves the origin.
    pub fn saddle_slope(&self) -> Result<f64> {
        let e = self.energy();
        let floor = e.infimum();
        if self.d < floor {
            return Err(Error::Unsolvable(format!("d = {} below min E = {floor}", self.d)));
        }
        if e.minimum().is_none() && self.b + self.d <= 0.0 {
            return Err(Error::Unsolvable(format!(
                "E is increasing and d = {} <= E(0) = {}",
                self.d, -self.b
            )));
        }
        e.inverse_upper(self.d)
    }
}

/// Reduced coefficients `(b, d)`: `(-λ_q/β_q², c/β_q^p)` for `p > 1` and
/// `(1, c)` for `p = 1`.
pub fn reduce(params: &ProblemParams) -> ReducedParams {
    let (p, q) = (params.p, params.q);
    if p == 1.0 {
        return ReducedParams { p, q, b: 1.0, d: params.c };
    }
    let beta = params.beta();
    ReducedParams {
        p,
        q,
        b: -params.lambda() / (beta * beta),
        d: params.c / beta.powf(p),
    }
}

impl ProblemParams {
    /// Angular value `ω` corresponding to the reduced value `w`.
    pub fn lift_value(&self, w: f64) -> f64 {
        if self.p == 1.0 {
            signed_pow(w, 1.0 / self.q)
        } else {
            let beta = self.beta();
            beta.powf(beta) * w
        }
    }

    /// Ratio `τ / σ` between the reduced and angular variables.
    pub fn time_scale(&self) -> f64 {
        if self.p == 1.0 {
            1.0
        } else {
            self.beta()
        }
    }

    /// Reduced period `T_k` of the orbits generating profiles of least
    /// period `2π/k`.
    pub fn mode_period(&self, k: u32) -> f64 {
        2.0 * PI * self.time_scale() / k as f64
    }
}

/// Samples of a scalar function on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampled {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

/// Maps samples of a reduced profile `w(τ)` covering one period `period` to
/// the angular profile `ω(σ)`.
pub fn lift_profile(w: &Sampled, params: &ProblemParams, period: f64) -> Result<Sampled> {
    let n = w.t.len();
    if n < 2 || w.values.len() != n {
        return Err(Error::Domain("profile needs at least two matching samples".into()));
    }
    let span = w.t[n - 1] - w.t[0];
    if !(period > 0.0) || span < period * (1.0 - 1e-9) {
        return Err(Error::Domain(format!(
            "grid span {span} does not cover the period {period}"
        )));
    }
    let scale = params.time_scale();
    Ok(Sampled {
        t: w.t.iter().map(|t| t / scale).collect(),
        values: w.values.iter().map(|&v| params.lift_value(v)).collect(),
    })
}

/// Mode threshold `M_q = π β_q^(1-p) / (2 I)` where `I` integrates the
/// angular form of the limiting period over `(0, π/2)`. Zero when `c = c_q`.
pub fn m_q(params: &ProblemParams) -> Result<f64> {
    let p = params.p;
    if p <= 1.0 {
        return Err(Error::Parameter("M_q needs p > 1".into()));
    }
    let cq = params.c_q();
    let c = params.c;
    if c > cq {
        return Err(Error::Domain(format!("M_q needs c <= c_q = {cq}, got c = {c}")));
    }
    if c == cq {
        return Ok(0.0);
    }
    let beta = params.beta();
    let bp = beta.powf(p);
    // Numerator and denominator multiplied by cos²θ to avoid tan overflow.
    let integrand = |t: f64| {
        let (s, co) = t.sin_cos();
        let num = co * co + (p - 1.0) * s * s;
        let den = bp * (p - 1.0) * s * s + cq * co * co - c * co.powf(p);
        num / den
    };
    let i = integrate(integrand, 0.0, FRAC_PI_2, QuadConfig::abs(1e-12))?.value;
    Ok(PI * beta.powf(1.0 - p) / (2.0 * i))
}

/// `J(c) = ∫₀^{π/2} √(cos θ / (cos θ + 2c)) dθ`, for `c >= 0`.
pub fn p1_mode_integral(c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("need c >= 0, got {c}")));
    }
    let r = integrate(
        |t| {
            let co = t.cos();
            (co / (co + 2.0 * c)).sqrt()
        },
        0.0,
        FRAC_PI_2,
        QuadConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_intervals: 4000,
        },
    )?;
    Ok(r.value)
}

/// Inclusive integer range `lo..=hi`, empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeRange {
    pub lo: u32,
    pub hi: u32,
}

impl ModeRange {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.lo..=self.hi
    }

    fn empty() -> Self {
        Self { lo: 1, hi: 0 }
    }
}

/// Which integer modes carry nonconstant profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeBounds {
    /// Smallest sign-changing mode; every `k >= k_q` is present (`p > 1`).
    pub k_q: Option<u32>,
    pub m_q: Option<f64>,
    /// Modes of the positive nonconstant families.
    pub positive: ModeRange,
    /// For `p = 1`, the alternative range `k₁ = ⌊(π/2) J⌋ + 1` to `k₂`, the
    /// largest integer below `√(c+1)`.
    pub positive_literal: Option<ModeRange>,
}

fn largest_int_below(x: f64) -> u32 {
    if x <= 1.0 {
        0
    } else {
        (x.ceil() - 1.0) as u32
    }
}

fn smallest_int_above(x: f64) -> u32 {
    if x < 0.0 {
        0
    } else {
        x.floor() as u32 + 1
    }
}

pub fn mode_bounds(params: &ProblemParams) -> Result<ModeBounds> {
    if params.p == 1.0 {
        let c = params.c;
        if c <= 0.0 {
            return Ok(ModeBounds {
                k_q: None,
                m_q: None,
                positive: ModeRange::empty(),
                positive_literal: None,
            });
        }
        let j = p1_mode_integral(c)?;
        let positive = ModeRange {
            lo: smallest_int_above((1.0 + c).sqrt()).max(1),
            hi: largest_int_below(PI / (2.0 * j)),
        };
        let literal = ModeRange {
            lo: smallest_int_above(FRAC_PI_2 * j).max(1),
            hi: largest_int_below((c + 1.0).sqrt()),
        };
        return Ok(ModeBounds {
            k_q: None,
            m_q: None,
            positive,
            positive_literal: Some(literal),
        });
    }
    let cq = params.c_q();
    let (k_q, mq) = if params.c >= cq {
        (1, None)
    } else {
        let m = m_q(params)?;
        (smallest_int_above(m).max(1), Some(m))
    };
    let beta = params.beta();
    let p = params.p;
    let gap = params.c - cq;
    let positive = if gap > beta.powf(p - 1.0) / p {
        ModeRange {
            lo: 1,
            hi: largest_int_below((p * beta.powf(1.0 - p) * gap).sqrt()),
        }
    } else {
        ModeRange::empty()
    };
    Ok(ModeBounds {
        k_q: Some(k_q),
        m_q: mq,
        positive,
        positive_literal: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(beta_q(2.0, 3.0).unwrap(), 1.0);
        assert_eq!(beta_q(3.0, 4.0).unwrap(), 1.5);
        assert!(close(beta_q(1.0, 7.0).unwrap(), 1.0 / 7.0, 1e-15));
        assert!(matches!(beta_q(2.0, 1.0), Err(Error::Domain(_))));
        assert_eq!(lambda_q(2.0, 3.0).unwrap(), 1.0);
        assert_eq!(lambda_q(3.0, 5.0).unwrap(), 3.0);
        assert!(close(lambda_q(1.0, 4.0).unwrap(), -0.25, 1e-15));
        assert_eq!(c_q(2.0, 3.0).unwrap(), 1.0);
        assert_eq!(c_q(3.0, 3.0).unwrap(), 63.0);
        assert!(close(c_q(1.0, 2.5).unwrap(), -1.0, 1e-15));
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(&ProblemParams::new(2.0, 3.0, 0.0).unwrap());
        assert_eq!((r.b, r.d), (-1.0, 0.0));
        let r = reduce(&ProblemParams::new(2.0, 3.0, 2.0).unwrap());
        assert_eq!((r.b, r.d), (-1.0, 2.0));
        let r = reduce(&ProblemParams::new(1.0, 2.0, 5.0).unwrap());
        assert_eq!((r.b, r.d), (1.0, 5.0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProblemParams::new(0.5, 3.0, 0.0).is_err());
        assert!(ProblemParams::new(2.0, 0.9, 0.0).is_err());
        assert!(ProblemParams::new(2.0, 3.0, f64::NAN).is_err());
    }

    #[test]
    fn lift_identity_for_unit_beta() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 2.0 * PI / 100.0).collect();
        let v: Vec<f64> = t.iter().map(|x| x.sin()).collect();
        let w = Sampled { t: t.clone(), values: v.clone() };
        let params = ProblemParams::new(2.0, 3.0, 0.0).unwrap();
        let om = lift_profile(&w, &params, 2.0 * PI).unwrap();
        assert_eq!(om.t, t);
        assert_eq!(om.values, v);
        assert!(lift_profile(&w, &params, 7.0).is_err());
    }

    #[test]
    fn lift_p1_takes_qth_root() {
        let q = 0.5;
        let t: Vec<f64> = (1..100).map(|i| i as f64 * PI / 100.0).collect();
        let v: Vec<f64> = t.iter().map(|x| 2.0 * x.sin()).collect();
        let params = ProblemParams::new(1.0, q, 0.0).unwrap();
        let om = lift_profile(&Sampled { t: t.clone(), values: v }, &params, t[t.len() - 1] - t[0]).unwrap();
        for (s, o) in t.iter().zip(&om.values) {
            assert!(close(*o, (2.0 * s.sin()).powf(1.0 / q), 1e-14));
        }
    }

    #[test]
    fn lift_constant_matches_constant_solution() {
        let params = ProblemParams::new(3.0, 4.0, 70.0).unwrap();
        let r = reduce(&params);
        let a = (r.b + r.d).powf(1.0 / params.h_exponent());
        let w = Sampled { t: vec![0.0, 10.0], values: vec![a, a] };
        let om = lift_profile(&w, &params, 10.0).unwrap();
        let expect = params.constant_solution().unwrap();
        assert!(close(om.values[0], expect, 1e-12));
    }

    #[test]
    fn m_q_examples() {
        let m = |p, q| m_q(&ProblemParams::new(p, q, 0.0).unwrap()).unwrap();
        assert!(close(m(2.0, 3.0), 1.0, 1e-10));
        assert!(close(m(2.0, 2.0), 2.0, 1e-10));
        assert!((m(3.0, 5.0) - 1.580).abs() < 5e-4);
        assert_eq!(m(1.5, 2.0), 0.0);
        assert!(m_q(&ProblemParams::new(2.0, 3.0, 5.0).unwrap()).is_err());
    }

    #[test]
    fn mode_bound_examples() {
        let mb = mode_bounds(&ProblemParams::new(2.0, 3.0, 9.0).unwrap()).unwrap();
        assert_eq!(mb.positive, ModeRange { lo: 1, hi: 3 });
        assert_eq!(mb.k_q, Some(1));
        let mb = mode_bounds(&ProblemParams::new(2.0, 3.0, 0.0).unwrap()).unwrap();
        assert_eq!(mb.k_q, Some(2));
        assert!(mb.positive.is_empty());
        let mb = mode_bounds(&ProblemParams::new(1.0, 0.5, 3.0).unwrap()).unwrap();
        assert_eq!(mb.positive.iter().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn saddle_slope_cases() {
        let r = ReducedParams::new(2.0, 3.0, -1.0, 2.0).unwrap();
        assert!(close(r.saddle_slope().unwrap(), 1.0, 1e-12));
        let r = ReducedParams::new(3.0, 4.0, 0.8, 0.0).unwrap();
        assert!(close(r.saddle_slope().unwrap(), (0.8f64 / 2.0).sqrt(), 1e-10));
        let r = ReducedParams::new(2.0, 3.0, -1.0, 0.5).unwrap();
        assert!(matches!(r.saddle_slope(), Err(Error::Unsolvable(_))));
    }
}
