//! Functions of the phase-plane slope `ξ = w'/w`.
//!
//! `u = phi(ξ) = (1+ξ²)^((p-2)/2) ξ` is the transformed slope, `varphi` its
//! inverse, and `E(ξ) = ((p-1)ξ² - b)(1+ξ²)^(p/2-1)` drives the slope
//! equation `u' = -E(varphi(u)) - h(w) + d`.

use crate::error::{Error, Result};
use crate::numerics::{brent, grow_upper, integrate, QuadConfig};

/// `u = phi(ξ)`; odd in `ξ`.
pub fn phi(xi: f64, p: f64) -> f64 {
    if p == 2.0 {
        return xi;
    }
    (1.0 + xi * xi).powf(0.5 * (p - 2.0)) * xi
}

pub fn phi_prime(xi: f64, p: f64) -> f64 {
    let s = 1.0 + xi * xi;
    s.powf(0.5 * (p - 4.0)) * (1.0 + (p - 1.0) * xi * xi)
}

/// Inverse of [`phi`]. Closed forms for `p ∈ {1, 2}`, bracketed root finding
/// otherwise. For `p = 1` the range of `phi` is `(-1, 1)`.
pub fn varphi(u: f64, p: f64) -> Result<f64> {
    if p == 2.0 || u == 0.0 {
        return Ok(u);
    }
    if p == 1.0 {
        if u.abs() >= 1.0 {
            return Err(Error::Domain(format!("varphi at p = 1 needs |u| < 1, got {u}")));
        }
        return Ok(u / (1.0 - u * u).sqrt());
    }
    if !u.is_finite() {
        return Err(Error::Domain(format!("varphi of non-finite u = {u}")));
    }
    let target = u.abs();
    let g = |xi: f64| phi(xi, p) - target;
    // phi(ξ) >= ξ for p >= 2 and phi(ξ) <= ξ for p < 2.
    let (lo, hi) = if p > 2.0 {
        (0.0, target)
    } else {
        grow_upper(g, target, 2.0 * target + 1.0, 2.0, 2000)?
    };
    let mut xi = brent(g, lo, hi, 1e-300)?;
    // One Newton polish step to reach full precision.
    let slope = phi_prime(xi, p);
    if slope > 0.0 {
        let next = xi - g(xi) / slope;
        if next >= lo && next <= hi {
            xi = next;
        }
    }
    Ok(xi.copysign(u))
}

/// `Psi(u) = ∫_0^u varphi(s) ds` by adaptive quadrature (absolute tolerance
/// `1e-12`).
pub fn psi(u: f64, p: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let mut err = None;
    let r = integrate(
        |s| match varphi(s, p) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        0.0,
        u,
        QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-14,
            max_intervals: 4000,
        },
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value)
}

/// Coefficient `B(ξ)` of `u'` in the second-order equation satisfied by `u`
/// along the regularized flow (pure power source).
pub fn b_coeff(xi: f64, p: f64, q: f64, b: f64) -> f64 {
    let x2 = xi * xi;
    ((p - 2.0) * b + q - 3.0 * (p - 1.0) + (q + 1.0 - 2.0 * p) * (p - 1.0) * x2) / (1.0 + (p - 1.0) * x2) * xi
}

/// Interior minimum of `E` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EMinimum {
    pub eta: f64,
    pub value: f64,
}

/// The slope function `E(ξ) = ((p-1)ξ² - b)(1+ξ²)^(p/2-1)` for fixed `(p, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEnergy {
    pub p: f64,
    pub b: f64,
}

impl SlopeEnergy {
    pub fn new(p: f64, b: f64) -> Self {
        Self { p, b }
    }

    pub fn value(&self, xi: f64) -> f64 {
        let p = self.p;
        let x2 = xi * xi;
        ((p - 1.0) * x2 - self.b) * (1.0 + x2).powf(0.5 * p - 1.0)
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        let p = self.p;
        let x2 = xi * xi;
        (p * (p - 1.0) * x2 + 2.0 * (p - 1.0) - (p - 2.0) * self.b) * (1.0 + x2).powf(0.5 * (p - 4.0)) * xi
    }

    /// `E` is increasing on `(0, ∞)` exactly when `(p-2) b <= 2(p-1)`.
    pub fn is_increasing(&self) -> bool {
        (self.p - 2.0) * self.b <= 2.0 * (self.p - 1.0)
    }

    /// The interior minimum `(η, E(η))` when `(p-2) b > 2(p-1)`.
    pub fn minimum(&self) -> Option<EMinimum> {
        let p = self.p;
        if p <= 1.0 || self.is_increasing() {
            return None;
        }
        let eta = (((p - 2.0) * self.b - 2.0 * (p - 1.0)) / (p * (p - 1.0))).sqrt();
        let base = (p - 2.0) * (self.b + p - 1.0) / (p * (p - 1.0));
        let value = -(2.0 * (p - 1.0) / (p - 2.0)) * base.powf(0.5 * p);
        Some(EMinimum { eta, value })
    }

    /// Smallest value of `E` on `[0, ∞)`.
    pub fn infimum(&self) -> f64 {
        self.minimum().map(|m| m.value).unwrap_or(-self.b)
    }

    /// Root of `E(ξ) = t` on the increasing branch (`ξ >= η`, or `ξ >= 0` when
    /// `E` is monotone).
    pub fn inverse_upper(&self, t: f64) -> Result<f64> {
        let lo = self.minimum().map(|m| m.eta).unwrap_or(0.0);
        let elo = self.value(lo);
        if t < elo {
            return Err(Error::Domain(format!("E^-1({t}) below min E = {elo}")));
        }
        if t == elo {
            return Ok(lo);
        }
        let g = |xi: f64| self.value(xi) - t;
        let (a, b) = grow_upper(g, lo, lo + 1.0, 2.0, 2000)?;
        if a == b {
            return Ok(a);
        }
        brent(g, a, b, 1e-300)
    }

    /// Root of `E(ξ) = t` on the decreasing branch `[0, η]`; requires an
    /// interior minimum and `E(η) <= t <= -b`.
    pub fn inverse_lower(&self, t: f64) -> Result<f64> {
        let m = self
            .minimum()
            .ok_or_else(|| Error::Domain("E is monotone; no decreasing branch".into()))?;
        if t < m.value || t > -self.b {
            return Err(Error::Domain(format!(
                "E^-1 lower branch needs {} <= t <= {}, got {t}",
                m.value, -self.b
            )));
        }
        brent(|xi| self.value(xi) - t, 0.0, m.eta, 1e-300)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_is_identity_at_p2() {
        for x in [-3.0, 0.0, 0.4, 10.0] {
            assert_eq!(phi(x, 2.0), x);
            assert_eq!(varphi(x, 2.0).unwrap(), x);
        }
    }

    #[test]
    fn varphi_p1_closed_form() {
        assert!((varphi(0.6, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(varphi(1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn varphi_inverts_phi_p3() {
        let x = varphi(phi(2.0, 3.0), 3.0).unwrap();
        assert!((x - 2.0).abs() < 1e-10);
    }

    #[test]
    fn varphi_inverts_phi_various_p() {
        for &p in &[1.2, 1.5, 1.9, 2.5, 3.0, 4.5] {
            for &xi in &[-7.0, -0.3, 1e-6, 0.5, 1.0, 3.0, 40.0] {
                let back = varphi(phi(xi, p), p).unwrap();
                assert!((back - xi).abs() <= 1e-10 * xi.abs().max(1.0), "p={p} xi={xi} back={back}");
            }
        }
    }

    #[test]
    fn psi_quadratic_at_p2() {
        for u in [0.1, 1.0, 2.5] {
            assert!((psi(u, 2.0).unwrap() - u * u / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_matches_integration_by_parts() {
        // Psi(u) = ξ u - ((1+ξ²)^(p/2) - 1)/p with ξ = varphi(u).
        for &p in &[1.3, 1.0, 3.0] {
            for &u in &[0.2, 0.7, 0.95] {
                let xi = varphi(u, p).unwrap();
                let closed = xi * u - ((1.0 + xi * xi).powf(p / 2.0) - 1.0) / p;
                assert!((psi(u, p).unwrap() - closed).abs() < 1e-11, "p={p} u={u}");
            }
        }
    }

    #[test]
    fn e_examples() {
        assert_eq!(SlopeEnergy::new(2.0, 1.0).value(1.0), 0.0);
        let e = SlopeEnergy::new(2.0, -1.0);
        assert!((e.inverse_upper(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(e.inverse_upper(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn e_prime_matches_central_difference() {
        for &(p, b) in &[(3.0, 0.8), (3.0, 10.0), (1.4, -2.0), (2.0, 3.0), (4.2, 1.0)] {
            let e = SlopeEnergy::new(p, b);
            let xi = 0.7;
            let h = 1e-5;
            let fd = (e.value(xi + h) - e.value(xi - h)) / (2.0 * h);
            assert!((e.derivative(xi) - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "p={p} b={b}");
        }
    }

    #[test]
    fn eta_min_cases() {
        assert!(SlopeEnergy::new(2.0, 100.0).minimum().is_none());
        let e = SlopeEnergy::new(3.0, 10.0);
        let m = e.minimum().unwrap();
        assert!((m.eta - 1.0).abs() < 1e-15);
        // Closed form of the minimum agrees with direct evaluation.
        assert!((m.value - e.value(m.eta)).abs() < 1e-12 * m.value.abs());
        assert!((m.value - (-8.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn inverse_branches_round_trip() {
        let e = SlopeEnergy::new(3.0, 10.0);
        let m = e.minimum().unwrap();
        for &xi in &[0.1, 0.5, 0.9] {
            let t = e.value(xi);
            assert!((e.inverse_lower(t).unwrap() - xi).abs() < 1e-10);
        }
        for &xi in &[1.1, 2.0, 15.0] {
            let t = e.value(xi);
            assert!((e.inverse_upper(t).unwrap() - xi).abs() < 1e-10 * xi);
        }
        assert_eq!(e.inverse_upper(m.value).unwrap(), m.eta);
    }

    #[test]
    fn b_coeff_vanishes_on_integrable_line() {
        for &p in &[1.3, 2.0, 3.7] {
            for &xi in &[0.0, 0.4, 5.0] {
                assert!(b_coeff(xi, p, 2.0 * p - 1.0, 1.0).abs() < 1e-13);
            }
        }
        assert_eq!(b_coeff(0.0, 2.7, 4.0, 3.0), 0.0);
        // p = 2, b = 0, q = 3: numerator (0 + 3 - 3 + 0) = 0.
        assert_eq!(b_coeff(1.3, 2.0, 3.0, 0.0), 0.0);
    }
}
