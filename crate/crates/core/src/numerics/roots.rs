//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method (bisection safeguarding secant and inverse quadratic steps).
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them vanish).
/// Terminates when the bracket is narrower than `xtol + 4 eps |x|`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "f({a}) = {fa}, f({b}) = {fb} do not bracket a root"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Bracket(format!("f({b}) is NaN inside bracket")));
        }
    }
    Err(Error::RootNotConverged(MAX_ITER))
}

/// Grows `[lo, hi]` geometrically upward until `f` changes sign, keeping
/// `lo` fixed. Returns the bracket.
pub fn grow_upper<F: FnMut(f64) -> f64>(mut f: F, lo: f64, mut hi: f64, factor: f64, max_grow: usize) -> Result<(f64, f64)> {
    let flo = f(lo);
    if flo == 0.0 {
        return Ok((lo, lo));
    }
    let mut last = lo;
    for _ in 0..max_grow {
        let fhi = f(hi);
        if fhi == 0.0 || fhi.signum() != flo.signum() {
            return Ok((last, hi));
        }
        last = hi;
        hi = lo + (hi - lo) * factor;
    }
    Err(Error::Bracket(format!(
        "no sign change found growing from {lo} (last tried {hi})"
    )))
}

/// Solves `g(x) = target` for a monotone `g` on `[lo, ∞)`, growing the
/// upper end of the bracket geometrically from `lo + initial_width`.
pub fn monotone_inverse<G: FnMut(f64) -> f64>(mut g: G, target: f64, lo: f64, initial_width: f64, xtol: f64) -> Result<f64> {
    let mut h = |x: f64| g(x) - target;
    let (a, b) = grow_upper(&mut h, lo, lo + initial_width, 2.0, 2000)?;
    if a == b {
        return Ok(a);
    }
    brent(h, a, b, xtol)
}
