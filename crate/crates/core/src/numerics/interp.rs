//! Monotonicity-preserving piecewise cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Piecewise cubic Hermite interpolant on strictly increasing knots.
///
/// Knot slopes are either supplied (exact derivatives from a vector field)
/// or estimated; in both cases they are limited with the Fritsch-Carlson
/// conditions so that monotone data yields a monotone interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>, slopes: Option<Vec<f64>>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Domain("interpolation needs >= 2 matching knots".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("interpolation knots must increase strictly".into()));
        }
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = match slopes {
            Some(s) if s.len() == n => s,
            Some(_) => return Err(Error::Domain("slope count mismatch".into())),
            None => {
                let mut s = vec![0.0; n];
                s[0] = delta[0];
                s[n - 1] = delta[n - 2];
                for i in 1..n - 1 {
                    s[i] = if delta[i - 1] * delta[i] <= 0.0 {
                        0.0
                    } else {
                        0.5 * (delta[i - 1] + delta[i])
                    };
                }
                s
            }
        };
        for i in 0..n - 1 {
            let d = delta[i];
            if d == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            // Wrong-signed slopes break monotonicity outright.
            if m[i] * d < 0.0 {
                m[i] = 0.0;
            }
            if m[i + 1] * d < 0.0 {
                m[i + 1] = 0.0;
            }
            let a = m[i] / d;
            let b = m[i + 1] / d;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * d;
                m[i + 1] = t * b * d;
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Evaluates the interpolant, clamping `t` to the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| t * t * t + t).collect();
        let m: Vec<f64> = x.iter().map(|t| 3.0 * t * t + 1.0).collect();
        let c = MonotoneCubic::new(x, y, Some(m)).unwrap();
        for t in [0.05, 0.33, 0.77, 0.999] {
            assert!((c.eval(t) - (t * t * t + t)).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_step_data_stays_monotone() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.0, 1.0, 1.0, 1.0];
        let c = MonotoneCubic::new(x, y, None).unwrap();
        let mut prev = c.eval(0.0);
        for i in 1..=400 {
            let v = c.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0], None).is_err());
    }
}
