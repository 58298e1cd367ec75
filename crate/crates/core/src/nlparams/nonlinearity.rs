/// A source term `f` satisfying the structural assumptions used throughout:
/// odd, `f(s) ~ s^q` at zero, superlinear relative to `s^(p-1)` at infinity,
/// and `h(s) = f(s) / s^(p-1)` strictly increasing on `(0, ∞)`.
///
/// Implementors supply `f`, its derivative, its antiderivative (vanishing at
/// zero), `h` and the inverse of `h` on `(0, ∞)`.
pub trait Nonlinearity: Send + Sync + std::fmt::Debug {
    fn f(&self, s: f64) -> f64;
    fn fprime(&self, s: f64) -> f64;
    /// `F(s) = ∫_0^s f`.
    fn antiderivative(&self, s: f64) -> f64;
    fn h(&self, s: f64) -> f64;
    /// Inverse of `h` restricted to `(0, ∞)`.
    fn h_inverse(&self, t: f64) -> f64;

    fn h_prime(&self, s: f64) -> f64 {
        let step = 1e-6 * s.abs().max(1e-3);
        (self.h(s + step) - self.h(s - step)) / (2.0 * step)
    }

    /// `Some(q)` when the source is the pure power `|s|^(q-1) s`; enables the
    /// regularized chart that desingularizes the origin.
    fn power_exponent(&self) -> Option<f64> {
        None
    }
}

/// The pure power `f(s) = |s|^(q-1) s` seen through the p-homogeneous
/// quotient `h(s) = |s|^(q+1-p) sign(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    pub q: f64,
    pub p: f64,
}

impl Power {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    /// Exponent of `h`, i.e. `q + 1 - p`.
    pub fn h_exponent(&self) -> f64 {
        self.q + 1.0 - self.p
    }
}

fn signed_pow(s: f64, e: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(e).copysign(s)
    }
}

impl Nonlinearity for Power {
    fn f(&self, s: f64) -> f64 {
        signed_pow(s, self.q)
    }

    fn fprime(&self, s: f64) -> f64 {
        self.q * s.abs().powf(self.q - 1.0)
    }

    fn antiderivative(&self, s: f64) -> f64 {
        s.abs().powf(self.q + 1.0) / (self.q + 1.0)
    }

    fn h(&self, s: f64) -> f64 {
        signed_pow(s, self.h_exponent())
    }

    fn h_inverse(&self, t: f64) -> f64 {
        signed_pow(t, 1.0 / self.h_exponent())
    }

    fn h_prime(&self, s: f64) -> f64 {
        let e = self.h_exponent();
        e * s.abs().powf(e - 1.0)
    }

    fn power_exponent(&self) -> Option<f64> {
        Some(self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_inverse_round_trip_on_grid() {
        for &(q, p) in &[(3.0, 2.0), (0.7, 1.5), (5.0, 3.0), (1.0, 1.0)] {
            let nl = Power::new(q, p);
            for i in 1..200 {
                let s = 0.013 * i as f64;
                let back = nl.h_inverse(nl.h(s));
                assert!((back - s).abs() <= 1e-12 * s.max(1.0), "q={q} p={p} s={s}");
            }
        }
    }

    #[test]
    fn h_strictly_increasing() {
        let nl = Power::new(2.5, 1.7);
        let mut prev = nl.h(0.0);
        for i in 1..500 {
            let v = nl.h(0.01 * i as f64);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_default_finite_difference() {
        #[derive(Debug)]
        struct Wrapped(Power);
        impl Nonlinearity for Wrapped {
            fn f(&self, s: f64) -> f64 {
                self.0.f(s)
            }
            fn fprime(&self, s: f64) -> f64 {
                self.0.fprime(s)
            }
            fn antiderivative(&self, s: f64) -> f64 {
                self.0.antiderivative(s)
            }
            fn h(&self, s: f64) -> f64 {
                self.0.h(s)
            }
            fn h_inverse(&self, t: f64) -> f64 {
                self.0.h_inverse(t)
            }
        }
        let p = Power::new(3.0, 1.5);
        let w = Wrapped(p);
        for s in [0.3, 1.0, 2.7] {
            assert!((w.h_prime(s) - p.h_prime(s)).abs() < 1e-7 * p.h_prime(s));
        }
        assert_eq!(w.power_exponent(), None);
    }

    #[test]
    fn odd_and_antiderivative() {
        let nl = Power::new(2.0, 2.0);
        assert_eq!(nl.f(-1.5), -nl.f(1.5));
        assert!((nl.antiderivative(2.0) - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(nl.h(0.0), 0.0);
    }
}
