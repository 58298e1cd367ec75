use std::f64::consts::PI;

use proptest::prelude::*;
use sepsol::nlparams::{lambda_q, lambda_q_expanded, m_q, phi, reduce, Power, ProblemParams, ReducedParams};
use sepsol::odeint::IntegratorConfig;
use sepsol::periodfn::{admissible_interval, p1_period_quadrature, period_sign_changing, tbar_p1};
use sepsol::solset::{sector_beta, sector_exists};
use sepsol::vfield::{field_polar, field_slope, field_wy, pushforward_slope, PhasePoint, SlopeState};

fn exponents() -> impl Strategy<Value = (f64, f64)> {
    (1.01f64..5.0).prop_flat_map(|p| (Just(p), (p - 0.99)..(p + 9.0)))
}

fn reduced() -> impl Strategy<Value = ReducedParams> {
    (exponents(), -2.0f64..2.0, -2.0f64..2.0).prop_map(|((p, q), b, d)| ReducedParams::new(p, q, b, d).unwrap())
}

fn max_rel(a: [f64; 2], b: [f64; 2]) -> f64 {
    let scale = a.iter().chain(&b).fold(0f64, |m, v| m.max(v.abs()));
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) / scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn lambda_forms_agree((p, q) in exponents()) {
        let a = lambda_q(p, q).unwrap();
        let b = lambda_q_expanded(p, q).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()));
    }

    #[test]
    fn positive_orbits_iff_above_critical_coefficient((p, q) in exponents(), t in -5.0f64..5.0) {
        let params = ProblemParams::new(p, q, 0.0).unwrap();
        let cq = params.c_q();
        let c = cq + t * (1.0 + cq.abs());
        let rp = reduce(&ProblemParams::new(p, q, c).unwrap());
        prop_assert_eq!(rp.b + rp.d > 0.0, c > cq);
    }

    #[test]
    fn field_is_equivariant(rp in reduced(), w in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(w != 0.0 || y != 0.0);
        let nl = Power::new(rp.q, rp.p);
        let f = |w: f64, y: f64| field_wy(PhasePoint { w, y }, &rp, &nl).unwrap().value;
        let base = f(w, y);
        prop_assert_eq!(f(-w, -y), [-base[0], -base[1]]);
        prop_assert_eq!(f(w, -y), [-base[0], base[1]]);
    }

    #[test]
    fn charts_agree(rp in reduced(), w in 0.05f64..3.0, y in 0.05f64..3.0) {
        let nl = Power::new(rp.q, rp.p);
        let [dw, dy] = field_wy(PhasePoint { w, y }, &rp, &nl).unwrap().value;
        let rho = w.hypot(y);
        let polar = field_polar(y.atan2(w), rho, &rp, &nl).unwrap();
        let pushed = [(w * dy - y * dw) / (rho * rho), (w * dw + y * dy) / rho];
        prop_assert!(max_rel(polar, pushed) < 1e-9);
        let direct = field_slope(SlopeState { w, u: phi(y / w, rp.p) }, &rp, &nl).unwrap().value;
        let pushed = pushforward_slope(PhasePoint { w, y }, &rp, &nl).unwrap();
        prop_assert!(max_rel(direct, pushed) < 1e-9);
    }

    #[test]
    fn sector_exponent_decreases_with_opening(p in 1.01f64..6.0, a in 0.01f64..6.2, b in 0.01f64..6.2) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(sector_beta(p, hi).unwrap() < sector_beta(p, lo).unwrap());
    }

    #[test]
    fn sector_matches_closed_form_at_p2(theta in 0.01f64..6.2, q in 1.05f64..12.0) {
        let r = sector_exists(2.0, q, theta).unwrap();
        prop_assert!((r.beta_s - PI / theta).abs() <= 1e-12 * r.beta_s);
        prop_assert_eq!(r.exists, 2.0 / (q - 1.0) < PI / theta);
    }

    #[test]
    fn unconditional_flag_implies_existence((p, q) in exponents(), theta in 0.01f64..6.27) {
        let r = sector_exists(p, q, theta).unwrap();
        prop_assert_eq!(r.unconditional, p < 2.0 && q >= 2.0 * (p - 1.0) / (2.0 - p));
        if r.unconditional {
            prop_assert!(r.exists);
        }
    }

    #[test]
    fn mode_threshold_grows_as_coefficient_drops((p, q) in exponents(), s in 0.01f64..3.0, t in 0.01f64..3.0) {
        prop_assume!((s - t).abs() > 1e-6);
        let cq = ProblemParams::new(p, q, 0.0).unwrap().c_q();
        let m = |gap: f64| m_q(&ProblemParams::new(p, q, cq - gap * (1.0 + cq.abs())).unwrap()).unwrap();
        let (near, far) = if s < t { (s, t) } else { (t, s) };
        prop_assert!(m(far) >= m(near));
    }

    #[test]
    fn unit_coefficient_p1_period_is_constant(frac in 0.01f64..0.99, q in 0.2f64..4.0) {
        let rp = reduce(&ProblemParams::new(1.0, q, 0.0).unwrap());
        let (lo, hi) = admissible_interval(&rp).unwrap();
        let t = p1_period_quadrature(lo + frac * (hi - lo), &rp).unwrap();
        prop_assert!((t - 2.0 * PI).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn boundary_limit_forms_agree(d in 0.0f64..6.0) {
        let tb = tbar_p1(d).unwrap();
        prop_assert!((tb.angle_form - tb.slope_form).abs() <= 1e-9);
    }

    #[test]
    fn period_methods_agree(p in 2.0f64..4.0, extra in 0.3f64..5.0, log_nu in -1.5f64..1.5, b in -2.0f64..-0.1) {
        let rp = ReducedParams::new(p, p - 1.0 + extra, b, 0.0).unwrap();
        let nl = Power::new(rp.q, p);
        let s = period_sign_changing(10f64.powf(log_nu), &rp, &nl, &IntegratorConfig::default()).unwrap();
        prop_assert!(s.check.is_some());
        prop_assert!(s.methods_agree(), "{s:?}");
    }
}
