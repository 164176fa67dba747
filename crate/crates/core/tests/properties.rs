use mlexp::analysis::discrepancy_table;
use mlexp::{
    complex_exp, gamma, h_exp, h_series, j_exp, j_series, log_gamma, principal_root, recip_gamma, rl_deriv_power,
    ComplexScalar, PowerTerm, TruncationPolicy,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

fn close(a: ComplexScalar, b: ComplexScalar, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1e-300)
}

proptest! {
    #[test]
    fn gamma_recurrence(z in 0.05f64..30.0) {
        let g = gamma(z).unwrap();
        let g1 = gamma(z + 1.0).unwrap();
        prop_assert!((g1 - z * g).abs() <= 1e-12 * g1.abs());
    }

    #[test]
    fn gamma_reflection(z in 0.05f64..0.95) {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = std::f64::consts::PI / (std::f64::consts::PI * z).sin();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs());
    }

    #[test]
    fn recip_gamma_inverts_gamma(z in -9.9f64..40.0) {
        prop_assume!((z - z.round()).abs() > 1e-3 || z > 0.5);
        let g = gamma(z).unwrap();
        prop_assert!((recip_gamma(z) * g - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn log_gamma_matches_gamma(z in 0.1f64..150.0) {
        let g = gamma(z).unwrap();
        prop_assert!((log_gamma(z).unwrap() - g.ln()).abs() <= 1e-12 * g.ln().abs().max(1.0));
    }

    #[test]
    fn principal_root_powers_back(re in -10.0f64..10.0, im in -10.0f64..10.0, m in 1u32..8) {
        let lambda = c(re, im);
        prop_assume!(lambda.norm() > 1e-6);
        let r = principal_root(lambda, m).unwrap();
        prop_assert!(close(r.powu(m), lambda, 1e-13));
        let arg = r.arg();
        prop_assert!(arg > -std::f64::consts::PI / f64::from(m) - 1e-15);
        prop_assert!(arg <= std::f64::consts::PI / f64::from(m) + 1e-15);
    }

    #[test]
    fn exp_is_additive(a in -20.0f64..20.0, b in -20.0f64..20.0, t in -3.0f64..3.0) {
        let lhs = complex_exp(c(a + b, t)).unwrap();
        let rhs = complex_exp(c(a, 0.0)).unwrap() * complex_exp(c(b, t)).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn order_one_series_is_the_exponential(re in -2.0f64..2.0, im in -2.0f64..2.0, x in 0.01f64..3.0) {
        let rho = c(re, im);
        let policy = TruncationPolicy::default();
        let h = h_series(x, rho, 1, &policy).unwrap();
        prop_assume!(rho.re >= 0.0 || (rho * x).norm() < 2.0);
        prop_assert!(close(h.value, complex_exp(rho * x).unwrap(), 1e-12));
    }

    #[test]
    fn power_rule_composes(beta in -0.9f64..3.0, a1 in 0.05f64..0.5, a2 in 0.05f64..0.5) {
        // D^{a1} D^{a2} x^beta = D^{a1 + a2} x^beta whenever the inner result
        // is not annihilated and stays integrable
        let t = PowerTerm::new(c(1.0, 0.0), beta);
        let inner = rl_deriv_power(t, a2).unwrap();
        prop_assume!(!inner.is_zero() && inner.exponent > -1.0);
        let twice = rl_deriv_power(inner, a1).unwrap();
        let once = rl_deriv_power(t, a1 + a2).unwrap();
        prop_assert!((twice.exponent - once.exponent).abs() <= 1e-12);
        prop_assert!((twice.coeff - once.coeff).norm() <= 1e-11 * once.coeff.norm().max(1.0));
    }

    #[test]
    fn representation_tends_to_series(n in 1u32..4, x in 0.5f64..3.0) {
        let policy = TruncationPolicy::default();
        let rho = c(0.8, 0.0);
        let s = h_series(x, rho, n, &policy).unwrap().value;
        let coarse = (h_exp(x, 0.2 * x, rho, n, &policy).unwrap().value - s).norm();
        let fine = (h_exp(x, 0.05 * x, rho, n, &policy).unwrap().value - s).norm();
        prop_assert!(fine <= coarse || coarse <= 1e-13 * s.norm());
    }

    #[test]
    fn j_exp_at_the_shift_is_homogeneous(s in 0u32..3, x in 0.2f64..3.0) {
        let policy = TruncationPolicy::default();
        let rho = c(0.9, -0.2);
        let v = j_exp(s, x, x, rho, 3, &policy).unwrap();
        prop_assert_eq!(v.terms_used, 0);
        let series = j_series(s, x, rho.powu(3), 3, &policy).unwrap();
        prop_assert!(series.value.norm() > 0.0);
    }

    #[test]
    fn tighter_tolerance_never_uses_fewer_terms(x in 0.1f64..5.0, n in 1u32..5) {
        let loose = TruncationPolicy::default().with_rel_tol(1e-8).unwrap();
        let tight = TruncationPolicy::default();
        let rho = c(1.0, 0.3);
        let a = h_series(x, rho, n, &loose).unwrap();
        let b = h_series(x, rho, n, &tight).unwrap();
        prop_assert!(b.terms_used >= a.terms_used);
        prop_assert!(close(a.value, b.value, 1e-7));
    }
}

#[test]
fn discrepancy_rows_follow_input_order() {
    let policy = TruncationPolicy::default();
    let xs = [3.0, 1.0, 2.0];
    let rows = discrepancy_table(2, c(1.0, 0.0), &xs, &[0.1, 0.4, 0.2], &policy).unwrap();
    let got: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.x0)).collect();
    let want: Vec<(f64, f64)> = xs.iter().flat_map(|&x| [0.4, 0.2, 0.1].map(|x0| (x, x0))).collect();
    assert_eq!(got, want);
    assert!(rows.iter().all(|r| r.is_ok()));
}
