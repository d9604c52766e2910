//! Property tests for the quadrature and operator layers.

use kpztt::airy::g_weight;
use kpztt::opcalc::{hankel_op, rank_one, HalfLineVector};
use kpztt::quad::{circle_rule, gauss_legendre, half_line_rule};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// An n-point Gauss-Legendre rule integrates random polynomials of
    /// degree up to 2n - 1 exactly.
    #[test]
    fn gauss_legendre_polynomial_exactness(
        n in 2usize..8,
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..8),
        a in -3.0f64..0.0,
        width in 0.5f64..4.0,
    ) {
        let b = a + width;
        let deg = (coeffs.len() - 1).min(2 * n - 1);
        let poly = |x: f64| -> f64 {
            coeffs[..=deg].iter().rev().fold(0.0, |acc, &c| acc * x + c)
        };
        let (xs, ws) = gauss_legendre(n, a, b).unwrap();
        let got: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * poly(x)).sum();
        // antiderivative evaluated at the endpoints
        let anti = |x: f64| -> f64 {
            coeffs[..=deg]
                .iter()
                .enumerate()
                .map(|(k, &c)| c * x.powi(k as i32 + 1) / (k as f64 + 1.0))
                .sum()
        };
        let exact = anti(b) - anti(a);
        let scale = 1.0 + exact.abs();
        prop_assert!((got - exact).abs() < 1e-12 * scale);
    }

    /// The circle rule integrates u^k exactly to δ_{k,-1} for |k| < m - 1.
    #[test]
    fn circle_rule_monomials(k in -20i32..20, m_half in 16usize..48) {
        let rule = circle_rule(2.0, 2 * m_half).unwrap();
        let got = rule.integrate(|u| u.powi(k));
        let expect = if k == -1 { 1.0 } else { 0.0 };
        // roundoff scales with the magnitude of the integrand on the circle
        let tol = 1e-14 * (1.0 + 2.0f64.powi(k.max(0) + 1));
        prop_assert!((got.re - expect).abs() < tol);
        prop_assert!(got.im.abs() < tol);
    }

    /// G-weight identities hold for arbitrary arguments.
    #[test]
    fn g_weight_symmetry(
        xi in -3.0f64..3.0,
        eta in -1.0f64..1.0,
        re in -1.5f64..1.5,
        im in -1.5f64..1.5,
    ) {
        let z = Complex64::new(re, im);
        let lhs = g_weight(xi, eta, z) * g_weight(xi, eta, -z);
        let rhs = (2.0 * eta * z * z).exp();
        prop_assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    /// Trace identities of the discretized operator calculus: cyclicity
    /// and the rank-one determinant.
    #[test]
    fn operator_trace_identities(rate in 0.4f64..2.0, shift in 0.0f64..1.5) {
        let rule = Arc::new(half_line_rule(24, 0.0).unwrap());
        let a = hankel_op(move |v| (-rate * v).exp(), &rule, "A");
        let b = hankel_op(move |v| (-(v + shift)).exp() * (v * 0.7).cos(), &rule, "B");
        let tp = a.trace_product(&b).unwrap();
        let tq = b.trace_product(&a).unwrap();
        prop_assert!((tp - tq).abs() < 1e-11 * (1.0 + tp.abs()));
        // det(I - u ⊗ v) = 1 - <v, u>
        let u = HalfLineVector::from_fn(rule.clone(), move |x| (-rate * x).exp());
        let v = HalfLineVector::from_fn(rule.clone(), move |x| (-(x + shift)).exp());
        let k = rank_one(&u, &v).unwrap();
        let inner = kpztt::opcalc::inner(&rule, &u.values, &v.values);
        let det = k.scale(-1.0).fredholm_det();
        prop_assert!((det - (1.0 - inner)).abs() < 1e-11);
    }

    /// Philox determinism and stream separation for arbitrary seeds.
    #[test]
    fn philox_streams(seed in any::<u64>(), stream in 0u64..1000) {
        use kpztt::lppsim::Philox2x64;
        let mut a = Philox2x64::new(seed, stream);
        let mut b = Philox2x64::new(seed, stream);
        for _ in 0..16 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Philox2x64::new(seed, stream + 1);
        let differs = (0..16).any(|_| a.next_u64() != c.next_u64());
        prop_assert!(differs);
    }
}
