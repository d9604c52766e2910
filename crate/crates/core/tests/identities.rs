//! Cross-module identity checks that don't fit a single unit suite.

use kpztt::airy::airy_ai;
use kpztt::coeffs::{self, KernelSet, LongTimePoint};
use kpztt::quad::half_line_rule;
use kpztt::twotime::{self, ContourConfig, TwoTimeParams};
use std::sync::Arc;

#[test]
fn airy_kernel_trace_matches_2d_quadrature() {
    // tr K_{Ai,ξ} = ∫∫ Ai(ξ+v+s)² ds dv by independent fine quadrature
    for xi in [-1.0, 0.0, 0.8] {
        let set = KernelSet::at(xi, 0.0, 48).unwrap();
        let tr = set.k.trace();
        let fine = half_line_rule(192, (-xi).max(0.0)).unwrap();
        let direct = fine.integrate(|v| {
            fine.integrate(|s| {
                let a = airy_ai(xi + v + s);
                a * a
            })
        });
        assert!((tr - direct).abs() < 1e-9, "xi={xi}: {tr} vs {direct}");
    }
}

#[test]
fn det_ki_equals_f2_across_grid() {
    // det(I - K_i) = F₂(ξ + η²) across the default grid
    for xi in [-2.0, -1.0, 0.0, 1.0] {
        for eta in [0.0, 0.5] {
            let set = KernelSet::at(xi, eta, 48).unwrap();
            let det = set.k.scale(-1.0).fredholm_det();
            let f2 = coeffs::tracy_widom_f2_n(xi + eta * eta, 48);
            assert!(
                (det - f2).abs() < 1e-9,
                "({xi},{eta}): det {det} vs F₂ {f2}"
            );
        }
    }
}

#[test]
fn expansion_coefficients_node_doubling() {
    // e₁, e₂ move less than 1e-7 when the node count doubles
    let p = LongTimePoint {
        xi1: 0.1,
        eta1: 0.3,
        xi2: -0.2,
        eta2: 0.2,
    };
    let coarse = coeffs::long_time_coeffs(p, 48).unwrap();
    let fine = coeffs::long_time_coeffs(p, 96).unwrap();
    assert!(
        (coarse.e1 - fine.e1).abs() < 1e-7,
        "e1 moved {:.2e}",
        (coarse.e1 - fine.e1).abs()
    );
    assert!(
        (coarse.e2 - fine.e2).abs() < 1e-7,
        "e2 moved {:.2e}",
        (coarse.e2 - fine.e2).abs()
    );
}

#[test]
fn ftt_node_doubling() {
    // every determinant/trace behind F_tt is node-converged at default n
    let p = TwoTimeParams::new(0.2, 0.3, -0.1, 0.25, 0.6).unwrap();
    let coarse = twotime::ftt(
        &p,
        &ContourConfig {
            nodes: 48,
            circle_points: 128,
            ..ContourConfig::default_for(0.6)
        },
    )
    .unwrap();
    let fine = twotime::ftt(
        &p,
        &ContourConfig {
            nodes: 96,
            circle_points: 224,
            ..ContourConfig::default_for(0.6)
        },
    )
    .unwrap();
    assert!(
        (coarse.value - fine.value).abs() < 1e-8,
        "F_tt moved {:.2e}",
        (coarse.value - fine.value).abs()
    );
}

#[test]
fn psi_specialization_and_b_tilde_identity() {
    // tail identity used by the short-time proof: b̃₀(1,1) = b̃₀(0,0)
    for (xi, eta) in [(0.0, 0.0), (-0.6, 0.4), (0.5, -0.3)] {
        let st = coeffs::short_time_psi(xi, eta, 48).unwrap();
        assert!(
            (st.b_tilde[0][1][1] - st.b_tilde[0][0][0]).abs() < 1e-9,
            "({xi},{eta})"
        );
    }
}

#[test]
fn m_assembly_against_direct_contours_spot() {
    // direct double-contour quadrature agrees with the factorized kernels
    let p = TwoTimeParams::new(0.2, 0.3, -0.1, 0.25, 0.5).unwrap();
    let c = ContourConfig {
        nodes: 40,
        circle_points: 88,
        d: [0.35, 0.8, 1.6],
        dd: [0.35, 0.8, 1.6],
        ..ContourConfig::default_for(0.5)
    };
    let rule = Arc::new(half_line_rule(40, 0.0).unwrap());
    let m3 = twotime::assemble_m(3, &p, &c, &rule).unwrap();
    let k3 = twotime::assemble_k(3, &p, &c, &rule).unwrap();
    for &(i, j) in &[(2usize, 9usize), (15, 4)] {
        let (v1, v2) = (rule.nodes[i], rule.nodes[j]);
        let w = (rule.weights[i] * rule.weights[j]).sqrt();
        let dm = twotime::direct::m3(&p, &c, v1, v2);
        assert!(
            (m3.matrix[(i, j)] / w - dm).abs() < 1e-8,
            "M3 spot ({v1:.2},{v2:.2})"
        );
        let dk = twotime::direct::kj(3, &p, &c, v1, v2);
        assert!(
            (k3.matrix[(i, j)] / w - dk).abs() < 1e-7,
            "k3 spot ({v1:.2},{v2:.2})"
        );
    }
}
