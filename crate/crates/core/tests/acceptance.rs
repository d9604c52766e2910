//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured deviations. Tolerances are pinned here and nowhere
//! else.

use kpztt::airy;
use kpztt::coeffs::{self, KernelSet, LongTimePoint};
use kpztt::lppsim::{empirical_two_time, LppConfig};
use kpztt::painleve::HastingsMcLeod;
use kpztt::quad;
use kpztt::twotime::{self, ContourConfig, ShortTimeFrame, TwoTimeParams};
use std::time::Instant;

fn report(name: &str, started: Instant, details: &str) {
    eprintln!(
        "PASS {name} [{:.1}s] {details}",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 1: special-function base.
#[test]
fn criterion_1_special_functions() {
    let t0 = Instant::now();
    let d_ai0 = (airy::airy_ai(0.0) - 0.355_028_053_887_817_2).abs();
    assert!(d_ai0 < 1e-10, "Ai(0) deviation {d_ai0:.2e}");
    let d_aip0 = (airy::airy_ai_prime(0.0) + 0.258_819_403_792_806_8).abs();
    assert!(d_aip0 < 1e-10, "Ai'(0) deviation {d_aip0:.2e}");
    let rule = quad::half_line_rule(64, 0.0).unwrap();
    let d_int = (rule.integrate(airy::airy_ai) - 1.0 / 3.0).abs();
    assert!(d_int < 1e-10, "∫Ai deviation {d_int:.2e}");
    let mut d_contour = 0.0f64;
    for x in [-2.0, 0.0, 1.0, 3.0] {
        d_contour = d_contour.max((airy::airy_ai_contour(x) - airy::airy_ai(x)).abs());
    }
    assert!(d_contour < 1e-9, "contour deviation {d_contour:.2e}");
    assert!(t0.elapsed().as_secs_f64() < 1.0, "budget exceeded");
    report(
        "criterion 1 (Airy base)",
        t0,
        &format!("Ai(0) {d_ai0:.1e}, Ai'(0) {d_aip0:.1e}, ∫Ai {d_int:.1e}, contour {d_contour:.1e}"),
    );
}

/// Criterion 2: Tracy-Widom against the Painlevé oracle.
#[test]
fn criterion_2_tracy_widom() {
    let t0 = Instant::now();
    let hm = HastingsMcLeod::new();
    let mut worst = 0.0f64;
    for s in [-4.0, -2.0, 0.0, 2.0] {
        worst = worst.max((coeffs::tracy_widom_f2_n(s, 48) - hm.f2(s)).abs());
    }
    assert!(worst < 1e-7, "F₂ vs oracle {worst:.2e}");
    let moved = (coeffs::tracy_widom_f2_n(0.0, 48) - coeffs::tracy_widom_f2_n(0.0, 96)).abs();
    assert!(moved < 1e-8, "node doubling moved by {moved:.2e}");
    assert!(t0.elapsed().as_secs_f64() < 5.0, "budget exceeded");
    report(
        "criterion 2 (Tracy-Widom)",
        t0,
        &format!("oracle dev {worst:.1e}, doubling {moved:.1e}"),
    );
}

/// Criterion 3: a₀ and a₁ in terms of the distribution and its
/// derivatives on a 4 × 2 grid.
#[test]
fn criterion_3_a0_a1() {
    let t0 = Instant::now();
    let mut worst_a0 = 0.0f64;
    let mut worst_a1 = 0.0f64;
    for xi in [-2.0, -1.0, 0.0, 1.0] {
        for eta in [0.0, 0.5] {
            let tr = coeffs::scalar_traces(xi, eta, 48).unwrap();
            let s = xi + eta * eta;
            let f2 = coeffs::tracy_widom_f2_n(s, 48);
            let (fp, fpp) = coeffs::f2_derivs_n(s, 48).unwrap();
            worst_a0 = worst_a0.max((tr.a0 - fp / f2).abs());
            if eta == 0.0 {
                worst_a1 = worst_a1.max((tr.a1 + fpp / (2.0 * f2)).abs());
            }
        }
    }
    assert!(worst_a0 < 1e-6, "a₀ deviation {worst_a0:.2e}");
    assert!(worst_a1 < 1e-5, "a₁ deviation {worst_a1:.2e}");
    assert!(t0.elapsed().as_secs_f64() < 30.0, "budget exceeded");
    report(
        "criterion 3 (a₀/a₁ vs F₂)",
        t0,
        &format!("a₀ {worst_a0:.1e}, a₁ {worst_a1:.1e}"),
    );
}

/// Criterion 4: the symmetry relations of the starred tables and the
/// binomial reduction of the g-quantities, on the default grid.
#[test]
fn criterion_4_identity_suites() {
    let t0 = Instant::now();
    let mut worst_sym = 0.0f64;
    let mut worst_g = 0.0f64;
    for xi in [-2.0, -1.0, 0.0, 1.0] {
        for eta in [0.0, 0.5] {
            let set = KernelSet::at(xi, eta, 48).unwrap();
            let plus = coeffs::b_table_from(&set).unwrap();
            let minus = coeffs::b_table(xi, -eta, 48).unwrap();
            for r in 0..=2 {
                for s in 0..=1 {
                    for e1 in 0..=1 {
                        for e2 in 0..=1 {
                            worst_sym = worst_sym.max(
                                (plus.get_star(r, s, e1, e2) - minus.get(r, s, e2, e1)).abs(),
                            );
                            if s == 0 {
                                worst_sym = worst_sym.max(
                                    (plus.get_star(r, 0, e1, e2) - plus.get(r, 0, e1, e2)).abs(),
                                );
                            }
                        }
                    }
                }
            }
            let trp = coeffs::scalar_traces(xi, eta, 48).unwrap();
            let trm = coeffs::scalar_traces(xi, -eta, 48).unwrap();
            worst_sym = worst_sym.max((trp.r1 - trm.r1).abs());
            worst_sym = worst_sym.max((trp.a1_star - trm.a1).abs());
            for r in 1..=2 {
                for s in 0..=1 {
                    for e1 in 0..=1 {
                        for e2 in 0..=1 {
                            let bin = coeffs::g_from_b(&plus, r, s, e1, e2);
                            let dir = coeffs::g_direct(&set, r, s, e1, e2).unwrap();
                            worst_g = worst_g.max((bin - dir).abs());
                        }
                    }
                }
            }
        }
    }
    assert!(worst_sym < 1e-8, "symmetry deviation {worst_sym:.2e}");
    assert!(worst_g < 1e-8, "g-reduction deviation {worst_g:.2e}");
    assert!(t0.elapsed().as_secs_f64() < 60.0, "budget exceeded");
    report(
        "criterion 4 (identity suites)",
        t0,
        &format!("symmetries {worst_sym:.1e}, g-from-b {worst_g:.1e}"),
    );
}

/// Criterion 5: structural checks of the two-time assembly.
#[test]
fn criterion_5_two_time_assembly() {
    let t0 = Instant::now();
    // det(I + Q(1)) equals the later-time marginal
    let mut worst_q1 = 0.0f64;
    for (xi1, eta1, xi2, eta2, alpha) in [
        (0.0, 0.0, 0.0, 0.0, 0.6),
        (0.2, 0.3, -0.1, 0.25, 0.6),
        (-0.5, 0.0, 0.5, 0.0, 1.0),
    ] {
        let p = TwoTimeParams::new(xi1, eta1, xi2, eta2, alpha).unwrap();
        let got = twotime::ftt(&p, &ContourConfig::default_for(alpha)).unwrap();
        let f2 = coeffs::tracy_widom_f2_n(xi2 + eta2 * eta2, 48);
        worst_q1 = worst_q1.max((got.det_at_one - f2).abs());
    }
    assert!(worst_q1 < 1e-6, "det(I+Q(1)) deviation {worst_q1:.2e}");

    // invariance under admissible contour changes
    let p = TwoTimeParams::new(0.2, 0.3, -0.1, 0.25, 0.4).unwrap();
    let base = twotime::ftt(&p, &ContourConfig::default_for(0.4)).unwrap();
    let mut worst_inv = base.im_residual;
    for delta in [0.05, 0.2] {
        for radius in [1.5, 3.0] {
            let c = ContourConfig {
                delta,
                radius,
                d: [0.1, 0.9, 1.4],
                dd: [0.12, 0.85, 1.5],
                ..ContourConfig::default_for(0.4)
            };
            let got = twotime::ftt(&p, &c).unwrap();
            worst_inv = worst_inv.max((got.value - base.value).abs());
        }
    }
    assert!(worst_inv < 1e-6, "contour invariance {worst_inv:.2e}");

    // marginal limits at ξ = 8
    let c = ContourConfig::default_for(0.8);
    let p = TwoTimeParams::new(8.0, 0.1, 0.3, 0.2, 0.8).unwrap();
    let m1 = (twotime::ftt(&p, &c).unwrap().value - coeffs::tracy_widom_f2_n(0.34, 48)).abs();
    let p = TwoTimeParams::new(0.3, 0.2, 8.0, 0.1, 0.8).unwrap();
    let m2 = (twotime::ftt(&p, &c).unwrap().value - coeffs::tracy_widom_f2_n(0.34, 48)).abs();
    assert!(m1 < 1e-4 && m2 < 1e-4, "marginals {m1:.2e}, {m2:.2e}");

    // joint-CDF monotonicity on a 5×5 grid
    let grid = [-1.5, -0.75, 0.0, 0.75, 1.5];
    let mut values = [[0.0f64; 5]; 5];
    for (i, &x1) in grid.iter().enumerate() {
        for (j, &x2) in grid.iter().enumerate() {
            let p = TwoTimeParams::new(x1, 0.1, x2, 0.2, 0.8).unwrap();
            let got = twotime::ftt(&p, &c).unwrap();
            assert!(
                (-1e-6..=1.0 + 1e-6).contains(&got.value),
                "value out of range at ({x1},{x2}): {}",
                got.value
            );
            values[i][j] = got.value;
        }
    }
    for i in 0..5 {
        for j in 0..5 {
            if i > 0 {
                assert!(values[i][j] + 1e-9 >= values[i - 1][j], "not monotone in ξ₁");
            }
            if j > 0 {
                assert!(values[i][j] + 1e-9 >= values[i][j - 1], "not monotone in ξ₂");
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 600.0, "budget exceeded");
    report(
        "criterion 5 (two-time assembly)",
        t0,
        &format!("Q(1) {worst_q1:.1e}, invariance {worst_inv:.1e}, marginals {m1:.1e}/{m2:.1e}, monotone 5×5"),
    );
}

/// Criterion 6: fitted (ê₁, ê₂) against the closed-form coefficients.
#[test]
fn criterion_6_long_time_cross_validation() {
    let t0 = Instant::now();
    let alphas = [0.02, 0.04, 0.06, 0.08, 0.1];
    let c = ContourConfig {
        nodes: 48,
        circle_points: 128,
        ..ContourConfig::default_for(0.05)
    };
    let mut details = String::new();
    for point in [
        LongTimePoint {
            xi1: 0.0,
            eta1: 0.0,
            xi2: 0.0,
            eta2: 0.0,
        },
        LongTimePoint {
            xi1: 0.0,
            eta1: 0.5,
            xi2: 0.0,
            eta2: -0.5,
        },
    ] {
        let closed = coeffs::long_time_coeffs(point, 48).unwrap();
        let fit = twotime::long_time_fit(&point, &alphas, &c).unwrap();
        let rel1 = ((fit.e1_hat - closed.e1) / closed.e1).abs();
        let rel2 = ((fit.e2_hat - closed.e2) / closed.e2).abs();
        assert!(rel1 < 1e-3, "ê₁ relative deviation {rel1:.2e} at {point:?}");
        assert!(rel2 < 1e-2, "ê₂ relative deviation {rel2:.2e} at {point:?}");
        assert!(
            (fit.residual_slope - 3.0).abs() < 0.3,
            "residual slope {} at {point:?}",
            fit.residual_slope
        );
        details.push_str(&format!(
            "(η₁={},η₂={}): ê₁ rel {rel1:.1e}, ê₂ rel {rel2:.1e}, slope {:.2}; ",
            point.eta1, point.eta2, fit.residual_slope
        ));
    }
    assert!(t0.elapsed().as_secs_f64() < 1800.0, "budget exceeded");
    report("criterion 6 (first/second order fit)", t0, &details);
}

/// Criterion 7: short-time limit and the Baik-Rains factorization.
#[test]
fn criterion_7_short_time_cross_validation() {
    let t0 = Instant::now();
    let mut details = String::new();
    for (xi, eta) in [(0.0, 0.0), (1.0, 0.5)] {
        let mut prev = f64::INFINITY;
        for alpha in [5.0, 10.0, 20.0] {
            let frame = ShortTimeFrame {
                xi1: 0.0,
                eta1: 0.0,
                xi,
                eta,
                alpha,
            };
            let c = ContourConfig {
                nodes: 48,
                circle_points: 128,
                ..ContourConfig::default_for(alpha)
            };
            let (lhs, rhs) = twotime::short_time_check(&frame, &c).unwrap();
            let gap = (lhs - rhs).abs();
            assert!(
                gap < prev,
                "gap did not decrease at α={alpha}, (ξ,η)=({xi},{eta}): {gap:.3e} vs {prev:.3e}"
            );
            prev = gap;
        }
        details.push_str(&format!("(ξ={xi},η={eta}): final gap {prev:.1e}; "));
    }

    // η = 0 factorization through the Baik-Rains distribution
    let frame = ShortTimeFrame {
        xi1: 0.0,
        eta1: 0.0,
        xi: 0.0,
        eta: 0.0,
        alpha: 10.0,
    };
    let c = ContourConfig::default_for(10.0);
    let (_, rhs) = twotime::short_time_check(&frame, &c).unwrap();
    let (fp, _) = coeffs::f2_derivs_n(0.0, 48).unwrap();
    let f0 = coeffs::baik_rains_f0(0.0, 48).unwrap();
    let fac = (rhs - fp * f0).abs();
    assert!(fac < 1e-8, "rhs does not factor through F₀: {fac:.2e}");

    // F₀ CDF checks: monotone and unit mass
    let mut prev = -1e-9;
    let mut xi = -5.0;
    while xi <= 4.0 {
        let v = coeffs::baik_rains_f0(xi, 48).unwrap();
        assert!(v >= prev - 5e-7, "F₀ not monotone at {xi}");
        prev = v;
        xi += 0.5;
    }
    let (gx, gw) = quad::gauss_legendre(30, -7.0, 5.0).unwrap();
    let h = 1e-3;
    let mass: f64 = gx
        .iter()
        .zip(&gw)
        .map(|(&x, &w)| {
            let d = (coeffs::baik_rains_f0(x + h, 48).unwrap()
                - coeffs::baik_rains_f0(x - h, 48).unwrap())
                / (2.0 * h);
            w * d
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-4, "F₀ density mass {mass}");
    assert!(t0.elapsed().as_secs_f64() < 1800.0, "budget exceeded");
    report(
        "criterion 7 (short-time limit)",
        t0,
        &format!("{details}F₀ factorization {fac:.1e}, mass {mass:.6}"),
    );
}

/// Criterion 8: simulator statistics at the pinned configuration.
#[test]
fn criterion_8_simulator() {
    let t0 = Instant::now();
    let cfg = LppConfig {
        q: 0.25,
        t_scale: 400.0,
        t1: 1.0,
        t2: 2.0,
        eta1: 0.0,
        eta2: 0.0,
        samples: 10_000,
        seed: 2024,
    };
    let grid: Vec<f64> = (-8..=6).map(|k| k as f64 * 0.5).collect();
    let emp = empirical_two_time(&cfg, &grid, &grid).unwrap();
    let cells = 2.0 * (cfg.t2 * cfg.t_scale + 1.0).powi(2) * cfg.samples as f64;
    let elapsed = t0.elapsed().as_secs_f64();

    // marginal KS distance against the Tracy-Widom limit (threshold
    // pinned from pilot runs at this exact configuration and seed)
    let hm = HastingsMcLeod::new();
    let ks = emp.ks_marginal1(|x| {
        if x < -11.5 {
            0.0
        } else if x > 7.5 {
            1.0
        } else {
            hm.f2(x)
        }
    });
    assert!(ks < 0.08, "KS distance {ks:.4}");

    // joint CDF dominated by both marginals
    for (i, &x1) in grid.iter().enumerate() {
        for (j, &x2) in grid.iter().enumerate() {
            let c = emp.joint_cdf(i, j);
            assert!(c <= emp.marginal1(x1) + 1e-12);
            assert!(c <= emp.marginal2(x2) + 1e-12);
        }
    }

    // same-seed reruns are bit-identical (smaller replica for time)
    let small = LppConfig {
        t_scale: 50.0,
        samples: 2000,
        ..cfg.clone()
    };
    let a = kpztt::lppsim::sample_pairs(&small).unwrap();
    let b = kpztt::lppsim::sample_pairs(&small).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.h1.to_bits(), y.h1.to_bits());
        assert_eq!(x.h2.to_bits(), y.h2.to_bits());
    }

    // wall budget: < 5 min on 4 cores; scale by the cores actually present
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let budget = 300.0 * (4.0 / cores as f64).max(1.0);
    assert!(
        elapsed < budget,
        "run took {elapsed:.0}s (budget {budget:.0}s at {cores} cores)"
    );
    report(
        "criterion 8 (simulator)",
        t0,
        &format!(
            "KS {ks:.4}, throughput {:.1} cells/µs on {cores} core(s)",
            cells / elapsed / 1e6
        ),
    );
}
