//! Convergence trends of the Monte Carlo simulator toward the analytic
//! limits (reduced scale; the pinned full-scale run lives in the
//! acceptance suite).

use kpztt::lppsim::{empirical_two_time, LppConfig};
use kpztt::painleve::HastingsMcLeod;
use kpztt::quad::gauss_legendre;

fn cfg(t_scale: f64, samples: usize) -> LppConfig {
    LppConfig {
        q: 0.25,
        t_scale,
        t1: 1.0,
        t2: 2.0,
        eta1: 0.0,
        eta2: 0.0,
        samples,
        seed: 0x5EED,
    }
}

#[test]
fn ks_distance_does_not_grow_with_t() {
    let hm = HastingsMcLeod::new();
    let reference = |x: f64| {
        if x < -11.5 {
            0.0
        } else if x > 7.5 {
            1.0
        } else {
            hm.f2(x)
        }
    };
    let grid: Vec<f64> = (-8..=6).map(|k| k as f64 * 0.5).collect();
    let samples = 3000;
    let mut prev = f64::INFINITY;
    for t_scale in [50.0, 100.0, 200.0] {
        let emp = empirical_two_time(&cfg(t_scale, samples), &grid, &grid).unwrap();
        let ks = emp.ks_marginal1(reference);
        // one-sided trend: allow 3σ of KS fluctuation at this sample size
        let noise = 3.0 * 0.8 / (samples as f64).sqrt();
        assert!(
            ks < prev + noise,
            "KS grew: {ks:.4} after {prev:.4} at T = {t_scale}"
        );
        prev = ks;
    }
}

#[test]
fn mean_height_approaches_tracy_widom_mean() {
    // F₂ mean from density integration of the oracle
    let hm = HastingsMcLeod::new();
    let (gx, gw) = gauss_legendre(200, -10.0, 7.0).unwrap();
    let tw_mean: f64 = gx.iter().zip(&gw).map(|(&x, &w)| w * x * hm.f2_prime(x)).sum();
    assert!((tw_mean + 1.771_086_8).abs() < 1e-4, "TW mean {tw_mean}");

    let samples = 4000;
    let mut biases = Vec::new();
    for t_scale in [50.0, 100.0, 200.0] {
        let emp = empirical_two_time(&cfg(t_scale, samples), &[0.0], &[0.0]).unwrap();
        let mean: f64 = emp.pairs.iter().map(|p| p.h1).sum::<f64>() / samples as f64;
        biases.push(mean - tw_mean);
    }
    // the finite-T bias shrinks; allow 3σ of the sample mean on top
    let sigma = 3.0 * 1.0 / (samples as f64).sqrt();
    assert!(
        biases[2].abs() < biases[0].abs() + sigma,
        "bias trend {biases:?}"
    );
    assert!(biases[2].abs() < 0.25, "T=200 bias too large: {biases:?}");
}
