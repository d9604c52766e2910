//! Named verification suites: each check evaluates an identity and
//! reports its measured deviation against a pinned tolerance.

use crate::output::ResultTable;
use crate::Resolved;
use anyhow::{bail, Result};
use kpztt::airy::{self, a_func, deriv, ShiftParams, Sign};
use kpztt::coeffs::{self, KernelSet};
use kpztt::painleve::HastingsMcLeod;
use kpztt::quad;
use kpztt::twotime::{self, ContourConfig, TwoTimeParams};
use num_complex::Complex64;
use std::sync::Arc;

struct Check {
    name: String,
    deviation: f64,
    tolerance: f64,
}

struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn new() -> Self {
        Report { checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, deviation: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            deviation,
            tolerance,
        });
    }
}

pub fn run(resolved: &Resolved, suite: &str) -> Result<(ResultTable, bool)> {
    let mut report = Report::new();
    match suite {
        "airy" => suite_airy(&mut report),
        "quad" => suite_quad(&mut report)?,
        "tw" => suite_tw(resolved, &mut report),
        "lemma-a0" => suite_lemma_a0(resolved, &mut report)?,
        "b-symmetries" => suite_b_symmetries(resolved, &mut report)?,
        "g-from-b" => suite_g_from_b(resolved, &mut report)?,
        "q-at-1" => suite_q_at_one(resolved, &mut report)?,
        "conjugation" => suite_conjugation(resolved, &mut report)?,
        "all" => {
            suite_airy(&mut report);
            suite_quad(&mut report)?;
            suite_tw(resolved, &mut report);
            suite_lemma_a0(resolved, &mut report)?;
            suite_b_symmetries(resolved, &mut report)?;
            suite_g_from_b(resolved, &mut report)?;
            suite_q_at_one(resolved, &mut report)?;
            suite_conjugation(resolved, &mut report)?;
        }
        other => bail!(
            "unknown suite {other:?}; expected one of airy, quad, tw, lemma-a0, b-symmetries, g-from-b, q-at-1, conjugation, all"
        ),
    }

    let mut table = ResultTable::new("verify", &["pass", "deviation", "tolerance"]);
    resolved.stamp(&mut table);
    table.meta("suite", suite);
    let mut all_ok = true;
    for (idx, c) in report.checks.iter().enumerate() {
        let ok = c.deviation <= c.tolerance;
        all_ok &= ok;
        table.meta(&format!("check_{idx:02}"), &c.name);
        table.push(vec![if ok { 1.0 } else { 0.0 }, c.deviation, c.tolerance]);
        eprintln!(
            "{} {:<46} deviation {:.3e}  tol {:.1e}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance
        );
    }
    Ok((table, all_ok))
}

fn suite_airy(report: &mut Report) {
    report.push(
        "Ai(0) = 3^{-2/3}/Γ(2/3)",
        (airy::airy_ai(0.0) - 0.355_028_053_887_817_2).abs(),
        1e-12,
    );
    report.push(
        "Ai'(0) = -3^{-1/3}/Γ(1/3)",
        (airy::airy_ai_prime(0.0) + 0.258_819_403_792_806_8).abs(),
        1e-12,
    );
    let rule = quad::half_line_rule(64, 0.0).expect("rule");
    report.push(
        "∫Ai = 1/3",
        (rule.integrate(airy::airy_ai) - 1.0 / 3.0).abs(),
        1e-10,
    );
    for x in [-2.0, 0.0, 1.0, 3.0] {
        report.push(
            format!("contour Ai({x}) agrees with direct"),
            (airy::airy_ai_contour(x) - airy::airy_ai(x)).abs(),
            1e-9,
        );
    }
}

fn suite_quad(report: &mut Report) -> Result<()> {
    let (x, w) = quad::gauss_legendre(2, 0.0, 1.0)?;
    let cubic: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t * t * t).sum();
    report.push("2-point rule integrates x³ on [0,1]", (cubic - 0.25).abs(), 1e-15);
    let one = Complex64::new(1.0, 0.0);
    for r in [1.5, 2.0, 3.0] {
        let rule = quad::circle_rule(r, 128)?;
        let a = rule.integrate(|u| one / (u * (u - one)));
        let b = rule.integrate(|u| one / (u - one));
        let c = rule.integrate(|u| u / (u * (u - one)));
        report.push(format!("∮ du/(u(u-1)) = 0 at r={r}"), a.norm(), 1e-10);
        report.push(format!("∮ du/(u-1) = 1 at r={r}"), (b - one).norm(), 1e-10);
        report.push(format!("∮ u du/(u(u-1)) = 1 at r={r}"), (c - one).norm(), 1e-10);
    }
    let mut worst = 0.0f64;
    for c in [0.5, 1.0, 1.5, 2.0] {
        let rule = quad::vertical_rule(c, 1e-16)?;
        let got = rule.integrate(|z| (z * z * z / 3.0).exp());
        worst = worst.max((got.re - airy::airy_ai(0.0)).abs() + got.im.abs());
    }
    report.push("Γ_c anchor invariance for entire integrand", worst, 1e-9);
    Ok(())
}

fn suite_tw(resolved: &Resolved, report: &mut Report) {
    let hm = HastingsMcLeod::new();
    for s in [-4.0, -2.0, 0.0, 2.0] {
        report.push(
            format!("F₂({s}) matches Painlevé oracle"),
            (coeffs::tracy_widom_f2_n(s, resolved.nodes) - hm.f2(s)).abs(),
            1e-7,
        );
    }
    let moved = (coeffs::tracy_widom_f2_n(0.0, resolved.nodes)
        - coeffs::tracy_widom_f2_n(0.0, resolved.nodes * 2))
    .abs();
    report.push("F₂ node-doubling stability", moved, 1e-8);
}

fn suite_lemma_a0(resolved: &Resolved, report: &mut Report) -> Result<()> {
    for xi in [-2.0, -1.0, 0.0, 1.0] {
        for eta in [0.0, 0.5] {
            let tr = coeffs::scalar_traces(xi, eta, resolved.nodes)?;
            let s = xi + eta * eta;
            let f2 = coeffs::tracy_widom_f2_n(s, resolved.nodes);
            let (fp, fpp) = coeffs::f2_derivs_n(s, resolved.nodes)?;
            report.push(
                format!("a₀ = F₂'/F₂ at ({xi},{eta})"),
                (tr.a0 - fp / f2).abs(),
                1e-6,
            );
            if eta == 0.0 {
                report.push(
                    format!("a₁ = -F₂''/(2F₂) at ({xi},0)"),
                    (tr.a1 + fpp / (2.0 * f2)).abs(),
                    1e-5,
                );
            }
        }
    }
    Ok(())
}

fn suite_b_symmetries(resolved: &Resolved, report: &mut Report) -> Result<()> {
    for xi in [-2.0, -1.0, 0.0, 1.0] {
        for eta in [0.0, 0.5] {
            let plus = coeffs::b_table(xi, eta, resolved.nodes)?;
            let minus = coeffs::b_table(xi, -eta, resolved.nodes)?;
            let mut worst = 0.0f64;
            for r in 0..=2 {
                for s in 0..=1 {
                    for e1 in 0..=1 {
                        for e2 in 0..=1 {
                            worst = worst.max(
                                (plus.get_star(r, s, e1, e2) - minus.get(r, s, e2, e1)).abs(),
                            );
                            if s == 0 {
                                worst = worst.max(
                                    (plus.get_star(r, 0, e1, e2) - plus.get(r, 0, e1, e2)).abs(),
                                );
                            }
                        }
                    }
                }
            }
            for s in 0..=1 {
                worst = worst.max((plus.get_star(0, s, 0, 1) - plus.get(0, s, 0, 1)).abs());
                worst = worst.max((plus.get_star(0, s, 1, 0) - plus.get(0, s, 1, 0)).abs());
            }
            report.push(format!("b*-table relations at ({xi},{eta})"), worst, 1e-8);
            let trp = coeffs::scalar_traces(xi, eta, resolved.nodes)?;
            let trm = coeffs::scalar_traces(xi, -eta, resolved.nodes)?;
            report.push(
                format!("r₁ even in η at ({xi},{eta})"),
                (trp.r1 - trm.r1).abs(),
                1e-8,
            );
            report.push(
                format!("a₁* equals a₁ at -η at ({xi},{eta})"),
                (trp.a1_star - trm.a1).abs(),
                1e-8,
            );
        }
    }
    Ok(())
}

fn suite_g_from_b(resolved: &Resolved, report: &mut Report) -> Result<()> {
    for xi in [-2.0, -1.0, 0.0, 1.0] {
        for eta in [0.0, 0.5] {
            let set = KernelSet::at(xi, eta, resolved.nodes)?;
            let table = coeffs::b_table_from(&set)?;
            let mut worst = 0.0f64;
            for r in 1..=2 {
                for s in 0..=1 {
                    for e1 in 0..=1 {
                        for e2 in 0..=1 {
                            let bin = coeffs::g_from_b(&table, r, s, e1, e2);
                            let dir = coeffs::g_direct(&set, r, s, e1, e2)?;
                            worst = worst.max((bin - dir).abs());
                        }
                    }
                }
            }
            report.push(
                format!("binomial g vs direct trace at ({xi},{eta})"),
                worst,
                1e-8,
            );
        }
    }
    Ok(())
}

fn suite_q_at_one(resolved: &Resolved, report: &mut Report) -> Result<()> {
    for (xi1, eta1, xi2, eta2, alpha) in [
        (0.0, 0.0, 0.0, 0.0, 0.6),
        (0.2, 0.3, -0.1, 0.25, 0.6),
        (-0.5, 0.0, 0.5, 0.0, 1.0),
    ] {
        let p = TwoTimeParams::new(xi1, eta1, xi2, eta2, alpha)?;
        let c = resolved.contours(alpha);
        let got = twotime::ftt(&p, &c)?;
        let f2 = coeffs::tracy_widom_f2_n(xi2 + eta2 * eta2, resolved.nodes);
        report.push(
            format!("det(I+Q(1)) = F₂(ξ₂+η₂²) at ({xi1},{eta1},{xi2},{eta2})"),
            (got.det_at_one - f2).abs(),
            1e-6,
        );
        report.push(
            format!("u-integral imaginary residue at α={alpha}"),
            got.im_residual,
            1e-8,
        );
    }
    Ok(())
}

fn suite_conjugation(resolved: &Resolved, report: &mut Report) -> Result<()> {
    // K_i(v₁,v₂) = e^{η(v₁-v₂)} K_{Ai,ξ+η²}(v₁,v₂) entrywise
    let (xi, eta) = (-0.3, 0.45);
    let tilted = KernelSet::at(xi, eta, resolved.nodes)?;
    let flat = KernelSet::new(xi + eta * eta, 0.0, tilted.rule.clone())?;
    let rule = tilted.rule.clone();
    let mut worst = 0.0f64;
    for i in (0..rule.n).step_by(5) {
        for j in (0..rule.n).step_by(5) {
            let w = (rule.weights[i] * rule.weights[j]).sqrt();
            let lhs = tilted.k.matrix[(i, j)] / w;
            let rhs = (eta * (rule.nodes[i] - rule.nodes[j])).exp() * flat.k.matrix[(i, j)] / w;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    report.push("tilted kernel is conjugated shifted Airy kernel", worst, 1e-10);

    // det(I + c_{-δ} K c_{δ}) = det(I + K)
    let base = tilted.k.scale(-1.0).fredholm_det();
    let mut worst = 0.0f64;
    for delta in [0.05, 0.2, 0.5] {
        let mut m = tilted.k.matrix.clone();
        for i in 0..rule.n {
            for j in 0..rule.n {
                m[(i, j)] *= ((rule.nodes[i] - rule.nodes[j]) * delta).exp();
            }
        }
        let conj = kpztt::opcalc::DiscreteOperator::from_matrix(rule.clone(), m, "cKc")
            .scale(-1.0)
            .fredholm_det();
        worst = worst.max((conj - base).abs());
    }
    report.push("δ-conjugation invariance of the determinant", worst, 1e-10);

    // contour representation of the A-functions: Γ_D route equals direct
    let p = ShiftParams::new(0.4, 0.35);
    let mut worst = 0.0f64;
    for v in [0.0, 0.7, 2.1] {
        let contour = deriv(p, Sign::Plus, 0, v);
        let direct = a_func(p, Sign::Plus, v);
        worst = worst.max((contour - direct).abs());
    }
    report.push("A₊ contour formula agrees with direct value", worst, 1e-9);

    // M₁ diagonal equals K₁ diagonal (conjugation trivial there)
    let p = TwoTimeParams::new(0.2, 0.3, -0.1, 0.25, 0.5)?;
    let c = ContourConfig {
        nodes: resolved.nodes,
        ..resolved.contours(0.5)
    };
    let rule = Arc::new(quad::half_line_rule(resolved.nodes, 0.0)?);
    let m1 = twotime::assemble_m(1, &p, &c, &rule)?;
    let set = KernelSet::new(p.xi1, p.eta1, rule.clone())?;
    let mut worst = 0.0f64;
    for i in (0..rule.n).step_by(7) {
        worst = worst.max((m1.matrix[(i, i)] - set.k.matrix[(i, i)]).abs());
    }
    report.push("M₁ diagonal equals K₁ diagonal", worst, 1e-10);
    Ok(())
}
