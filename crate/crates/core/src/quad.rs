//! Quadrature rules.
//!
//! Four families cover everything the operator calculus needs:
//! Gauss-Legendre panels on finite intervals, graded half-line rules for
//! integrands with Airy-type super-exponential decay, truncated vertical
//! contour rules for the cubic-exponential weight, and uniform circle rules
//! for the final u-integral.
//!
//! All rules are plain value records, immutable once built.

use crate::{invalid, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Nodes and weights of an n-point Gauss-Legendre rule on `[a, b]`.
///
/// Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(invalid("gauss_legendre requires n >= 1"));
    }
    if !(a < b) {
        return Err(invalid(format!("gauss_legendre requires a < b, got [{a}, {b}]")));
    }
    let (x, w) = legendre_unit(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let nodes = x.iter().map(|&t| mid + half * t).collect();
    let weights = w.iter().map(|&t| half * t).collect();
    Ok((nodes, weights))
}

/// Gauss-Legendre on [-1, 1] by Newton iteration on the Legendre recurrence.
fn legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_eval(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `(0, L)` graded for Airy-type decay.
///
/// Panels follow the decay profile: an oscillatory head (present when the
/// integrand only starts decaying after `decay_hint`), then short panels
/// where the kernel mass sits, then a stretched tail.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Truncation point L.
    pub truncation: f64,
    pub n: usize,
}

impl HalfLineRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Build a half-line rule with roughly `n` nodes total.
///
/// `decay_hint` is the abscissa where super-exponential decay sets in
/// (`max(0, -ξ)` for a kernel built from `Ai(ξ + v)`). The bulk of the
/// nodes sits on `[0, decay_hint + 14]`; two light tail panels extend the
/// truncation to `decay_hint + 34` so that merely-exponential integrands
/// like `e^{-v}` still integrate to 1e-12.
pub fn half_line_rule(n: usize, decay_hint: f64) -> Result<HalfLineRule> {
    if n < 4 {
        return Err(invalid("half_line_rule requires n >= 4"));
    }
    if !decay_hint.is_finite() || decay_hint < 0.0 {
        return Err(invalid("decay_hint must be finite and >= 0"));
    }
    let h = decay_hint;
    let l = h + 34.0;
    let mut brk = vec![0.0];
    // Oscillatory head in steps of ~3 so a dozen Gauss points per panel
    // resolve the Airy oscillation (rate <= sqrt(decay_hint)).
    let mut t = 3.0;
    while t < h + 1.0 {
        brk.push(t);
        t += 3.0;
    }
    brk.push(h + 2.0);
    brk.push(h + 6.0);
    brk.push(h + 12.0);
    brk.push(h + 14.0);
    let bulk_panels = brk.len() - 1;
    let per = (n / bulk_panels).max(4);
    let mut nodes = Vec::with_capacity(per * bulk_panels + 16);
    let mut weights = Vec::with_capacity(per * bulk_panels + 16);
    for win in brk.windows(2) {
        let (x, w) = gauss_legendre(per, win[0], win[1])?;
        nodes.extend(x);
        weights.extend(w);
    }
    for win in [[h + 14.0, h + 22.0], [h + 22.0, l]] {
        let (x, w) = gauss_legendre(per.min(8), win[0], win[1])?;
        nodes.extend(x);
        weights.extend(w);
    }
    let n = nodes.len();
    Ok(HalfLineRule {
        nodes,
        weights,
        truncation: l,
        n,
    })
}

/// Uniform trapezoid rule on the circle `|u| = r` packaging the Cauchy
/// prefactor: `(1/2πi) ∮ f(u) du ≈ Σ w_j f(u_j)`.
#[derive(Debug, Clone)]
pub struct CircleRule {
    pub radius: f64,
    pub m: usize,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

pub fn circle_rule(r: f64, m: usize) -> Result<CircleRule> {
    if !(r > 1.0) {
        return Err(invalid(format!("circle_rule requires r > 1, got {r}")));
    }
    if m < 8 || m % 2 != 0 {
        return Err(invalid("circle_rule requires even m >= 8"));
    }
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for j in 0..m {
        let th = 2.0 * PI * j as f64 / m as f64;
        let u = Complex64::from_polar(r, th);
        nodes.push(u);
        // du = iu dθ and the 1/(2πi) prefactor leave w = u/m.
        weights.push(u / m as f64);
    }
    Ok(CircleRule {
        radius: r,
        m,
        nodes,
        weights,
    })
}

impl CircleRule {
    /// `(1/2πi) ∮ f(u) du`
    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(u))
            .sum()
    }
}

/// Truncated vertical line `t ↦ anchor + it`, `t ∈ [-T, T]`, with weights
/// carrying the `1/(2πi)` prefactor when `cauchy_prefactor` is set (the
/// constructors here always set it).
#[derive(Debug, Clone)]
pub struct VerticalLineRule {
    pub anchor: f64,
    pub halfwidth: f64,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub cauchy_prefactor: bool,
}

impl VerticalLineRule {
    /// `(1/2πi) ∫_Γ f(z) dz`
    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Rule for integrands with Gaussian envelope `exp(-c t²)` along the line,
/// e.g. `G_{ξ,η}` weights with `c = anchor + η`. The public constructor
/// assumes the envelope curvature equals the anchor.
pub fn vertical_rule(c: f64, floor: f64) -> Result<VerticalLineRule> {
    if c == 0.0 || !c.is_finite() {
        return Err(invalid("vertical_rule requires a nonzero finite anchor"));
    }
    if !(floor > 0.0 && floor <= 1e-6) {
        return Err(invalid("vertical_rule floor must lie in (0, 1e-6]"));
    }
    vertical_rule_tuned(c, c.abs(), c * c, floor)
}

/// Internal constructor with independent control of the anchor, the
/// Gaussian envelope curvature and the stationary-phase shift.
///
/// The integrand is assumed to look like
/// `exp(-env t² + i (shift t - t³/3) + ...)` along the line, so panels are
/// graded by the local phase rate `|shift - t²|`.
pub(crate) fn vertical_rule_tuned(
    anchor: f64,
    env: f64,
    shift: f64,
    floor: f64,
) -> Result<VerticalLineRule> {
    if !(env > 0.0) {
        return Err(invalid(format!(
            "vertical contour envelope must be positive, got {env}"
        )));
    }
    let t_max = ((1.0 / floor).ln() / env).sqrt();
    const PTS: usize = 12;
    // Panel breakpoints on [0, T], mirrored below the axis.
    let mut brk = vec![0.0f64];
    let mut t = 0.0;
    while t < t_max {
        let rate = (shift - t * t).abs().max(1.0);
        // <= ~2.5 rad of phase and <= ~6 envelope e-folds per panel
        let dt_phase = 2.5 / rate;
        let dt_env = 6.0 / (env * (2.0 * t + 0.5) + 1.0);
        let dt = dt_phase.min(dt_env).min(1.5).max(1e-3);
        t += dt;
        brk.push(t.min(t_max));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    // 1/(2πi) ∫ f(a+it) i dt = (1/2π) ∫ f(a+it) dt
    let pref = 1.0 / (2.0 * PI);
    for win in brk.windows(2) {
        if win[1] - win[0] < 1e-14 {
            continue;
        }
        let (x, w) = gauss_legendre(PTS, win[0], win[1])?;
        for (&ti, &wi) in x.iter().zip(&w) {
            nodes.push(Complex64::new(anchor, ti));
            weights.push(Complex64::new(pref * wi, 0.0));
            nodes.push(Complex64::new(anchor, -ti));
            weights.push(Complex64::new(pref * wi, 0.0));
        }
    }
    let halfwidth = t_max;
    Ok(VerticalLineRule {
        anchor,
        halfwidth,
        nodes,
        weights,
        cauchy_prefactor: true,
    })
}
