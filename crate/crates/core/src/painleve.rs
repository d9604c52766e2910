//! Hastings-McLeod solution of Painlevé II and the Tracy-Widom
//! distribution built from it.
//!
//! This is the independent oracle for the Fredholm-determinant pipeline:
//! `q'' = x q + 2 q³` with `q(x) ~ Ai(x)` as `x → +∞`,
//! `q(x) ~ sqrt(-x/2)` as `x → -∞`, and
//!
//! ```text
//! F₂(s) = exp( -∫_s^∞ (x - s) q(x)² dx )
//! ```
//!
//! Shooting is exponentially ill-conditioned here (one linearized mode
//! grows like exp((2√2/3)|x|^{3/2}) toward -∞), so the connecting orbit is
//! computed as a boundary-value problem instead: Numerov discretization,
//! Newton iteration with a tridiagonal Jacobian, Dirichlet data taken from
//! the two asymptotes at x = ±ends where their residuals are negligible.

use crate::airy::{airy_ai, airy_ai_prime};

const X_HI: f64 = 8.0;
const X_LO: f64 = -16.0;
const STEP: f64 = 1.0 / 2048.0;
/// Left of this the boundary-layer error of the left Dirichlet condition
/// has not fully decayed; interpolation is refused there.
const TRUSTED_LO: f64 = -12.0;

/// Tabulated Hastings-McLeod solution on [X_LO, X_HI].
pub struct HastingsMcLeod {
    /// q at grid points x_k = X_LO + k h (increasing).
    q: Vec<f64>,
    qp: Vec<f64>,
    /// ∫_x^{X_HI} q² and ∫_x^{X_HI} t q(t)², cumulative from the top.
    int_q2: Vec<f64>,
    int_tq2: Vec<f64>,
    /// Tail corrections ∫_{X_HI}^∞ with q ≈ Ai.
    tail_q2: f64,
    tail_tq2: f64,
}

fn rhs(x: f64, q: f64) -> f64 {
    x * q + 2.0 * q * q * q
}

fn rhs_dq(x: f64, q: f64) -> f64 {
    x + 6.0 * q * q
}

impl HastingsMcLeod {
    pub fn new() -> Self {
        let n = ((X_HI - X_LO) / STEP).round() as usize;
        let h = STEP;
        let xs: Vec<f64> = (0..=n).map(|k| X_LO + k as f64 * h).collect();
        // initial guess: left asymptote glued to Ai across zero
        let mut q: Vec<f64> = xs
            .iter()
            .map(|&x| {
                if x < 0.0 {
                    let left = (-x / 2.0_f64).sqrt();
                    let blend = (1.0 + (4.0 * x).tanh()) / 2.0;
                    left * (1.0 - blend) + airy_ai(x) * blend
                } else {
                    airy_ai(x)
                }
            })
            .collect();
        // Dirichlet data from the asymptotes; their residuals at the ends
        // are damped by e^{-∫sqrt(x+6q²)} long before the trusted range
        let x0 = xs[0];
        q[0] = (-x0 / 2.0_f64).sqrt() * (1.0 + 0.125 / (x0 * x0 * x0));
        q[n] = airy_ai(X_HI);

        // Newton on the Numerov equations
        // q_{i+1} - 2q_i + q_{i-1} = h²/12 (f_{i+1} + 10 f_i + f_{i-1})
        let h2 = h * h;
        let m = n - 1; // interior unknowns
        let mut res = vec![0.0; m];
        let mut dl = vec![0.0; m];
        let mut dm = vec![0.0; m];
        let mut du = vec![0.0; m];
        for _iter in 0..60 {
            for i in 1..n {
                let f_im = rhs(xs[i - 1], q[i - 1]);
                let f_i = rhs(xs[i], q[i]);
                let f_ip = rhs(xs[i + 1], q[i + 1]);
                res[i - 1] =
                    q[i + 1] - 2.0 * q[i] + q[i - 1] - h2 / 12.0 * (f_ip + 10.0 * f_i + f_im);
                dl[i - 1] = 1.0 - h2 / 12.0 * rhs_dq(xs[i - 1], q[i - 1]);
                dm[i - 1] = -2.0 - 10.0 * h2 / 12.0 * rhs_dq(xs[i], q[i]);
                du[i - 1] = 1.0 - h2 / 12.0 * rhs_dq(xs[i + 1], q[i + 1]);
            }
            let delta = thomas_solve(&dl, &dm, &du, &res);
            let mut max_step: f64 = 0.0;
            for i in 1..n {
                q[i] -= delta[i - 1];
                max_step = max_step.max(delta[i - 1].abs());
            }
            if max_step < 1e-14 {
                break;
            }
        }

        // derivatives by 4th-order central differences
        let mut qp = vec![0.0; n + 1];
        for i in 2..n - 1 {
            qp[i] = (8.0 * (q[i + 1] - q[i - 1]) - (q[i + 2] - q[i - 2])) / (12.0 * h);
        }
        qp[0] = (q[1] - q[0]) / h - h / 2.0 * rhs(xs[0], q[0]);
        qp[1] = (q[2] - q[0]) / (2.0 * h);
        qp[n - 1] = (q[n] - q[n - 2]) / (2.0 * h);
        qp[n] = airy_ai_prime(X_HI);

        // cumulative Hermite-corrected trapezoid integrals from the top
        let mut int_q2 = vec![0.0; n + 1];
        let mut int_tq2 = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let (x0, x1) = (xs[k], xs[k + 1]);
            let (q0, q1) = (q[k], q[k + 1]);
            let (d0, d1) = (2.0 * q0 * qp[k], 2.0 * q1 * qp[k + 1]);
            let seg = h / 2.0 * (q0 * q0 + q1 * q1) + h * h / 12.0 * (d0 - d1);
            let dt0 = q0 * q0 + x0 * d0;
            let dt1 = q1 * q1 + x1 * d1;
            let seg_t = h / 2.0 * (x0 * q0 * q0 + x1 * q1 * q1) + h * h / 12.0 * (dt0 - dt1);
            int_q2[k] = int_q2[k + 1] + seg;
            int_tq2[k] = int_tq2[k + 1] + seg_t;
        }
        // tail with q ≈ Ai on [X_HI, X_HI + 8]: Ai(16)² ~ 1e-41
        let (tx, tw) = crate::quad::gauss_legendre(40, X_HI, X_HI + 8.0).unwrap();
        let mut tail_q2 = 0.0;
        let mut tail_tq2 = 0.0;
        for (&t, &w) in tx.iter().zip(&tw) {
            let a2 = airy_ai(t) * airy_ai(t);
            tail_q2 += w * a2;
            tail_tq2 += w * t * a2;
        }
        HastingsMcLeod {
            q,
            qp,
            int_q2,
            int_tq2,
            tail_q2,
            tail_tq2,
        }
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let pos = (s - X_LO) / STEP;
        let k = (pos.floor() as usize).min(self.q.len() - 2);
        (k, pos - k as f64)
    }

    /// q(s) by local cubic Hermite interpolation.
    pub fn q(&self, s: f64) -> f64 {
        assert!(
            (TRUSTED_LO..=X_HI).contains(&s),
            "s = {s} outside the tabulated Hastings-McLeod range"
        );
        let (k, t) = self.locate(s);
        let (y0, y1) = (self.q[k], self.q[k + 1]);
        let (m0, m1) = (STEP * self.qp[k], STEP * self.qp[k + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
    }

    fn cum(&self, weight_t: bool, s: f64) -> f64 {
        let table = if weight_t { &self.int_tq2 } else { &self.int_q2 };
        let (k, frac) = self.locate(s);
        // integral from s up to x_{k+1} plus the tabulated remainder
        let x_next = X_LO + (k + 1) as f64 * STEP;
        let mut head = 0.0;
        if frac < 1.0 {
            let (gx, gw) = crate::quad::gauss_legendre(5, s, x_next).unwrap();
            for (&t, &w) in gx.iter().zip(&gw) {
                let qq = self.q(t);
                head += w * qq * qq * if weight_t { t } else { 1.0 };
            }
        }
        table[k + 1] + head
    }

    /// ∫_s^∞ q²
    pub fn integral_q2(&self, s: f64) -> f64 {
        self.cum(false, s) + self.tail_q2
    }

    /// ∫_s^∞ (x - s) q(x)² dx
    pub fn integral_xq2(&self, s: f64) -> f64 {
        self.cum(true, s) + self.tail_tq2 - s * self.integral_q2(s)
    }

    /// Tracy-Widom GUE distribution.
    pub fn f2(&self, s: f64) -> f64 {
        (-self.integral_xq2(s)).exp()
    }

    /// F₂'(s) = F₂(s) ∫_s^∞ q².
    pub fn f2_prime(&self, s: f64) -> f64 {
        self.f2(s) * self.integral_q2(s)
    }

    /// F₂''(s) = F₂(s) [ (∫_s^∞ q²)² - q(s)² ].
    pub fn f2_second(&self, s: f64) -> f64 {
        let i2 = self.integral_q2(s);
        self.f2(s) * (i2 * i2 - self.q(s) * self.q(s))
    }
}

impl Default for HastingsMcLeod {
    fn default() -> Self {
        Self::new()
    }
}

fn thomas_solve(dl: &[f64], dm: &[f64], du: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = du[0] / dm[0];
    d[0] = b[0] / dm[0];
    for i in 1..n {
        let denom = dm[i] - dl[i] * c[i - 1];
        c[i] = du[i] / denom;
        d[i] = (b[i] - dl[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
