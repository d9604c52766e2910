//! Monte Carlo last-passage percolation with geometric weights.
//!
//! The height function `h(x, t) = G((t+x+1)/2, (t-x+1)/2)` of the discrete
//! polynuclear growth model is sampled by a rolling dynamic program over
//! the weight array, and the rescaled one- and two-time height statistics
//! are accumulated into empirical distribution functions for comparison
//! against the analytic limits.
//!
//! Randomness comes from a Philox 2x64-10 counter generator keyed by the
//! seed, with the sample index as the stream and the lattice cell as the
//! counter, so runs are bit-reproducible at any thread count.

use crate::{invalid, Result};
use rayon::prelude::*;

/// Philox 2x64-10 (Salmon et al. counter-based generator).
#[derive(Debug, Clone)]
pub struct Philox2x64 {
    key: u64,
    ctr_hi: u64,
    ctr_lo: u64,
    buf: [u64; 2],
    have: usize,
}

const PHILOX_M: u64 = 0xD2B7_4407_B1CE_6E93;
const PHILOX_W: u64 = 0x9E37_79B9_7F4A_7C15;

impl Philox2x64 {
    /// `stream` selects an independent substream (here: the sample index).
    pub fn new(seed: u64, stream: u64) -> Self {
        Philox2x64 {
            key: seed,
            ctr_hi: stream,
            ctr_lo: 0,
            buf: [0; 2],
            have: 0,
        }
    }

    fn block(&mut self) {
        let mut x0 = self.ctr_lo;
        let mut x1 = self.ctr_hi;
        let mut k = self.key;
        for _ in 0..10 {
            let prod = (x0 as u128) * (PHILOX_M as u128);
            let hi = (prod >> 64) as u64;
            let lo = prod as u64;
            let new0 = hi ^ k ^ x1;
            x1 = lo;
            x0 = new0;
            k = k.wrapping_add(PHILOX_W);
        }
        self.buf = [x0, x1];
        self.have = 2;
        self.ctr_lo = self.ctr_lo.wrapping_add(1);
    }

    pub fn next_u64(&mut self) -> u64 {
        if self.have == 0 {
            self.block();
        }
        self.have -= 1;
        self.buf[self.have]
    }

    /// Uniform in (0, 1]; never zero, so logarithms are safe.
    pub fn next_unit(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// Simulator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LppConfig {
    /// Geometric weight parameter, `P[w = k] = (1-q) q^k`.
    pub q: f64,
    /// Macroscopic scale; lattice times are `2 t_i T`.
    pub t_scale: f64,
    pub t1: f64,
    pub t2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub samples: usize,
    pub seed: u64,
}

impl LppConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid("q must lie in (0, 1)"));
        }
        if !(self.t1 > 0.0 && self.t1 < self.t2) {
            return Err(invalid("need 0 < t1 < t2"));
        }
        if self.t_scale <= 0.0 {
            return Err(invalid("t_scale must be positive"));
        }
        Ok(())
    }

    /// Time-separation parameter α = t₁/(t₂ - t₁).
    pub fn alpha(&self) -> f64 {
        self.t1 / (self.t2 - self.t1)
    }
}

/// The KPZ scaling constants of the geometric model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// c₁ = q^{-1/6}(1+√q)^{2/3}, c₂ = 2√q/(1-√q),
/// c₃ = q^{1/6}(1+√q)^{1/3}/(1-√q).
pub fn scaling_constants(q: f64) -> Result<ScalingConstants> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("q must lie in (0, 1)"));
    }
    let sq = q.sqrt();
    Ok(ScalingConstants {
        c1: q.powf(-1.0 / 6.0) * (1.0 + sq).powf(2.0 / 3.0),
        c2: 2.0 * sq / (1.0 - sq),
        c3: q.powf(1.0 / 6.0) * (1.0 + sq).cbrt() / (1.0 - sq),
    })
}

/// One observation point: lattice time, bracketing lattice columns and the
/// height rescaling.
#[derive(Debug, Clone, Copy)]
struct ObsPoint {
    /// Lattice time 2tT rounded to an integer.
    t_lat: i64,
    /// Lower of the two bracketing correct-parity x-offsets.
    x_lo: i64,
    /// Interpolation weight toward x_lo + 2.
    theta: f64,
    /// Rescaling: H = (h - c2 tT) / (c3 (tT)^{1/3}).
    center: f64,
    scale: f64,
    /// η² shift making the statistic F₂-distributed.
    eta_sq: f64,
}

impl ObsPoint {
    fn build(eta: f64, t: f64, t_scale: f64, consts: &ScalingConstants) -> Result<ObsPoint> {
        let tt = t * t_scale;
        let t_lat = (2.0 * tt).round() as i64;
        let x_star = 2.0 * consts.c1 * eta * tt.powf(2.0 / 3.0);
        // h(x, t) lives on x with x + t odd; interpolate linearly between
        // the two bracketing admissible x's
        let want_odd = (t_lat % 2) == 0;
        let mut x_lo = x_star.floor() as i64;
        if (x_lo.rem_euclid(2) == 1) != want_odd {
            x_lo -= 1;
        }
        let theta = (x_star - x_lo as f64) / 2.0;
        let m_lo = (t_lat + x_lo + 1) / 2;
        let n_hi = (t_lat - x_lo + 1) / 2;
        if m_lo < 1 || n_hi - 1 < 1 {
            return Err(invalid(
                "lattice endpoints must be positive; |η| too large for T",
            ));
        }
        Ok(ObsPoint {
            t_lat,
            x_lo,
            theta,
            center: consts.c2 * tt,
            scale: consts.c3 * tt.powf(1.0 / 3.0),
            eta_sq: eta * eta,
        })
    }

    /// Lattice endpoints (m, n) of h(x, t) = G((t+x+1)/2, (t-x+1)/2) for
    /// the two bracketing x's.
    fn endpoints(&self) -> [(i64, i64); 2] {
        let at = |x: i64| ((self.t_lat + x + 1) / 2, (self.t_lat - x + 1) / 2);
        [at(self.x_lo), at(self.x_lo + 2)]
    }

    fn rescale(&self, g_lo: u64, g_hi: u64) -> f64 {
        let h = (1.0 - self.theta) * g_lo as f64 + self.theta * g_hi as f64;
        (h - self.center) / self.scale + self.eta_sq
    }
}

/// Rescaled height pair from one DP pass.
#[derive(Debug, Clone, Copy)]
pub struct SamplePair {
    pub h1: f64,
    pub h2: f64,
}

/// Rolling dynamic program for one sample, harvesting both observation
/// points: `G(m,n) = max(G(m-1,n), G(m,n-1)) + w(m,n)` with `w ~ Geom(q)`
/// by inversion, one row in memory.
fn sample_one(cfg: &LppConfig, p1: &ObsPoint, p2: &ObsPoint, sample_idx: u64) -> SamplePair {
    let targets1 = p1.endpoints();
    let targets2 = p2.endpoints();
    let m_max = targets1
        .iter()
        .chain(&targets2)
        .map(|&(m, _)| m)
        .max()
        .unwrap() as usize;
    let n_max = targets1
        .iter()
        .chain(&targets2)
        .map(|&(_, n)| n)
        .max()
        .unwrap() as usize;

    let mut rng = Philox2x64::new(cfg.seed, sample_idx);
    let inv_ln_q = 1.0 / cfg.q.ln();
    let mut row = vec![0u64; n_max + 1]; // row[0] is the G = 0 boundary
    let mut got = [[0u64; 2]; 2];
    for m in 1..=m_max {
        let mut left = 0u64; // G(m, 0) = 0
        for item in row.iter_mut().skip(1) {
            let up = *item;
            let u = rng.next_unit();
            let w = (u.ln() * inv_ln_q).floor() as u64;
            let g = up.max(left) + w;
            *item = g;
            left = g;
        }
        for (pi, targets) in [(0usize, &targets1), (1usize, &targets2)] {
            for (ti, &(tm, tn)) in targets.iter().enumerate() {
                if tm == m as i64 {
                    got[pi][ti] = row[tn as usize];
                }
            }
        }
    }
    SamplePair {
        h1: p1.rescale(got[0][0], got[0][1]),
        h2: p2.rescale(got[1][0], got[1][1]),
    }
}

/// Deterministic parallel sweep producing all sample pairs in index order.
pub fn sample_pairs(cfg: &LppConfig) -> Result<Vec<SamplePair>> {
    cfg.validate()?;
    let consts = scaling_constants(cfg.q)?;
    let p1 = ObsPoint::build(cfg.eta1, cfg.t1, cfg.t_scale, &consts)?;
    let p2 = ObsPoint::build(cfg.eta2, cfg.t2, cfg.t_scale, &consts)?;
    // the earlier observation must sit on the DP frontier of the later one
    for &(m1, n1) in &p1.endpoints() {
        let ok = p2.endpoints().iter().all(|&(m2, n2)| m1 <= m2 && n1 <= n2);
        if !ok {
            return Err(invalid(
                "first observation point not dominated by the second; reduce |η₁ - η₂| or increase t₂ - t₁",
            ));
        }
    }
    Ok((0..cfg.samples as u64)
        .into_par_iter()
        .map(|idx| sample_one(cfg, &p1, &p2, idx))
        .collect())
}

/// Joint empirical CDF of the rescaled two-time heights on a threshold
/// grid, plus the raw sample pairs for marginal statistics.
pub struct EmpiricalJoint {
    pub xi1_grid: Vec<f64>,
    pub xi2_grid: Vec<f64>,
    /// counts[i][j] = #{ samples : h1 ≤ ξ₁[i], h2 ≤ ξ₂[j] }.
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    pub pairs: Vec<SamplePair>,
}

impl EmpiricalJoint {
    pub fn joint_cdf(&self, i: usize, j: usize) -> f64 {
        self.counts[i][j] as f64 / self.total as f64
    }

    pub fn marginal1(&self, x: f64) -> f64 {
        let c = self.pairs.iter().filter(|p| p.h1 <= x).count();
        c as f64 / self.total as f64
    }

    pub fn marginal2(&self, x: f64) -> f64 {
        let c = self.pairs.iter().filter(|p| p.h2 <= x).count();
        c as f64 / self.total as f64
    }

    /// Kolmogorov-Smirnov distance of the first marginal to a reference
    /// CDF.
    pub fn ks_marginal1(&self, reference: impl Fn(f64) -> f64) -> f64 {
        let mut xs: Vec<f64> = self.pairs.iter().map(|p| p.h1).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut ks = 0.0f64;
        for (k, &x) in xs.iter().enumerate() {
            let f = reference(x);
            ks = ks.max((((k + 1) as f64) / n - f).abs());
            ks = ks.max((f - (k as f64) / n).abs());
        }
        ks
    }
}

/// Accumulate the joint empirical CDF on the given threshold grids.
pub fn empirical_two_time(
    cfg: &LppConfig,
    xi1_grid: &[f64],
    xi2_grid: &[f64],
) -> Result<EmpiricalJoint> {
    if cfg.samples < 1000 {
        return Err(invalid("need at least 10³ samples"));
    }
    let pairs = sample_pairs(cfg)?;
    let mut counts = vec![vec![0u64; xi2_grid.len()]; xi1_grid.len()];
    for p in &pairs {
        for (i, &x1) in xi1_grid.iter().enumerate() {
            if p.h1 > x1 {
                continue;
            }
            for (j, &x2) in xi2_grid.iter().enumerate() {
                if p.h2 <= x2 {
                    counts[i][j] += 1;
                }
            }
        }
    }
    Ok(EmpiricalJoint {
        xi1_grid: xi1_grid.to_vec(),
        xi2_grid: xi2_grid.to_vec(),
        counts,
        total: cfg.samples as u64,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> LppConfig {
        LppConfig {
            q: 0.25,
            t_scale: 50.0,
            t1: 1.0,
            t2: 2.0,
            eta1: 0.0,
            eta2: 0.0,
            samples: 2000,
            seed: 0xACE1_BEEF,
        }
    }

    #[test]
    fn philox_streams_differ_and_repeat() {
        let mut a = Philox2x64::new(7, 0);
        let mut b = Philox2x64::new(7, 0);
        let mut c = Philox2x64::new(7, 1);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
        // uniform variates stay inside (0, 1]
        let mut r = Philox2x64::new(42, 3);
        for _ in 0..1000 {
            let u = r.next_unit();
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn scaling_constants_values() {
        // q = 1/4: c₂ = 2 exactly; c₁, c₃ against direct arithmetic
        let c = scaling_constants(0.25).unwrap();
        assert!((c.c2 - 2.0).abs() < 1e-15);
        let c1 = 0.25f64.powf(-1.0 / 6.0) * 1.5f64.powf(2.0 / 3.0);
        let c3 = 0.25f64.powf(1.0 / 6.0) * 1.5f64.cbrt() / 0.5;
        assert!((c.c1 - c1).abs() < 1e-15 && (c.c1 - 1.650_963_9).abs() < 1e-6);
        assert!((c.c3 - c3).abs() < 1e-15 && (c.c3 - 1.817_120_8).abs() < 1e-6);
        assert!(scaling_constants(0.0).is_err());
        assert!(scaling_constants(1.0).is_err());
        // q → 1: c₂, c₃ blow up
        let near = scaling_constants(0.999999).unwrap();
        assert!(near.c2 > 1e3 && near.c3 > 1e3);
    }

    #[test]
    fn geometric_single_cell_mean() {
        // G(1,1) ~ Geom(q): empirical mean within 3σ of q/(1-q)
        let q: f64 = 0.25;
        let n = 100_000u64;
        let inv_ln_q = 1.0 / q.ln();
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for i in 0..n {
            let mut rng = Philox2x64::new(123, i);
            let w = (rng.next_unit().ln() * inv_ln_q).floor();
            acc += w;
            acc2 += w * w;
        }
        let mean = acc / n as f64;
        let var = acc2 / n as f64 - mean * mean;
        let expect = q / (1.0 - q);
        let sigma = (var / n as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sigma,
            "mean {mean} vs {expect} (3σ = {})",
            3.0 * sigma
        );
    }

    #[test]
    fn dp_monotone_in_rectangle() {
        // G(m,n) ≥ G(m-1,n) and G(m,n-1) for every cell of a small grid
        let q: f64 = 0.4;
        let inv_ln_q = 1.0 / q.ln();
        let mut rng = Philox2x64::new(5, 0);
        let n = 40usize;
        let mut prev = vec![0u64; n + 1];
        for _m in 1..=n {
            let mut row = vec![0u64; n + 1];
            for j in 1..=n {
                let w = (rng.next_unit().ln() * inv_ln_q).floor() as u64;
                row[j] = prev[j].max(row[j - 1]) + w;
                assert!(row[j] >= prev[j] && row[j] >= row[j - 1]);
            }
            prev = row;
        }
    }

    #[test]
    fn same_seed_bit_identical() {
        let cfg = small_cfg();
        let a = sample_pairs(&cfg).unwrap();
        let b = sample_pairs(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.h1.to_bits(), y.h1.to_bits());
            assert_eq!(x.h2.to_bits(), y.h2.to_bits());
        }
        let other = sample_pairs(&LppConfig { seed: 1, ..cfg }).unwrap();
        assert!(a.iter().zip(&other).any(|(x, y)| x.h1 != y.h1));
    }

    #[test]
    fn joint_cdf_bounds_and_monotonicity() {
        let cfg = small_cfg();
        let grid: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.5).collect();
        let emp = empirical_two_time(&cfg, &grid, &grid).unwrap();
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let c = emp.joint_cdf(i, j);
                // Fréchet bound: joint ≤ both marginals
                assert!(c <= emp.marginal1(grid[i]) + 1e-12);
                assert!(c <= emp.marginal2(grid[j]) + 1e-12);
                if i > 0 {
                    assert!(emp.counts[i][j] >= emp.counts[i - 1][j]);
                }
                if j > 0 {
                    assert!(emp.counts[i][j] >= emp.counts[i][j - 1]);
                }
                assert!(emp.counts[i][j] <= emp.total);
            }
        }
    }

    #[test]
    fn eta_zero_endpoints_straddle_diagonal() {
        // at η = 0, t = 1 the observation interpolates between (T, T+1)
        // and (T+1, T) lattice points
        let consts = scaling_constants(0.25).unwrap();
        let p = ObsPoint::build(0.0, 1.0, 100.0, &consts).unwrap();
        let ep = p.endpoints();
        assert_eq!(ep[0], (100, 101));
        assert_eq!(ep[1], (101, 100));
        assert!((p.theta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small_cfg();
        cfg.q = 1.5;
        assert!(sample_pairs(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.t2 = 0.5;
        assert!(sample_pairs(&cfg).is_err());
        let cfg = LppConfig {
            samples: 10,
            ..small_cfg()
        };
        assert!(empirical_two_time(&cfg, &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn alpha_from_times() {
        let cfg = small_cfg();
        assert!((cfg.alpha() - 1.0).abs() < 1e-15);
    }
}
