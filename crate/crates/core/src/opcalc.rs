//! Nyström discretization of integral operators on `L²(ℝ₊)` and on
//! `Y = L²(ℝ₊) ⊕ L²(ℝ₊)`.
//!
//! An operator with kernel `K(v₁, v₂)` becomes the matrix
//! `M[i][j] = √w_i K(x_i, x_j) √w_j` on the nodes of a half-line rule. The
//! symmetric weight folding makes matrices of symmetric kernels symmetric,
//! matrix products approximate operator composition, and `det(I + M)` the
//! Fredholm determinant. Rank-one and non-symmetric kernels use the same
//! convention so there is a single code path.

use crate::linalg::{Field, Lu, Mat};
use crate::quad::HalfLineRule;
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::{Arc, OnceLock};

pub use crate::airy::SampledFunction as HalfLineVector;

/// Nyström matrix of a kernel on the nodes of a shared half-line rule.
#[derive(Debug, Clone)]
pub struct Operator<T: Field> {
    pub rule: Arc<HalfLineRule>,
    pub matrix: Mat<T>,
    /// Provenance label ("K1", "M3", "k6", ...): only for diagnostics.
    pub kernel_tag: String,
    resolvent: OnceLock<Arc<Lu<T>>>,
}

pub type DiscreteOperator = Operator<f64>;
pub type ComplexOperator = Operator<Complex64>;

/// Condition-estimate threshold beyond which resolvent solves are refused.
/// The operators appearing here all have spectral radius below one, so a
/// violation indicates an assembly bug rather than a borderline problem.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e8;

impl<T: Field> Operator<T> {
    pub fn from_matrix(rule: Arc<HalfLineRule>, matrix: Mat<T>, tag: impl Into<String>) -> Self {
        assert_eq!(matrix.rows, rule.n, "matrix rows must match rule");
        assert_eq!(matrix.cols, rule.n, "matrix cols must match rule");
        Operator {
            rule,
            matrix,
            kernel_tag: tag.into(),
            resolvent: OnceLock::new(),
        }
    }

    /// Weight-folded matrix from plain kernel values.
    pub fn from_kernel(
        rule: Arc<HalfLineRule>,
        tag: impl Into<String>,
        mut kernel: impl FnMut(f64, f64) -> T,
    ) -> Self {
        let n = rule.n;
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let mat = Mat::from_fn(n, n, |i, j| {
            kernel(rule.nodes[i], rule.nodes[j]) * T::from_f64(sw[i] * sw[j])
        });
        Self::from_matrix(rule, mat, tag)
    }

    pub fn zero(rule: Arc<HalfLineRule>) -> Self {
        let n = rule.n;
        Self::from_matrix(rule, Mat::zeros(n, n), "0")
    }

    /// Discrete identity (kernel δ(v₁ - v₂)); useful in algebra tests.
    pub fn identity(rule: Arc<HalfLineRule>) -> Self {
        let n = rule.n;
        Self::from_matrix(rule, Mat::identity(n), "I")
    }

    pub fn same_rule(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.rule, &other.rule) || *self.rule == *other.rule
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !self.same_rule(other) {
            return Err(Error::RuleMismatch);
        }
        Ok(Self::from_matrix(
            self.rule.clone(),
            self.matrix.matmul(&other.matrix),
            format!("{}∘{}", self.kernel_tag, other.kernel_tag),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_rule(other) {
            return Err(Error::RuleMismatch);
        }
        Ok(Self::from_matrix(
            self.rule.clone(),
            self.matrix.add(&other.matrix),
            format!("{}+{}", self.kernel_tag, other.kernel_tag),
        ))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_matrix(self.rule.clone(), self.matrix.scale(s), self.kernel_tag.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_matrix(
            self.rule.clone(),
            self.matrix.transpose(),
            format!("{}ᵀ", self.kernel_tag),
        )
    }

    /// Weighted diagonal sum = ∫ K(v,v) dv.
    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rule.n {
            acc = acc + self.matrix[(i, i)];
        }
        acc
    }

    /// tr(PQ) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        if !self.same_rule(other) {
            return Err(Error::RuleMismatch);
        }
        let n = self.rule.n;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        Ok(acc)
    }

    /// `det(I + K)`.
    pub fn fredholm_det(&self) -> T {
        let n = self.rule.n;
        let mut m = self.matrix.clone();
        for i in 0..n {
            m[(i, i)] = m[(i, i)] + T::one();
        }
        Lu::factor(&m).det()
    }

    fn resolvent_factors(&self) -> Result<Arc<Lu<T>>> {
        let fac = self.resolvent.get_or_init(|| {
            let n = self.rule.n;
            let mut m = self.matrix.scale(-T::one());
            for i in 0..n {
                m[(i, i)] = m[(i, i)] + T::one();
            }
            Arc::new(Lu::factor(&m))
        });
        if fac.is_singular() || fac.condition_estimate() > RESOLVENT_CONDITION_LIMIT {
            return Err(Error::NearSingular(fac.condition_estimate()));
        }
        Ok(fac.clone())
    }

    /// `(I - K)^{-r} X` for an operator X.
    pub fn resolvent_apply(&self, r: usize, x: &Self) -> Result<Self> {
        assert!(r >= 1, "resolvent_apply requires r >= 1");
        if !self.same_rule(x) {
            return Err(Error::RuleMismatch);
        }
        let fac = self.resolvent_factors()?;
        let mut m = x.matrix.clone();
        for _ in 0..r {
            m = fac.solve_mat(&m);
        }
        Ok(Self::from_matrix(
            self.rule.clone(),
            m,
            format!("L^{}{}", r, x.kernel_tag),
        ))
    }

    /// `(I - K)^{-r}` applied to folded coordinates of a sampled function.
    pub fn resolvent_apply_values(&self, r: usize, values: &[T]) -> Result<Vec<T>> {
        assert!(r >= 1);
        assert_eq!(values.len(), self.rule.n);
        let fac = self.resolvent_factors()?;
        let sw: Vec<f64> = self.rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut folded: Vec<T> = values
            .iter()
            .zip(&sw)
            .map(|(&v, &s)| v * T::from_f64(s))
            .collect();
        for _ in 0..r {
            folded = fac.solve_vec(&folded);
        }
        Ok(folded
            .iter()
            .zip(&sw)
            .map(|(&v, &s)| v / T::from_f64(s))
            .collect())
    }

    /// Apply the operator to plain samples: `(K f)(x_i)`.
    pub fn apply(&self, values: &[T]) -> Vec<T> {
        let n = self.rule.n;
        assert_eq!(values.len(), n);
        let sw: Vec<f64> = self.rule.weights.iter().map(|w| w.sqrt()).collect();
        (0..n)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..n {
                    acc = acc + self.matrix[(i, j)] * values[j] * T::from_f64(sw[j]);
                }
                acc / T::from_f64(sw[i])
            })
            .collect()
    }

    /// `K^{(-k)}(v_i) = ∫ λ^{k-1}/(k-1)! K(v_i, λ) dλ` on the rule nodes.
    pub fn kminus(&self, k: usize) -> Vec<T> {
        assert!(k >= 1, "kminus requires k >= 1");
        let n = self.rule.n;
        let norm: f64 = (1..k).map(|i| i as f64).product::<f64>().max(1.0);
        let sw: Vec<f64> = self.rule.weights.iter().map(|w| w.sqrt()).collect();
        (0..n)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..n {
                    let lam = self.rule.nodes[j];
                    let poly = lam.powi(k as i32 - 1) / norm;
                    acc = acc + self.matrix[(i, j)] * T::from_f64(sw[j] * poly);
                }
                acc / T::from_f64(sw[i])
            })
            .collect()
    }

    /// `∫∫ K(λ₁, λ₂) λ₂^s / s! d²λ` (the b-table integral) and its starred
    /// variant weighting λ₁ instead.
    pub fn double_integral_sweight(&self, s: usize, starred: bool) -> T {
        let n = self.rule.n;
        let norm: f64 = (1..=s).map(|i| i as f64).product::<f64>().max(1.0);
        let sw: Vec<f64> = self.rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                let lam = if starred {
                    self.rule.nodes[i]
                } else {
                    self.rule.nodes[j]
                };
                let poly = lam.powi(s as i32) / norm;
                acc = acc + self.matrix[(i, j)] * T::from_f64(sw[i] * sw[j] * poly);
            }
        }
        acc
    }
}

impl DiscreteOperator {
    /// Promote to complex entries scaled by `c`.
    pub fn complexify(&self, c: Complex64) -> ComplexOperator {
        let mat = Mat {
            rows: self.matrix.rows,
            cols: self.matrix.cols,
            data: self.matrix.data.iter().map(|&x| c * x).collect(),
        };
        Operator::from_matrix(self.rule.clone(), mat, self.kernel_tag.clone())
    }
}

/// Complex linear combination of real operators sharing one rule.
pub fn lincomb(terms: &[(Complex64, &DiscreteOperator)]) -> Result<ComplexOperator> {
    let (_, first) = terms.first().expect("lincomb needs at least one term");
    let n = first.rule.n;
    let mut mat = Mat::zeros(n, n);
    for (c, op) in terms {
        if !first.same_rule(op) {
            return Err(Error::RuleMismatch);
        }
        for (dst, &src) in mat.data.iter_mut().zip(op.matrix.data.iter()) {
            *dst += c * src;
        }
    }
    Ok(Operator::from_matrix(first.rule.clone(), mat, "lincomb"))
}

/// Hankel-type operator with kernel `A(v₁ + v₂)`.
pub fn hankel_op(
    a: impl Fn(f64) -> f64,
    rule: &Arc<HalfLineRule>,
    tag: impl Into<String>,
) -> DiscreteOperator {
    Operator::from_kernel(rule.clone(), tag, |x, y| a(x + y))
}

/// Rank-one operator with kernel `A(v₁) B(v₂)`.
pub fn rank_one(a: &HalfLineVector, b: &HalfLineVector) -> Result<DiscreteOperator> {
    if *a.rule != *b.rule {
        return Err(Error::RuleMismatch);
    }
    let rule = a.rule.clone();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let n = rule.n;
    let mat = Mat::from_fn(n, n, |i, j| sw[i] * a.values[i] * b.values[j] * sw[j]);
    Ok(Operator::from_matrix(rule, mat, "A⊗B"))
}

/// `∫ a b` on the rule.
pub fn inner(rule: &HalfLineRule, a: &[f64], b: &[f64]) -> f64 {
    rule.weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&w, (&x, &y))| w * x * y)
        .sum()
}

/// 2×2 block operator on `Y = L² ⊕ L²`; all blocks share one rule.
#[derive(Debug, Clone)]
pub struct BlockOperator<T: Field> {
    pub blocks: [[Operator<T>; 2]; 2],
}

impl<T: Field> BlockOperator<T> {
    pub fn new(blocks: [[Operator<T>; 2]; 2]) -> Result<Self> {
        let r = &blocks[0][0];
        for row in &blocks {
            for b in row {
                if !r.same_rule(b) {
                    return Err(Error::RuleMismatch);
                }
            }
        }
        Ok(BlockOperator { blocks })
    }

    pub fn n(&self) -> usize {
        self.blocks[0][0].rule.n
    }

    /// `det(I + Q)` of the 2n × 2n assembly.
    pub fn fredholm_det(&self) -> T {
        let n = self.n();
        let mut m = Mat::zeros(2 * n, 2 * n);
        for bi in 0..2 {
            for bj in 0..2 {
                let blk = &self.blocks[bi][bj].matrix;
                for i in 0..n {
                    for j in 0..n {
                        m[(bi * n + i, bj * n + j)] = blk[(i, j)];
                    }
                }
            }
        }
        for i in 0..2 * n {
            m[(i, i)] = m[(i, i)] + T::one();
        }
        Lu::factor(&m).det()
    }

    pub fn trace(&self) -> T {
        self.blocks[0][0].trace() + self.blocks[1][1].trace()
    }
}
