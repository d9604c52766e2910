//! Dense matrices with LU factorization over f64 and Complex64.
//!
//! The operator kernels discretized in this crate produce matrices of a few
//! hundred rows at most, so a plain partially-pivoted LU is all that is
//! needed for determinants, resolvent solves and condition estimates.

use num_complex::Complex64;

pub trait Field:
    Copy
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn from_f64(x: f64) -> Self;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Row-parallel construction for expensive entry functions.
    pub fn par_from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T + Sync) -> Self
    where
        T: Send,
    {
        use rayon::prelude::*;
        let data: Vec<T> = (0..rows)
            .into_par_iter()
            .flat_map_iter(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow.iter()) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| a + b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.modulus()).fold(0.0, f64::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, PA = LU stored packed.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl<T: Field> Lu<T> {
    pub fn factor(a: &Mat<T>) -> Lu<T> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let m = lu[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / piv;
                lu[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - sub;
                }
            }
        }
        Lu {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn det(&self) -> T {
        if self.singular {
            return T::zero();
        }
        let n = self.lu.rows;
        let mut d = T::from_f64(self.sign);
        for i in 0..n {
            d = d * self.lu[(i, i)];
        }
        d
    }

    /// Ratio of the largest to the smallest pivot; a cheap surrogate for
    /// the condition number adequate for sanity thresholds.
    pub fn condition_estimate(&self) -> f64 {
        if self.singular {
            return f64::INFINITY;
        }
        let n = self.lu.rows;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let m = self.lu[(i, i)].modulus();
            lo = lo.min(m);
            hi = hi.max(m);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    /// Solve A X = B column-wise.
    pub fn solve_mat(&self, b: &Mat<T>) -> Mat<T> {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut out = Mat::zeros(n, b.cols);
        let mut col = vec![T::zero(); n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Largest two singular values by power iteration on AᵀA with deflation.
/// Only used by tests that verify rank-one structure.
pub fn top_two_singular_values(a: &Mat<f64>) -> (f64, f64) {
    let (s1, v1) = top_singular(a, None);
    let (s2, _) = top_singular(a, Some((&v1, s1)));
    (s1, s2)
}

fn top_singular(a: &Mat<f64>, deflate: Option<(&[f64], f64)>) -> (f64, Vec<f64>) {
    let n = a.cols;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 2654435761) % 97) as f64 / 97.0)
        .collect();
    normalize(&mut v);
    let mut s = 0.0;
    for _ in 0..200 {
        if let Some((v1, _)) = deflate {
            let d = dot(&v, v1);
            for (x, y) in v.iter_mut().zip(v1) {
                *x -= d * y;
            }
        }
        // w = A v, u = Aᵀ w
        let mut w = vec![0.0; a.rows];
        for i in 0..a.rows {
            w[i] = dot(a.row(i), &v);
        }
        let mut u = vec![0.0; n];
        for i in 0..a.rows {
            let wi = w[i];
            for (uj, &aij) in u.iter_mut().zip(a.row(i)) {
                *uj += wi * aij;
            }
        }
        if let Some((v1, _)) = deflate {
            let d = dot(&u, v1);
            for (x, y) in u.iter_mut().zip(v1) {
                *x -= d * y;
            }
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (0.0, v);
        }
        s = norm.sqrt();
        for (x, y) in v.iter_mut().zip(&u) {
            *x = y / norm;
        }
    }
    (s, v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_det_and_solve() {
        let a = Mat {
            rows: 3,
            cols: 3,
            data: vec![2.0, 1.0, 1.0, 4.0, -6.0, 0.0, -2.0, 7.0, 2.0],
        };
        let lu = Lu::factor(&a);
        assert!((lu.det() - (-16.0)).abs() < 1e-12);
        let x = lu.solve_vec(&[5.0, -2.0, 9.0]);
        // residual check
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[(i, j)] * x[j]).sum();
            let b = [5.0, -2.0, 9.0][i];
            assert!((r - b).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_det() {
        use num_complex::Complex64 as C;
        let a = Mat {
            rows: 2,
            cols: 2,
            data: vec![
                C::new(1.0, 1.0),
                C::new(0.0, 2.0),
                C::new(3.0, 0.0),
                C::new(1.0, -1.0),
            ],
        };
        let d = Lu::factor(&a).det();
        // (1+i)(1-i) - (2i)(3) = 2 - 6i
        assert!((d - C::new(2.0, -6.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_values_of_rank_one() {
        let u = [1.0, 2.0, 3.0];
        let v = [4.0, 5.0, 6.0];
        let a = Mat::from_fn(3, 3, |i, j| u[i] * v[j]);
        let (s1, s2) = top_two_singular_values(&a);
        let expect = (14.0f64).sqrt() * (77.0f64).sqrt();
        assert!((s1 - expect).abs() < 1e-9 * expect);
        assert!(s2 < 1e-10);
    }
}
