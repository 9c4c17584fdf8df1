//! Exact linear algebra over the rationals, used when a datum is given with
//! rational entries so that ranks and kernels carry no rounding.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Q>) -> Self {
        assert_eq!(data.len(), rows * cols, "rational matrix shape");
        RatMatrix { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        Self::from_rows(rows, cols, data.iter().map(|&x| Q::from_integer(x.into())).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "rational product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    pub fn vstack(blocks: &[&RatMatrix], cols: usize) -> Self {
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack width");
            data.extend(b.data.iter().cloned());
            rows += b.rows;
        }
        RatMatrix { rows, cols, data }
    }

    pub fn hstack(blocks: &[&RatMatrix], rows: usize) -> Self {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, at + j)] = b[(i, j)].clone();
                }
            }
            at += b.cols;
        }
        out
    }

    pub fn to_f64(&self) -> super::Mat {
        super::Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &f * &m[(r, j)];
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `ker self`, one vector per column.
    pub fn kernel(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out[(f, k)] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                out[(p, k)] = -r[(i, f)].clone();
            }
        }
        out
    }

    /// Solves `self x = b` for a square invertible matrix.
    pub fn solve(&self, b: &Self) -> Option<Self> {
        let n = self.rows;
        if self.cols != n || b.rows != n {
            return None;
        }
        let aug = Self::hstack(&[self, b], n);
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut x = Self::zeros(n, b.cols);
        for i in 0..n {
            for j in 0..b.cols {
                x[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(x)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl core::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

/// A subspace of `Q^n` kept as the nonzero rows of a reduced echelon form,
/// which makes equality a plain comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatSubspace {
    rows: RatMatrix,
}

impl RatSubspace {
    pub fn zero(n: usize) -> Self {
        RatSubspace { rows: RatMatrix::zeros(0, n) }
    }

    pub fn full(n: usize) -> Self {
        RatSubspace { rows: RatMatrix::identity(n) }
    }

    /// Span of the columns of `m`.
    pub fn span(m: &RatMatrix) -> Self {
        Self::from_row_vectors(&m.transpose())
    }

    fn from_row_vectors(m: &RatMatrix) -> Self {
        let (r, piv) = m.rref();
        let k = piv.len();
        let data = r.data[..k * m.cols].to_vec();
        RatSubspace { rows: RatMatrix::from_rows(k, m.cols, data) }
    }

    pub fn kernel(m: &RatMatrix) -> Self {
        Self::span(&m.kernel())
    }

    pub fn ambient(&self) -> usize {
        self.rows.cols
    }

    pub fn dim(&self) -> usize {
        self.rows.rows
    }

    /// Basis vectors as columns.
    pub fn basis(&self) -> RatMatrix {
        self.rows.transpose()
    }

    /// `{ x : <x, v> = 0 for v in self }`.
    pub fn annihilator(&self) -> Self {
        if self.dim() == 0 {
            return Self::full(self.ambient());
        }
        Self::kernel(&self.rows)
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self::from_row_vectors(&RatMatrix::vstack(&[&self.rows, &other.rows], self.ambient()))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.annihilator().sum(&other.annihilator()).annihilator()
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.sum(other).dim() == self.dim()
    }

    /// `dim m(self)`.
    pub fn image_dim(&self, m: &RatMatrix) -> usize {
        if self.dim() == 0 {
            return 0;
        }
        m.mul(&self.basis()).rank()
    }

    /// `{ x : Q(x, v) = 0 for v in self }` for the symmetric matrix `qm`.
    pub fn q_orth_complement(&self, qm: &RatMatrix) -> Self {
        if self.dim() == 0 {
            return Self::full(self.ambient());
        }
        Self::kernel(&self.rows.mul(qm))
    }
}
