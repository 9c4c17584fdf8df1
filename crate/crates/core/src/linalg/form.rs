use super::{asymmetry, max_abs, min_eigenvalue, null_space, sym_eigen, Mat, Subspace, TOL_PD};
use crate::error::{IblError, Result};
use alloc::format;

/// Counts `(s+, s-, s0)` of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

/// A symmetric matrix read as the quadratic form `pi <x, Q x>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    m: Mat,
}

impl QuadForm {
    /// Accepts `m` when it is square and symmetric up to
    /// `1e-9 * max(1, max |entry|)`; the stored matrix is the symmetric part.
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(IblError::DimensionMismatch {
                what: format!("kernel ({}x{})", m.nrows(), m.ncols()),
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(IblError::NotFinite("kernel".into()));
        }
        let asym = asymmetry(&m);
        if asym > 1e-9 * max_abs(&m).max(1.0) {
            return Err(IblError::NotSymmetric(asym));
        }
        Ok(QuadForm { m: super::symmetrize(&m) })
    }

    pub fn zero(n: usize) -> Self {
        QuadForm { m: Mat::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn signature(&self) -> Signature {
        let (vals, _) = sym_eigen(&self.m);
        let plus = vals.iter().filter(|&&v| v > TOL_PD).count();
        let minus = vals.iter().filter(|&&v| v < -TOL_PD).count();
        Signature { plus, minus, zero: self.dim() - plus - minus }
    }

    /// Eigenvectors of the eigenvalues counted as zero, so that
    /// `dim radical = s0` always holds.
    pub fn radical(&self) -> Subspace {
        let (vals, vecs) = sym_eigen(&self.m);
        let keep: alloc::vec::Vec<_> = (0..self.dim())
            .filter(|&i| vals[i].abs() <= TOL_PD)
            .map(|i| vecs.column(i).into_owned())
            .collect();
        Subspace::from_orthonormal(super::columns(self.dim(), &keep))
    }

    /// Gram matrix of the form on an orthonormal basis of `v`.
    pub fn restrict(&self, v: &Subspace) -> Mat {
        v.basis().transpose() * &self.m * v.basis()
    }

    /// Positive definiteness on `v`, with the boundary counted as failure.
    /// The zero subspace passes.
    pub fn is_pd_on(&self, v: &Subspace) -> bool {
        v.dim() == 0 || min_eigenvalue(&self.restrict(v)) > TOL_PD
    }

    /// `{ x : Q(x, v) = 0 for all v in V }`.
    pub fn orth_complement(&self, v: &Subspace) -> Subspace {
        if v.dim() == 0 {
            return Subspace::full(self.dim());
        }
        let rows = v.basis().transpose() * &self.m;
        Subspace::from_orthonormal(null_space(&rows))
    }
}
