//! Dense real linear algebra on small matrices: ranks, kernels, images,
//! spectral functions of symmetric matrices, and the subspace lattice.
//!
//! Floating tolerances follow two fixed rules: a singular value counts as
//! nonzero when it exceeds `1e-9 * max(sigma_max, 1)`, and an eigenvalue of
//! a symmetric matrix counts as zero when it lies in `[-1e-9, 1e-9]`.

pub mod exact;
pub mod form;
pub mod subspace;

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

pub use form::{QuadForm, Signature};
pub use subspace::Subspace;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Eigenvalues in `[-TOL_PD, TOL_PD]` are treated as zero.
pub const TOL_PD: f64 = 1e-9;

const RANK_REL: f64 = 1e-9;

/// Singular-value cutoff for `m`.
pub fn tol_rank(m: &Mat) -> f64 {
    let smax = singular_values(m).into_iter().fold(0.0, f64::max);
    RANK_REL * smax.max(1.0)
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

pub fn rank(m: &Mat) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tol = RANK_REL * smax.max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (as columns) of `ker m`.
pub fn null_space(m: &Mat) -> Mat {
    let (r, c) = m.shape();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    if r == 0 {
        return Mat::identity(c, c);
    }
    // Pad to at least `c` rows so the SVD returns a full right factor.
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("right factor requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = RANK_REL * smax.max(1.0);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    columns(c, &cols)
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &Mat) -> Mat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Mat::zeros(r, 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("left factor requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = RANK_REL * smax.max(1.0);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    columns(r, &cols)
}

pub(crate) fn columns(n: usize, cols: &[DVector<f64>]) -> Mat {
    let mut out = Mat::zeros(n, cols.len());
    for (j, v) in cols.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

pub fn vstack(blocks: &[&Mat], ncols: usize) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, ncols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), ncols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

pub fn hstack(blocks: &[&Mat], nrows: usize) -> Mat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(nrows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (nrows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn asymmetry(m: &Mat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.transpose()))
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues ascending.
pub fn sym_eigen(m: &Mat) -> (Vector, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vector::zeros(0), Mat::zeros(0, 0));
    }
    let e = SymmetricEigen::new(symmetrize(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = Vector::from_iterator(n, idx.iter().map(|&i| e.eigenvalues[i]));
    let mut vecs = Mat::zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_eigen(m).0[0]
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = sym_eigen(m);
    let d = Mat::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

pub fn sym_exp(m: &Mat) -> Mat {
    sym_apply(m, f64::exp)
}

pub fn spd_sqrt(m: &Mat) -> Mat {
    sym_apply(m, |x| x.max(0.0).sqrt())
}

pub fn spd_inv_sqrt(m: &Mat) -> Mat {
    sym_apply(m, |x| 1.0 / x.sqrt())
}

pub fn spd_log(m: &Mat) -> Mat {
    sym_apply(m, f64::ln)
}

/// `log det m` when `m` is (numerically) positive definite.
pub fn logdet_pd(m: &Mat) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let ch = symmetrize(m).cholesky()?;
    let l = ch.l_dirty();
    let mut s = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        s += 2.0 * d.ln();
    }
    Some(s)
}

/// Inverse of a positive definite matrix.
pub fn inv_pd(m: &Mat) -> Option<Mat> {
    if m.nrows() == 0 {
        return Some(Mat::zeros(0, 0));
    }
    symmetrize(m).cholesky().map(|c| symmetrize(&c.inverse()))
}

/// Solves `m x = b` for square invertible `m`.
pub fn solve(m: &Mat, b: &Mat) -> Option<Mat> {
    if m.nrows() == 0 {
        return Some(Mat::zeros(0, b.ncols()));
    }
    m.clone().lu().solve(b)
}
