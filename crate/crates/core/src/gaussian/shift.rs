//! Translated Gaussians and the quadratic form in the translations.

#[allow(unused_imports)]
use num_traits::Float;
use super::evaluate::{check_tuple, GaussTuple};
use crate::classify::Decomposition;
use crate::error::{IblError, Result};
use crate::linalg::{inv_pd, logdet_pd, max_abs, min_eigenvalue, rank, vstack, Mat, Vector};
use crate::problem::NormalizedProblem;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Factors `0..=m+1` with the two kernel pieces at the ends:
/// `(B_k, c_k, A_k)` with `c_0 = 1`, `A_0 = Q+`, `c_{m+1} = -1`,
/// `A_{m+1} = Q-`.
fn extended<'a>(
    np: &'a NormalizedProblem,
    d: &'a Decomposition,
    t: &'a GaussTuple,
) -> Vec<(&'a Mat, f64, &'a Mat)> {
    let mut out = Vec::with_capacity(np.factors().len() + 2);
    out.push((&d.b0, 1.0, &d.q_plus));
    for (f, a) in np.factors().iter().zip(&t.mats) {
        out.push((&f.map, f.exponent, a));
    }
    out.push((&d.b_last, -1.0, &d.q_minus));
    out
}

fn check_split(np: &NormalizedProblem, d: &Decomposition) -> Result<()> {
    let n = np.dim();
    if d.b0.ncols() != n || d.b_last.ncols() != n {
        return Err(IblError::DimensionMismatch {
            what: "decomposition".into(),
            expected: n,
            found: d.b0.ncols(),
        });
    }
    let joint = vstack(&[&d.b0, &d.b_last], n);
    if rank(&joint) != joint.nrows() {
        return Err(IblError::Precondition("(B_0, B_{m+1}) must be jointly surjective".into()));
    }
    Ok(())
}

/// Value of the functional on `x -> exp(-pi <A_k (x - u_k), x - u_k>)`,
/// with `shifts = (u_0, u_1, ..., u_m, u_{m+1})`; the end shifts translate
/// the two kernel pieces.
pub fn evaluate_translated(
    np: &NormalizedProblem,
    d: &Decomposition,
    t: &GaussTuple,
    shifts: &[Vector],
) -> Result<f64> {
    check_split(np, d)?;
    let logdets = check_tuple(np, t)?;
    let ext = extended(np, d, t);
    if shifts.len() != ext.len() {
        return Err(IblError::DimensionMismatch {
            what: "shift list".into(),
            expected: ext.len(),
            found: shifts.len(),
        });
    }
    let n = np.dim();
    let mut a = Mat::zeros(n, n);
    let mut v = Vector::zeros(n);
    let mut quad = 0.0;
    for ((b, c, ak), u) in ext.iter().zip(shifts) {
        if u.len() != b.nrows() {
            return Err(IblError::DimensionMismatch {
                what: "shift".into(),
                expected: b.nrows(),
                found: u.len(),
            });
        }
        a += b.transpose() * *ak * *b * *c;
        let aku = *ak * u;
        v += b.transpose() * &aku * *c;
        quad += c * u.dot(&aku);
    }
    let Some(ld) = logdet_pd(&a) else {
        return Ok(f64::INFINITY);
    };
    let ainv = inv_pd(&a).expect("positive definite");
    let s: f64 = np.factors().iter().zip(&logdets).map(|(f, l)| f.exponent * l).sum();
    let ratio = ld - s;
    let expo = PI * (v.dot(&(&ainv * &v)) - quad);
    Ok((-0.5 * ratio + expo).exp())
}

#[derive(Debug, Clone)]
pub struct ShiftForm {
    /// Symmetric matrix on the stacked shifts `(u_0, ..., u_{m+1})`.
    pub matrix: Mat,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// The exponent of [`evaluate_translated`] is `pi u^T M u`; when `M` is
/// positive semidefinite translations cannot lower the value.
pub fn shift_form(np: &NormalizedProblem, d: &Decomposition, t: &GaussTuple) -> Result<ShiftForm> {
    check_split(np, d)?;
    check_tuple(np, t)?;
    let ext = extended(np, d, t);
    let n = np.dim();
    let sizes: Vec<usize> = ext.iter().map(|(b, _, _)| b.nrows()).collect();
    let total: usize = sizes.iter().sum();
    let mut a = Mat::zeros(n, n);
    let mut g = Mat::zeros(n, total);
    let mut diag = Mat::zeros(total, total);
    let mut at = 0;
    for ((b, c, ak), &sz) in ext.iter().zip(&sizes) {
        a += b.transpose() * *ak * *b * *c;
        g.view_mut((0, at), (n, sz)).copy_from(&(b.transpose() * *ak * *c));
        diag.view_mut((at, at), (sz, sz)).copy_from(&(*ak * *c));
        at += sz;
    }
    let ainv = inv_pd(&a).ok_or_else(|| IblError::Precondition("tuple outside the admissible cone".into()))?;
    let m = crate::linalg::symmetrize(&(g.transpose() * ainv * &g - diag));
    let min = min_eigenvalue(&m);
    let psd = total == 0 || min >= -1e-9 * max_abs(&m).max(1.0);
    Ok(ShiftForm { matrix: m, min_eigenvalue: min, psd })
}

fn check_quad(maps: &[Mat], weights: &[f64], mats: &[Mat], ys: &[Vector]) -> Result<(usize, Mat)> {
    let m = maps.len();
    if weights.len() != m || mats.len() != m || ys.len() != m || m == 0 {
        return Err(IblError::DimensionMismatch {
            what: "quadratic gap inputs".into(),
            expected: m,
            found: weights.len().min(mats.len()).min(ys.len()),
        });
    }
    let n = maps[0].ncols();
    let plus: Vec<&Mat> = maps.iter().zip(weights).filter(|(_, &c)| c > 0.0).map(|(b, _)| b).collect();
    let stacked = vstack(&plus, n);
    if rank(&stacked) != stacked.nrows() {
        return Err(IblError::Precondition("positive maps must be jointly surjective".into()));
    }
    let mut a = Mat::zeros(n, n);
    for ((b, &c), ak) in maps.iter().zip(weights).zip(mats) {
        a += b.transpose() * ak * b * c;
    }
    Ok((n, a))
}

/// `<A^{-1} y, y> - sum c_k <A_k^{-1} y_k, y_k>` with
/// `A = sum c_k B_k^T A_k B_k` and `y = sum c_k B_k^T y_k`.
pub fn quad_gap(maps: &[Mat], weights: &[f64], mats: &[Mat], ys: &[Vector]) -> Result<f64> {
    let (n, a) = check_quad(maps, weights, mats, ys)?;
    let ainv = inv_pd(&a).ok_or_else(|| IblError::NotPositiveDefinite("sum c_k B_k^T A_k B_k".into()))?;
    let mut y = Vector::zeros(n);
    let mut rhs = 0.0;
    for (((b, &c), ak), yk) in maps.iter().zip(weights).zip(mats).zip(ys) {
        y += b.transpose() * yk * c;
        let akinv = inv_pd(ak).ok_or_else(|| IblError::NotPositiveDefinite("A_k".into()))?;
        rhs += c * yk.dot(&(akinv * yk));
    }
    Ok(y.dot(&(ainv * &y)) - rhs)
}

/// The choice `y_k = A_k B_k A^{-1} w` at which the gap vanishes.
pub fn quad_gap_equality_choice(maps: &[Mat], weights: &[f64], mats: &[Mat], w: &Vector) -> Result<Vec<Vector>> {
    let ys: Vec<Vector> = maps.iter().map(|b| Vector::zeros(b.nrows())).collect();
    let (_, a) = check_quad(maps, weights, mats, &ys)?;
    let ainv = inv_pd(&a).ok_or_else(|| IblError::NotPositiveDefinite("sum c_k B_k^T A_k B_k".into()))?;
    let aw = ainv * w;
    Ok(maps.iter().zip(mats).map(|(b, ak)| ak * (b * &aw)).collect())
}
