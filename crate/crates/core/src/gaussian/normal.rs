//! Data already in geometric position, and the Gaussian covariance form of
//! the inequality.

use crate::classify::classify;
use crate::error::{IblError, Result};
use crate::linalg::{max_abs, min_eigenvalue, spd_inv_sqrt, spd_sqrt, Mat, QuadForm};
use crate::problem::{validate, Factor, NormalizedProblem, Problem};
use alloc::vec::Vec;

const GEOMETRIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricReport {
    /// `B_k B_k^T = Id` for every factor.
    pub isometries: bool,
    /// `Q + sum c_k B_k^T B_k = Id`.
    pub identity_sum: bool,
    pub dim_condition: bool,
    pub residual: f64,
}

impl GeometricReport {
    /// When true the supremum equals 1 and is attained at `A_k = Id`.
    pub fn is_geometric(&self) -> bool {
        self.isometries && self.identity_sum && self.dim_condition
    }
}

pub fn geometric_check(np: &NormalizedProblem) -> GeometricReport {
    let n = np.dim();
    let mut iso: f64 = 0.0;
    let mut sum = np.kernel().matrix().clone();
    for f in np.factors() {
        let d = f.target_dim();
        iso = iso.max(max_abs(&(&f.map * f.map.transpose() - Mat::identity(d, d))));
        sum += f.map.transpose() * &f.map * f.exponent;
    }
    let id = max_abs(&(sum - Mat::identity(n, n)));
    let scale = 1.0 + np.factors().iter().map(|f| f.exponent.abs()).sum::<f64>();
    GeometricReport {
        isometries: iso <= GEOMETRIC_TOL,
        identity_sum: id <= GEOMETRIC_TOL * scale,
        dim_condition: classify(np).dim_condition,
        residual: iso.max(id),
    }
}

#[derive(Debug, Clone)]
pub struct CdpReport {
    /// `Sigma - diag(p_k Sigma_k)` is positive semidefinite.
    pub holds: bool,
    pub min_eigenvalue: f64,
    /// The same inequality written as a datum in geometric position with
    /// `c_k = 1/p_k` and `Q = Id - sum c_k B_k^T B_k`.
    pub problem: NormalizedProblem,
    /// `order[j]` is the covariance block carried by factor `j`.
    pub order: Vec<usize>,
    pub dim_condition: bool,
}

/// Gaussian vector with covariance `sigma`, split into blocks of the given
/// sizes, and exponents `p_k`.
pub fn cdp_check(sigma: &Mat, blocks: &[usize], p: &[f64]) -> Result<CdpReport> {
    let n = sigma.nrows();
    if blocks.len() != p.len() || blocks.iter().sum::<usize>() != n || !sigma.is_square() {
        return Err(IblError::DimensionMismatch {
            what: "covariance blocks".into(),
            expected: n,
            found: blocks.iter().sum(),
        });
    }
    if p.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(IblError::Precondition("exponents p_k must be finite and nonzero".into()));
    }
    let sigma = QuadForm::new(sigma.clone())?.matrix().clone();
    if min_eigenvalue(&sigma) <= 0.0 {
        return Err(IblError::NotPositiveDefinite("covariance".into()));
    }
    let offsets: Vec<usize> = blocks.iter().scan(0, |s, &b| { let o = *s; *s += b; Some(o) }).collect();
    let mut gap = sigma.clone();
    for ((&o, &b), &pk) in offsets.iter().zip(blocks).zip(p) {
        let blk = sigma.view((o, o), (b, b)).into_owned();
        gap.view_mut((o, o), (b, b)).copy_from(&(&blk * (1.0 - pk)));
    }
    let min = min_eigenvalue(&gap);
    let holds = min >= -1e-9 * max_abs(&sigma).max(1.0);

    let root = spd_sqrt(&sigma);
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by_key(|&k| p[k] < 0.0);
    let mut factors = Vec::new();
    let mut q = Mat::identity(n, n);
    for &k in &order {
        let (o, b) = (offsets[k], blocks[k]);
        let rows = root.view((o, 0), (b, n)).into_owned();
        let blk = sigma.view((o, o), (b, b)).into_owned();
        let map = spd_inv_sqrt(&blk) * rows;
        let c = 1.0 / p[k];
        q -= map.transpose() * &map * c;
        factors.push(Factor::new(map, c));
    }
    let problem = validate(&Problem::new(n, factors, QuadForm::new(crate::linalg::symmetrize(&q))?))?;
    let dim_condition = classify(&problem).dim_condition;
    Ok(CdpReport { holds, min_eigenvalue: min, problem, order, dim_condition })
}
