#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{IblError, Result};
use crate::linalg::{inv_pd, logdet_pd, Mat};
use crate::problem::NormalizedProblem;
use alloc::format;
use alloc::vec::Vec;

/// One positive definite `A_k` per factor, standing for the centered
/// Gaussian `x -> exp(-pi <x, A_k x>)` on `H_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussTuple {
    pub mats: Vec<Mat>,
}

impl GaussTuple {
    /// `A_k = Id` for every factor.
    pub fn identity(np: &NormalizedProblem) -> Self {
        GaussTuple {
            mats: np.factors().iter().map(|f| Mat::identity(f.target_dim(), f.target_dim())).collect(),
        }
    }
}

pub(crate) fn check_tuple(np: &NormalizedProblem, t: &GaussTuple) -> Result<Vec<f64>> {
    if t.mats.len() != np.factors().len() {
        return Err(IblError::DimensionMismatch {
            what: "Gaussian tuple length".into(),
            expected: np.factors().len(),
            found: t.mats.len(),
        });
    }
    let mut logdets = Vec::with_capacity(t.mats.len());
    for (k, (a, f)) in t.mats.iter().zip(np.factors()).enumerate() {
        let d = f.target_dim();
        if a.shape() != (d, d) {
            return Err(IblError::DimensionMismatch {
                what: format!("A_{}", k + 1),
                expected: d,
                found: a.nrows(),
            });
        }
        let ld = logdet_pd(a).ok_or_else(|| IblError::NotPositiveDefinite(format!("A_{}", k + 1)))?;
        logdets.push(ld);
    }
    Ok(logdets)
}

/// `Q + sum_k c_k B_k^T A_k B_k`.
pub fn gram(np: &NormalizedProblem, t: &GaussTuple) -> Mat {
    let mut a = np.kernel().matrix().clone();
    for (f, ak) in np.factors().iter().zip(&t.mats) {
        if f.exponent != 0.0 && f.target_dim() > 0 {
            a += f.map.transpose() * ak * &f.map * f.exponent;
        }
    }
    a
}

/// `log det(Q + sum c_k B_k^T A_k B_k) - sum c_k log det A_k`, or `None`
/// when the tuple lies outside the admissible cone.
pub fn objective(np: &NormalizedProblem, t: &GaussTuple) -> Result<Option<f64>> {
    let logdets = check_tuple(np, t)?;
    let Some(ld) = logdet_pd(&gram(np, t)) else {
        return Ok(None);
    };
    let s: f64 = np.factors().iter().zip(&logdets).map(|(f, l)| f.exponent * l).sum();
    Ok(Some(ld - s))
}

/// Value of the functional on the centered Gaussian tuple; `+inf` outside
/// the admissible cone.
pub fn evaluate_gaussian(np: &NormalizedProblem, t: &GaussTuple) -> Result<f64> {
    Ok(match objective(np, t)? {
        Some(phi) => (-0.5 * phi).exp(),
        None => f64::INFINITY,
    })
}

/// `max_k |A_k^{-1} - B_k A^{-1} B_k^T|_F` over active factors.
pub fn stationarity_residual(np: &NormalizedProblem, t: &GaussTuple) -> Result<f64> {
    check_tuple(np, t)?;
    let ainv = inv_pd(&gram(np, t))
        .ok_or_else(|| IblError::Precondition("tuple outside the admissible cone".into()))?;
    let mut r: f64 = 0.0;
    for (f, ak) in np.factors().iter().zip(&t.mats) {
        if f.exponent == 0.0 || f.target_dim() == 0 {
            continue;
        }
        let m = &f.map * &ainv * f.map.transpose();
        let akinv = inv_pd(ak).expect("checked positive definite");
        r = r.max((akinv - m).norm());
    }
    Ok(r)
}
