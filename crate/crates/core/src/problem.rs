//! Inverse Brascamp-Lieb data and their validation.

use crate::error::{IblError, Result};
use crate::linalg::exact::{RatMatrix, Q};
use crate::linalg::{rank, vstack, Mat, QuadForm};
use alloc::format;
use alloc::vec::Vec;
use num_traits::{ToPrimitive, Zero};

/// One factor `f_k^{c_k}(B_k x)` with `B_k : H -> H_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub map: Mat,
    pub exponent: f64,
}

impl Factor {
    pub fn new(map: Mat, exponent: f64) -> Self {
        Factor { map, exponent }
    }

    /// `dim H_k`.
    pub fn target_dim(&self) -> usize {
        self.map.nrows()
    }
}

/// Exact rational copy of a datum, kept alongside the float data when the
/// input was rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactData {
    pub maps: Vec<RatMatrix>,
    pub exponents: Vec<Q>,
    pub kernel: RatMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub dim: usize,
    pub factors: Vec<Factor>,
    /// Number of leading factors with positive exponent.
    pub m_plus: usize,
    pub kernel: QuadForm,
    pub exact: Option<ExactData>,
}

impl Problem {
    /// Builds a datum, taking `m_plus` to be the number of leading positive
    /// exponents.
    pub fn new(dim: usize, factors: Vec<Factor>, kernel: QuadForm) -> Self {
        let m_plus = factors.iter().take_while(|f| f.exponent > 0.0).count();
        Problem { dim, factors, m_plus, kernel, exact: None }
    }

    /// Builds a datum from rational entries, keeping both representations.
    pub fn from_exact(dim: usize, exact: ExactData) -> Result<Self> {
        let factors = exact
            .maps
            .iter()
            .zip(&exact.exponents)
            .map(|(m, c)| Factor::new(m.to_f64(), c.to_f64().unwrap_or(f64::NAN)))
            .collect();
        let kernel = QuadForm::new(exact.kernel.to_f64())?;
        let mut p = Problem::new(dim, factors, kernel);
        p.exact = Some(exact);
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.factors.iter().map(|f| f.exponent).collect()
    }
}

/// A datum that passed [`validate`]; inert factors (zero exponent or zero
/// target dimension) are flagged but kept in place.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProblem {
    problem: Problem,
    inert: Vec<bool>,
}

impl NormalizedProblem {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn into_problem(self) -> Problem {
        self.problem
    }

    pub fn is_inert(&self, k: usize) -> bool {
        self.inert[k]
    }

    pub fn dim(&self) -> usize {
        self.problem.dim
    }

    pub fn m_plus(&self) -> usize {
        self.problem.m_plus
    }

    pub fn factors(&self) -> &[Factor] {
        &self.problem.factors
    }

    pub fn kernel(&self) -> &QuadForm {
        &self.problem.kernel
    }

    pub fn exact(&self) -> Option<&ExactData> {
        self.problem.exact.as_ref()
    }

    /// `(B_1, ..., B_{m+}) : H -> H_1 x ... x H_{m+}`.
    pub fn b_plus(&self) -> Mat {
        let f = &self.problem.factors[..self.problem.m_plus];
        let blocks: Vec<&Mat> = f.iter().map(|f| &f.map).collect();
        vstack(&blocks, self.problem.dim)
    }

    /// Exact counterpart of [`Self::b_plus`].
    pub fn b_plus_exact(&self) -> Option<RatMatrix> {
        let e = self.exact()?;
        let blocks: Vec<&RatMatrix> = e.maps[..self.problem.m_plus].iter().collect();
        Some(RatMatrix::vstack(&blocks, self.problem.dim))
    }

    /// `(B_0, B_1, ..., B_{m+})` for a given `B_0`.
    pub fn b_zero_plus(&self, b0: &Mat) -> Mat {
        vstack(&[b0, &self.b_plus()], self.problem.dim)
    }
}

pub fn validate(p: &Problem) -> Result<NormalizedProblem> {
    let n = p.dim;
    if p.kernel.dim() != n {
        return Err(IblError::DimensionMismatch {
            what: "kernel".into(),
            expected: n,
            found: p.kernel.dim(),
        });
    }
    if p.m_plus > p.m() {
        return Err(IblError::MPlusOutOfRange { m_plus: p.m_plus, m: p.m() });
    }
    let mut inert = Vec::with_capacity(p.m());
    for (k, f) in p.factors.iter().enumerate() {
        if f.map.ncols() != n {
            return Err(IblError::DimensionMismatch {
                what: format!("columns of factor {}", k + 1),
                expected: n,
                found: f.map.ncols(),
            });
        }
        if !f.exponent.is_finite() || f.map.iter().any(|x| !x.is_finite()) {
            return Err(IblError::NotFinite(format!("factor {}", k + 1)));
        }
        let positive_slot = k < p.m_plus;
        if positive_slot != (f.exponent > 0.0) {
            return Err(IblError::SignOrder { factor: k + 1, m_plus: p.m_plus });
        }
        if rank(&f.map) != f.target_dim() {
            return Err(IblError::NotSurjective(k + 1));
        }
        inert.push(f.exponent == 0.0 || f.target_dim() == 0);
    }
    if let Some(e) = &p.exact {
        check_exact(p, e)?;
    }
    Ok(NormalizedProblem { problem: p.clone(), inert })
}

fn check_exact(p: &Problem, e: &ExactData) -> Result<()> {
    let n = p.dim;
    if e.maps.len() != p.m() || e.exponents.len() != p.m() {
        return Err(IblError::DimensionMismatch {
            what: "exact factor list".into(),
            expected: p.m(),
            found: e.maps.len(),
        });
    }
    if e.kernel.nrows() != n || e.kernel.ncols() != n || e.kernel != e.kernel.transpose() {
        return Err(IblError::Precondition("exact kernel must be a symmetric n x n matrix".into()));
    }
    for (k, (m, c)) in e.maps.iter().zip(&e.exponents).enumerate() {
        if m.ncols() != n || m.nrows() != p.factors[k].target_dim() {
            return Err(IblError::DimensionMismatch {
                what: format!("exact factor {}", k + 1),
                expected: n,
                found: m.ncols(),
            });
        }
        if m.rank() != m.nrows() {
            return Err(IblError::NotSurjective(k + 1));
        }
        let positive_slot = k < p.m_plus;
        if positive_slot != (*c > Q::zero()) {
            return Err(IblError::SignOrder { factor: k + 1, m_plus: p.m_plus });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> Mat {
        Mat::from_row_slice(1, v.len(), v)
    }

    #[test]
    fn validation_accepts_and_is_idempotent() {
        let p = Problem::new(
            2,
            alloc::vec![Factor::new(row(&[1.0, 0.0]), 1.0), Factor::new(Mat::zeros(0, 2), 0.0)],
            QuadForm::zero(2),
        );
        let np = validate(&p).unwrap();
        assert!(np.is_inert(1));
        assert!(!np.is_inert(0));
        assert_eq!(validate(np.problem()).unwrap(), np);
        assert_eq!(np.b_plus().shape(), (1, 2));
    }

    #[test]
    fn validation_rejects_bad_data() {
        let q = QuadForm::zero(2);
        let not_onto = Problem::new(2, alloc::vec![Factor::new(Mat::zeros(1, 2), 1.0)], q.clone());
        assert_eq!(validate(&not_onto), Err(IblError::NotSurjective(1)));
        let mut order = Problem::new(
            2,
            alloc::vec![Factor::new(row(&[1.0, 0.0]), -1.0), Factor::new(row(&[0.0, 1.0]), 1.0)],
            q.clone(),
        );
        order.m_plus = 1;
        assert!(matches!(validate(&order), Err(IblError::SignOrder { .. })));
        let wide = Problem::new(2, alloc::vec![Factor::new(row(&[1.0, 0.0, 0.0]), 1.0)], q);
        assert!(matches!(validate(&wide), Err(IblError::DimensionMismatch { .. })));
    }
}
