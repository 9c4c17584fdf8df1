//! Case analysis of a datum and the canonical splitting of its kernel.

use crate::error::{IblError, Result};
use crate::linalg::{inv_pd, max_abs, rank, sym_eigen, Mat, QuadForm, Signature, Subspace, TOL_PD};
use crate::problem::NormalizedProblem;
use alloc::vec::Vec;

/// Leaves of the decision tree on the three structural facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    Case00,
    Case01,
    Case100,
    Case101,
    Case11,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::Case00 => "Case 0.0",
            Case::Case01 => "Case 0.1",
            Case::Case100 => "Case 1.0.0",
            Case::Case101 => "Case 1.0.1",
            Case::Case11 => "Case 1.1",
        }
    }

    fn consequences(self) -> &'static [&'static str] {
        match self {
            Case::Case00 => &["min J = 0", "inf over Gaussians = +inf"],
            Case::Case01 => &["inf J = +inf"],
            Case::Case100 => &["min J = 0", "inf over centered Gaussians = 0"],
            Case::Case101 => &[
                "inf over Gaussians = 0",
                "inf over centered Gaussians lies in [0, +inf)",
            ],
            Case::Case11 => &["inf J = inf over centered Gaussians < +inf"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub case: Case,
    /// `Q` is positive definite on `ker B+` (vacuously true on `{0}`).
    pub pd_on_ker_bplus: bool,
    /// `dim H >= s+(Q) + sum_{i <= m+} dim H_i`.
    pub dim_condition: bool,
    pub bplus_onto: bool,
    pub signature: Signature,
    pub consequences: Vec<&'static str>,
}

pub fn classify(np: &NormalizedProblem) -> Classification {
    let bplus = np.b_plus();
    let target: usize = np.factors()[..np.m_plus()].iter().map(|f| f.target_dim()).sum();
    let ker = Subspace::kernel(&bplus);
    let ker = if np.m_plus() == 0 { Subspace::full(np.dim()) } else { ker };
    let pd_on_ker_bplus = np.kernel().is_pd_on(&ker);
    let signature = np.kernel().signature();
    let dim_condition = np.dim() >= signature.plus + target;
    let bplus_onto = rank(&bplus) == target;
    let case = match (pd_on_ker_bplus, dim_condition, bplus_onto) {
        (false, _, false) => Case::Case00,
        (false, _, true) => Case::Case01,
        (true, true, _) => Case::Case11,
        (true, false, false) => Case::Case100,
        (true, false, true) => Case::Case101,
    };
    Classification {
        case,
        pd_on_ker_bplus,
        dim_condition,
        bplus_onto,
        signature,
        consequences: case.consequences().to_vec(),
    }
}

/// `Q(x) = Q+(B_0 x) - Q-(B_{m+1} x)` with `Q+`, `Q-` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub b0: Mat,
    pub q_plus: Mat,
    pub b_last: Mat,
    pub q_minus: Mat,
    /// Max-entry residual of the reconstruction of `Q`.
    pub residual: f64,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Mat {
        self.b0.transpose() * &self.q_plus * &self.b0
            - self.b_last.transpose() * &self.q_minus * &self.b_last
    }

    /// Splitting along the eigenvectors of `Q`.
    pub fn spectral(q: &QuadForm) -> Self {
        let n = q.dim();
        let (vals, vecs) = sym_eigen(q.matrix());
        let pos: Vec<usize> = (0..n).filter(|&i| vals[i] > TOL_PD).collect();
        let neg: Vec<usize> = (0..n).filter(|&i| vals[i] < -TOL_PD).collect();
        let rows = |idx: &[usize]| {
            Mat::from_fn(idx.len(), n, |r, c| vecs[(c, idx[r])])
        };
        let diag = |idx: &[usize]| {
            Mat::from_fn(idx.len(), idx.len(), |r, c| if r == c { vals[idx[r]].abs() } else { 0.0 })
        };
        let mut d = Decomposition {
            b0: rows(&pos),
            q_plus: diag(&pos),
            b_last: rows(&neg),
            q_minus: diag(&neg),
            residual: 0.0,
        };
        d.residual = max_abs(&(d.reconstruct() - q.matrix()));
        d
    }

    fn check(self, q: &QuadForm) -> Result<Self> {
        let bound = 1e-8 * (1.0 + max_abs(q.matrix()));
        if self.residual > bound {
            return Err(IblError::Tolerance {
                what: "kernel decomposition".into(),
                residual: self.residual,
                bound,
            });
        }
        Ok(self)
    }
}

/// Canonical splitting in the non-degenerate case: `B_0` is the projection
/// onto `H_0 = ker B+` along its `Q`-orthogonal, and `B_{m+1}` is the
/// remaining part read modulo the radical of `Q`.  Then
/// `ker B_{m+1} = H_0 + rad Q` and `ker B_0 = H_0^{perp Q}`.
pub fn decompose(np: &NormalizedProblem, c: &Classification) -> Result<Decomposition> {
    if c.case != Case::Case11 {
        return Err(IblError::Precondition(alloc::format!(
            "decomposition needs Case 1.1, datum is {}",
            c.case.label()
        )));
    }
    let n = np.dim();
    let q = np.kernel();
    let qm = q.matrix();
    let h0 = if np.m_plus() == 0 { Subspace::full(n) } else { Subspace::kernel(&np.b_plus()) };
    let w = h0.basis();
    let q_plus = w.transpose() * qm * w;
    let q_plus_inv = inv_pd(&q_plus)
        .ok_or_else(|| IblError::NotPositiveDefinite("Q on ker B+".into()))?;
    let b0 = &q_plus_inv * w.transpose() * qm;
    let perp = q.orth_complement(&h0);
    let rad = q.radical();
    let comp = perp.intersect(&rad.orth_complement());
    let c_basis = comp.basis();
    let proj = w * &b0;
    let b_last = c_basis.transpose() * (Mat::identity(n, n) - proj);
    let q_minus = -(c_basis.transpose() * qm * c_basis);
    let mut d = Decomposition { b0, q_plus, b_last, q_minus, residual: 0.0 };
    d.residual = max_abs(&(d.reconstruct() - qm));
    let s = c.signature;
    if d.b0.nrows() != s.plus || d.b_last.nrows() != s.minus {
        return Err(IblError::Tolerance {
            what: "decomposition block sizes".into(),
            residual: (d.b0.nrows() + d.b_last.nrows()) as f64,
            bound: (s.plus + s.minus) as f64,
        });
    }
    d.check(q)
}
