use crate::classify::{classify, decompose, Case};
use crate::error::{IblError, Result};
use crate::field::{solve_square, Scalar};
use crate::linalg::exact::{RatSubspace, Q};
use crate::problem::NormalizedProblem;
use alloc::format;
use alloc::vec::Vec;

/// Rank-one datum in vector form: `B_k x = <x, u_k>` for `k = 1..m`, and the
/// kernel directions `u_0` (positive) and `u_{m+1}` (negative) when present.
/// Only the directions of `u_0` and `u_{m+1}` matter here.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneData<S> {
    pub dim: usize,
    pub m_plus: usize,
    pub vectors: Vec<Vec<S>>,
    pub u0: Option<Vec<S>>,
    pub u_last: Option<Vec<S>>,
}

fn rank_one_shape(np: &NormalizedProblem) -> Result<()> {
    if np.factors().iter().any(|f| f.target_dim() != 1) {
        return Err(IblError::Unsupported("every factor must have rank one".into()));
    }
    let c = classify(np);
    if c.case != Case::Case11 {
        return Err(IblError::Precondition(format!("rank-one domain needs Case 1.1, datum is {}", c.case.label())));
    }
    if c.signature.plus > 1 || c.signature.minus > 1 {
        return Err(IblError::Unsupported("kernel must have at most one positive and one negative direction".into()));
    }
    Ok(())
}

impl RankOneData<f64> {
    pub fn from_problem(np: &NormalizedProblem) -> Result<Self> {
        rank_one_shape(np)?;
        let d = decompose(np, &classify(np))?;
        let row = |m: &crate::linalg::Mat| (m.nrows() == 1).then(|| m.row(0).iter().copied().collect());
        Ok(RankOneData {
            dim: np.dim(),
            m_plus: np.m_plus(),
            vectors: np.factors().iter().map(|f| f.map.row(0).iter().copied().collect()).collect(),
            u0: row(&d.b0),
            u_last: row(&d.b_last),
        })
    }
}

impl RankOneData<Q> {
    /// Exact version for rational data: the kernel directions are the
    /// annihilators of `(ker B+)^{perp Q}` and of `ker B+ + rad Q`.
    pub fn from_exact(np: &NormalizedProblem) -> Result<Self> {
        rank_one_shape(np)?;
        let e = np.exact().ok_or_else(|| IblError::Precondition("datum has no exact entries".into()))?;
        let n = np.dim();
        let h0 = match np.b_plus_exact() {
            Some(b) if np.m_plus() > 0 => RatSubspace::kernel(&b),
            _ => RatSubspace::full(n),
        };
        let k0 = h0.q_orth_complement(&e.kernel);
        let k_last = h0.sum(&RatSubspace::kernel(&e.kernel));
        let direction = |k: &RatSubspace| {
            let a = k.annihilator();
            (a.dim() == 1).then(|| a.basis().column(0))
        };
        Ok(RankOneData {
            dim: n,
            m_plus: np.m_plus(),
            vectors: e.maps.iter().map(|m| m.row(0).to_vec()).collect(),
            u0: direction(&k0),
            u_last: direction(&k_last),
        })
    }
}

/// Bipartite graph on labels `0..=m+` (left) and `m+ + 1..=m+1` (right);
/// label `0` exists only with `u_0`, label `m+1` only with `u_{m+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub m_plus: usize,
    pub m: usize,
    pub has_source: bool,
    pub has_sink: bool,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Graph without kernel directions.
    pub fn plain(m_plus: usize, m: usize, edges: Vec<(usize, usize)>) -> Self {
        Graph { m_plus, m, has_source: false, has_sink: false, edges }
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    /// Right neighbours of a set of left labels.
    pub fn right_neighbours(&self, left: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().filter(|(i, _)| left.contains(i)).map(|&(_, j)| j).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Left neighbours of a set of right labels.
    pub fn left_neighbours(&self, right: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().filter(|(_, j)| right.contains(j)).map(|&(i, _)| i).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn has_kernel(&self) -> bool {
        self.has_source || self.has_sink
    }

    /// Both kernel vertices present and without any edge.
    pub fn kernel_vertices_isolated(&self) -> bool {
        self.has_source
            && self.has_sink
            && !self.edges.iter().any(|&(i, j)| i == 0 || j == self.m + 1)
    }
}

pub fn build_graph<S: Scalar>(data: &RankOneData<S>) -> Result<Graph> {
    let n = data.dim;
    let mp = data.m_plus;
    let m = data.vectors.len();
    if mp > m || data.vectors.iter().any(|v| v.len() != n) {
        return Err(IblError::DimensionMismatch { what: "rank-one vectors".into(), expected: n, found: m });
    }
    let mut basis: Vec<&Vec<S>> = Vec::new();
    let mut labels = Vec::new();
    if let Some(u0) = &data.u0 {
        basis.push(u0);
        labels.push(0);
    }
    for (i, v) in data.vectors[..mp].iter().enumerate() {
        basis.push(v);
        labels.push(i + 1);
    }
    if basis.len() != n {
        return Err(IblError::Precondition(format!(
            "(u_0, u_1, ..., u_m+) must be a basis: {} vectors in dimension {n}",
            basis.len()
        )));
    }
    // Columns of the basis matrix are the basis vectors.
    let a: Vec<Vec<S>> = (0..n).map(|r| basis.iter().map(|v| v[r].clone()).collect()).collect();
    let mut targets: Vec<(usize, &Vec<S>)> = (mp..m).map(|k| (k + 1, &data.vectors[k])).collect();
    if let Some(ul) = &data.u_last {
        targets.push((m + 1, ul));
    }
    let mut edges = Vec::new();
    if targets.is_empty() {
        return Ok(Graph { m_plus: mp, m, has_source: data.u0.is_some(), has_sink: false, edges });
    }
    let rhs: Vec<Vec<S>> = (0..n).map(|r| targets.iter().map(|(_, v)| v[r].clone()).collect()).collect();
    let coords = solve_square(&a, &rhs).ok_or_else(|| IblError::Precondition("(u_0, u_1, ..., u_m+) is not a basis".into()))?;
    for (col, &(j, _)) in targets.iter().enumerate() {
        let scale = (0..n).fold(S::zero(), |s, r| if coords[r][col].abs() > s { coords[r][col].abs() } else { s });
        for (r, &i) in labels.iter().enumerate() {
            if !coords[r][col].near_zero(&scale) {
                if j == m + 1 && i == 0 {
                    return Err(IblError::Precondition("u_{m+1} must lie in the span of u_1..u_m+".into()));
                }
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    Ok(Graph { m_plus: mp, m, has_source: data.u0.is_some(), has_sink: data.u_last.is_some(), edges })
}
