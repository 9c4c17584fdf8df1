use super::lattice::{ExactLattice, FloatLattice, Lattice};
use crate::classify::Decomposition;
use crate::error::{IblError, Result};
use crate::field::Scalar;
use crate::linalg::exact::{RatMatrix, RatSubspace, Q};
use crate::linalg::{rank, Mat, Subspace};
use crate::problem::NormalizedProblem;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Kernels `K_0..=K_{m+1}` of the maps, their target dimensions and the
/// exponents `c_1..c_m`.
#[derive(Debug, Clone)]
pub struct KernelDatum<L: Lattice, E> {
    pub lattice: L,
    pub kernels: Vec<L::Space>,
    pub target_dims: Vec<usize>,
    pub exponents: Vec<E>,
    pub m_plus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    /// Clause for subspaces inside `ker B_{m+1}`.
    Subspace,
    /// Clause for quotients with `B_0 V = B_0 H`.
    Quotient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClauseOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub critical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClauseReport {
    pub admissible: bool,
    /// `dim V >= sum c_k dim B_k V`, when `V` lies in `ker B_{m+1}`.
    pub subspace: Option<ClauseOutcome>,
    /// `dim H - dim V <= sum c_k (dim H_k - dim B_k V)`, when
    /// `V + ker B_0 = H`.
    pub quotient: Option<ClauseOutcome>,
}

impl<L: Lattice, E: Scalar> KernelDatum<L, E> {
    pub fn m(&self) -> usize {
        self.exponents.len()
    }

    pub fn dim(&self) -> usize {
        self.lattice.ambient()
    }

    /// `dim B_k V` for `k = 0..=m+1`.
    pub fn image_dim(&self, k: usize, v: &L::Space) -> usize {
        let l = &self.lattice;
        l.dim(v) - l.dim(&l.intersect(v, &self.kernels[k]))
    }

    pub fn is_admissible(&self, v: &L::Space) -> bool {
        let total: usize = (0..=self.m_plus).map(|k| self.image_dim(k, v)).sum();
        total == self.lattice.dim(v)
    }

    fn weighted(&self, dims: impl Fn(usize) -> usize) -> E {
        (1..=self.m()).fold(E::zero(), |s, k| s + self.exponents[k - 1].clone() * E::from_int(dims(k) as i64))
    }

    pub fn clauses(&self, v: &L::Space) -> ClauseReport {
        let l = &self.lattice;
        let n = self.dim();
        let dv = l.dim(v);
        let scale = self.exponents.iter().fold(E::from_int(n as i64), |s, c| s + c.abs());
        let outcome = |lhs: E, rhs: E, holds: bool| ClauseOutcome {
            lhs: lhs.to_f64_lossy(),
            rhs: rhs.to_f64_lossy(),
            holds,
            critical: lhs.eq_tol(&rhs, &scale),
        };
        let last = self.m() + 1;
        let subspace = (self.image_dim(last, v) == 0).then(|| {
            let lhs = E::from_int(dv as i64);
            let rhs = self.weighted(|k| self.image_dim(k, v));
            let holds = rhs.le_tol(&lhs, &scale);
            outcome(lhs, rhs, holds)
        });
        let quotient = (l.dim(&l.sum(v, &self.kernels[0])) == n).then(|| {
            let lhs = E::from_int((n - dv) as i64);
            let rhs = self.weighted(|k| self.target_dims[k] - self.image_dim(k, v));
            let holds = lhs.le_tol(&rhs, &scale);
            outcome(lhs, rhs, holds)
        });
        ClauseReport { admissible: self.is_admissible(v), subspace, quotient }
    }
}

impl KernelDatum<FloatLattice, f64> {
    /// Datum given by the maps `B_0..=B_{m+1}` themselves.
    pub fn from_maps(maps: &[Mat], exponents: &[f64], m_plus: usize) -> Result<Self> {
        let n = maps.first().map_or(0, |m| m.ncols());
        if maps.len() != exponents.len() + 2 || maps.iter().any(|m| m.ncols() != n) {
            return Err(IblError::DimensionMismatch { what: "kernel datum maps".into(), expected: exponents.len() + 2, found: maps.len() });
        }
        let lattice = FloatLattice(n);
        let kernels = maps
            .iter()
            .map(|m| if m.nrows() == 0 { Subspace::full(n) } else { Subspace::kernel(m) })
            .collect();
        Ok(KernelDatum { lattice, kernels, target_dims: maps.iter().map(rank).collect(), exponents: exponents.to_vec(), m_plus })
    }
}

fn full_maps(np: &NormalizedProblem, d: &Decomposition) -> Vec<Mat> {
    let mut maps = vec![d.b0.clone()];
    maps.extend(np.factors().iter().map(|f| f.map.clone()));
    maps.push(d.b_last.clone());
    maps
}

/// Exact kernels: `K_0 = (ker B+)^{perp Q}`, `K_{m+1} = ker B+ + rad Q`.
fn exact_datum(np: &NormalizedProblem) -> Option<(KernelDatum<ExactLattice, Q>, Vec<RatSubspace>)> {
    let e = np.exact()?;
    let n = np.dim();
    let h0 = match np.b_plus_exact() {
        Some(b) if np.m_plus() > 0 => RatSubspace::kernel(&b),
        _ => RatSubspace::full(n),
    };
    let rad = RatSubspace::kernel(&e.kernel);
    let k0 = h0.q_orth_complement(&e.kernel);
    let k_last = h0.sum(&rad);
    let mut kernels = vec![k0.clone()];
    kernels.extend(e.maps.iter().map(|m| if m.nrows() == 0 { RatSubspace::full(n) } else { RatSubspace::kernel(m) }));
    kernels.push(k_last.clone());
    let target_dims = kernels.iter().map(|k| n - k.dim()).collect();
    let datum = KernelDatum { lattice: ExactLattice(n), kernels, target_dims, exponents: e.exponents.clone(), m_plus: np.m_plus() };
    Some((datum, vec![rad, k0]))
}

#[derive(Debug, Clone)]
pub struct CandidateOptions {
    /// Rounds of pairwise sums and intersections.
    pub depth: usize,
    pub cap: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions { depth: 3, cap: 10_000, random: 16, seed: 0xc0ffee }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateSet<S> {
    pub spaces: Vec<S>,
    pub truncated: bool,
}

/// Closure of the kernels, `H`, `{0}` and `extra` under sums and
/// intersections (`V + K_k` covers preimages of images), followed by random
/// subspaces from a fixed seed.
pub fn generate_candidates<L: Lattice, E: Scalar>(
    datum: &KernelDatum<L, E>,
    extra: &[L::Space],
    opts: &CandidateOptions,
) -> CandidateSet<L::Space> {
    let l = &datum.lattice;
    let mut spaces: Vec<L::Space> = Vec::new();
    let mut truncated = false;
    let push = |spaces: &mut Vec<L::Space>, v: L::Space| -> bool {
        if spaces.iter().any(|s| l.same(s, &v)) {
            return true;
        }
        if spaces.len() >= opts.cap {
            return false;
        }
        spaces.push(v);
        true
    };
    let seeds = datum.kernels.iter().cloned().chain(extra.iter().cloned()).chain([l.full(), l.zero()]);
    for s in seeds {
        if !push(&mut spaces, s) {
            truncated = true;
        }
    }
    let mut fresh_from = 0;
    'rounds: for _ in 0..opts.depth {
        let len = spaces.len();
        for i in 0..len {
            for j in (i + 1).max(fresh_from)..len {
                for v in [l.sum(&spaces[i], &spaces[j]), l.intersect(&spaces[i], &spaces[j])] {
                    if !push(&mut spaces, v) {
                        truncated = true;
                        break 'rounds;
                    }
                }
            }
        }
        if spaces.len() == len {
            break;
        }
        fresh_from = len;
    }
    let n = l.ambient();
    if n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.random {
            let d = rng.random_range(1..n);
            let v = l.random(&mut rng, d);
            if !push(&mut spaces, v) {
                truncated = true;
                break;
            }
        }
    }
    CandidateSet { spaces, truncated }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No candidate violates the condition.
    HoldsOnCandidates,
    Violated,
}

#[derive(Debug, Clone)]
pub struct Witness {
    /// Basis of the offending subspace (columns).
    pub basis: Mat,
    pub clause: CriticalKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionCReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Admissible candidates meeting a clause with equality.
    pub criticals: Vec<(Mat, CriticalKind)>,
    pub candidates: usize,
    pub admissible: usize,
    pub truncated: bool,
    pub exact: bool,
    /// The witness re-checked through ranks of the maps restricted to it.
    pub witness_confirmed: Option<bool>,
}

type Found<S> = (Option<(S, CriticalKind, f64, f64)>, Vec<(S, CriticalKind)>, usize);

fn scan<L: Lattice, E: Scalar>(datum: &KernelDatum<L, E>, spaces: &[L::Space]) -> Found<L::Space> {
    let mut witness = None;
    let mut criticals = Vec::new();
    let mut admissible = 0;
    for v in spaces {
        let r = datum.clauses(v);
        if !r.admissible {
            continue;
        }
        admissible += 1;
        for (kind, out) in [(CriticalKind::Subspace, r.subspace), (CriticalKind::Quotient, r.quotient)] {
            let Some(o) = out else { continue };
            if !o.holds && witness.is_none() {
                witness = Some((v.clone(), kind, o.lhs, o.rhs));
            }
            if o.critical {
                criticals.push((v.clone(), kind));
            }
        }
    }
    (witness, criticals, admissible)
}

impl<L: Lattice, E: Scalar> KernelDatum<L, E> {
    /// Runs the candidate check without any re-verification.
    pub fn check(&self, extra: &[L::Space], opts: &CandidateOptions) -> ConditionCReport {
        let cands = generate_candidates(self, extra, opts);
        let (w, crit, admissible) = scan(self, &cands.spaces);
        let l = &self.lattice;
        ConditionCReport {
            verdict: if w.is_some() { Verdict::Violated } else { Verdict::HoldsOnCandidates },
            witness: w.map(|(v, clause, lhs, rhs)| Witness { basis: l.basis_f64(&v), clause, lhs, rhs }),
            criticals: crit.into_iter().map(|(v, k)| (l.basis_f64(&v), k)).collect(),
            candidates: cands.spaces.len(),
            admissible,
            truncated: cands.truncated,
            exact: E::EXACT,
            witness_confirmed: None,
        }
    }
}

/// Clause check from ranks: `dims[k] = dim B_k V` for `k = 0..=m+1`.
fn violates<E: Scalar>(dim_h: usize, m_plus: usize, dim_v: usize, dims: &[usize], targets: &[usize], c: &[E], kind: CriticalKind) -> bool {
    let m = c.len();
    let scale = c.iter().fold(E::from_int(dim_h as i64), |s, x| s + x.abs());
    let weighted = |f: &dyn Fn(usize) -> usize| (1..=m).fold(E::zero(), |s, k| s + c[k - 1].clone() * E::from_int(f(k) as i64));
    let admissible = dims[..=m_plus].iter().sum::<usize>() == dim_v;
    match kind {
        CriticalKind::Subspace => {
            admissible && dims[m + 1] == 0 && !weighted(&|k| dims[k]).le_tol(&E::from_int(dim_v as i64), &scale)
        }
        CriticalKind::Quotient => {
            admissible
                && dims[0] == targets[0]
                && !E::from_int((dim_h - dim_v) as i64).le_tol(&weighted(&|k| targets[k] - dims[k]), &scale)
        }
    }
}

/// Checks the subspace condition for a non-degenerate datum with its
/// canonical splitting `d`; rational data are checked exactly.
pub fn check_condition_c(np: &NormalizedProblem, d: &Decomposition, opts: &CandidateOptions) -> Result<ConditionCReport> {
    let maps = full_maps(np, d);
    let mp = np.m_plus();
    let n = np.dim();
    if let Some((datum, extra)) = exact_datum(np) {
        let cands = generate_candidates(&datum, &extra, opts);
        let (w, crit, admissible) = scan(&datum, &cands.spaces);
        let l = &datum.lattice;
        let e = np.exact().expect("exact datum");
        let mut confirmed = None;
        if let Some((v, kind, _, _)) = &w {
            let basis = v.basis();
            let h0_rows = match np.b_plus_exact() {
                Some(b) if mp > 0 => RatSubspace::kernel(&b),
                _ => RatSubspace::full(n),
            };
            // Maps with the same kernels as B_0 and B_{m+1}.
            let b0 = h0_rows.basis().transpose().mul(&e.kernel);
            let b_last = datum.kernels[datum.m() + 1].annihilator().basis().transpose();
            let mut all: Vec<&RatMatrix> = vec![&b0];
            all.extend(e.maps.iter());
            all.push(&b_last);
            let dims: Vec<usize> = all.iter().map(|m| if m.nrows() == 0 { 0 } else { m.mul(&basis).rank() }).collect();
            let targets: Vec<usize> = all.iter().map(|m| m.rank()).collect();
            confirmed = Some(violates(n, mp, basis.ncols(), &dims, &targets, &e.exponents, *kind));
        }
        return Ok(ConditionCReport {
            verdict: if w.is_some() { Verdict::Violated } else { Verdict::HoldsOnCandidates },
            witness: w.map(|(v, clause, lhs, rhs)| Witness { basis: l.basis_f64(&v), clause, lhs, rhs }),
            criticals: crit.into_iter().map(|(v, k)| (l.basis_f64(&v), k)).collect(),
            candidates: cands.spaces.len(),
            admissible,
            truncated: cands.truncated,
            exact: true,
            witness_confirmed: confirmed,
        });
    }
    let datum = KernelDatum::from_maps(&maps, &np.problem().exponents(), mp)?;
    let extra = [np.kernel().radical()];
    let mut report = datum.check(&extra, opts);
    if let Some(w) = &report.witness {
        let dims: Vec<usize> = maps.iter().map(|m| if m.nrows() == 0 { 0 } else { rank(&(m * &w.basis)) }).collect();
        let targets: Vec<usize> = maps.iter().map(|m| m.nrows()).collect();
        report.witness_confirmed = Some(violates(n, mp, w.basis.ncols(), &dims, &targets, &np.problem().exponents(), w.clause));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LedgerEntry {
    /// `c_i >= 1` for a positive factor with nonzero target.
    LowerBound { i: usize, value: f64, holds: bool },
    /// `sum c_k dim H_k = dim H`, forced when `B_0 = B_{m+1} = 0`.
    Homogeneity { sum: f64, dim: usize, holds: bool },
    /// `sum c_k dim H_k = dim H` with a nonzero kernel map.  When `B_{m+1}`
    /// is trivial the whole space is critical and the condition fails.
    CriticalWhole { b0_trivial: bool, b_last_trivial: bool, refutes: bool },
}

/// Constraints on the exponents implied by the condition.
pub fn exponent_ledger(np: &NormalizedProblem, d: &Decomposition) -> Vec<LedgerEntry> {
    let mut out = Vec::new();
    for (k, f) in np.factors()[..np.m_plus()].iter().enumerate() {
        if f.target_dim() > 0 {
            out.push(LedgerEntry::LowerBound { i: k + 1, value: f.exponent, holds: f.exponent >= 1.0 - 1e-12 });
        }
    }
    let n = np.dim();
    let sum: f64 = np.factors().iter().map(|f| f.exponent * f.target_dim() as f64).sum();
    let scale = 1.0 + np.factors().iter().map(|f| f.exponent.abs()).sum::<f64>();
    let equal = (sum - n as f64).abs() <= 1e-9 * scale;
    let b0_trivial = d.b0.nrows() == 0;
    let b_last_trivial = d.b_last.nrows() == 0;
    if b0_trivial && b_last_trivial {
        out.push(LedgerEntry::Homogeneity { sum, dim: n, holds: equal });
    } else if equal {
        out.push(LedgerEntry::CriticalWhole { b0_trivial, b_last_trivial, refutes: b_last_trivial && !b0_trivial });
    }
    out
}

/// Restrictions `b_k : V -> B_k V` and quotients `beta_k : H/V -> H_k/B_k V`
/// for `k = 0..=m+1`, in orthonormal coordinates.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub dim_v: usize,
    pub sub_maps: Vec<Mat>,
    pub quot_maps: Vec<Mat>,
}

impl SplitData {
    pub fn sub_dims(&self) -> Vec<usize> {
        self.sub_maps.iter().map(|m| m.nrows()).collect()
    }

    pub fn quot_dims(&self) -> Vec<usize> {
        self.quot_maps.iter().map(|m| m.nrows()).collect()
    }
}

pub fn split_data(np: &NormalizedProblem, d: &Decomposition, v: &Subspace) -> SplitData {
    let p = v.basis();
    let j = v.orth_complement();
    let mut sub_maps = Vec::new();
    let mut quot_maps = Vec::new();
    for m in full_maps(np, d) {
        let img = Subspace::span(&(&m * p));
        let img_basis = if img.ambient() == m.nrows() { img.basis().clone() } else { Mat::zeros(m.nrows(), 0) };
        let perp = if img_basis.ncols() == 0 { Subspace::full(m.nrows()) } else { Subspace::span(&img_basis).orth_complement() };
        sub_maps.push(img_basis.transpose() * &m * p);
        quot_maps.push(perp.basis().transpose() * &m * j.basis());
    }
    SplitData { dim_v: v.dim(), sub_maps, quot_maps }
}
