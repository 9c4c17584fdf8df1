use super::flow::{transport_plan, TransportOutcome, TransportPlan};
use super::graph::Graph;
use super::simplex::nonneg_solution;
use crate::error::{IblError, Result};
use crate::field::{rank_of, row_reduce, Scalar};
use crate::linalg::exact::Q;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::{One, Zero};

/// Subset enumeration is used up to this many vertices on a side.
pub const MAX_ENUMERATED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Subsets,
    Flow,
}

/// First failed constraint, with labels as in [`Graph`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation<S> {
    Sign { k: usize },
    LowerBound { i: usize, value: S },
    Homogeneity { sum: S, expected: S },
    /// `sum_{i in set} (c_i - 1) > sum_{j ~ set} |c_j|`.
    Subset { set: Vec<usize>, lhs: S, rhs: S },
    /// `sum_{j in set} |c_j| > sum_{i ~ set} (c_i - 1)`.
    Coset { set: Vec<usize>, lhs: S, rhs: S },
    /// Cut found by the flow route.
    Cut { set: Vec<usize>, excess: S },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership<S> {
    pub member: bool,
    pub route: Route,
    pub violation: Option<Violation<S>>,
    /// Transport certificate `(i, j, mass)` on labels; in the kernel case
    /// label `0` supplies and label `m+1` absorbs the free mass.
    pub plan: Option<TransportPlan<S>>,
    /// Both kernel vertices exist and are isolated; the domain then lies in
    /// the homogeneity hyperplane.
    pub kernel_vertices_isolated: bool,
}

fn sum<S: Scalar>(it: impl IntoIterator<Item = S>) -> S {
    it.into_iter().fold(S::zero(), |a, x| a + x)
}

fn magnitude<S: Scalar>(c: &[S]) -> S {
    sum(c.iter().map(|x| x.abs()))
}

fn basic_checks<S: Scalar>(c: &[S], g: &Graph) -> Result<Option<Violation<S>>> {
    if c.len() != g.m {
        return Err(IblError::DimensionMismatch { what: "exponent vector".into(), expected: g.m, found: c.len() });
    }
    for (k, x) in c.iter().enumerate() {
        let ok = if k < g.m_plus { x.is_positive() } else { !x.is_positive() };
        if !ok {
            return Ok(Some(Violation::Sign { k: k + 1 }));
        }
    }
    let scale = magnitude(c);
    for (i, x) in c[..g.m_plus].iter().enumerate() {
        if !S::one().le_tol(x, &scale) {
            return Ok(Some(Violation::LowerBound { i: i + 1, value: x.clone() }));
        }
    }
    if !g.has_kernel() {
        let s = sum(c.iter().cloned());
        let expected = S::from_int(g.m_plus as i64);
        if !s.eq_tol(&expected, &scale) {
            return Ok(Some(Violation::Homogeneity { sum: s, expected }));
        }
    }
    Ok(None)
}

fn labels_of(mask: u64, offset: usize, count: usize) -> Vec<usize> {
    (0..count).filter(|b| mask >> b & 1 == 1).map(|b| b + offset).collect()
}

/// Checks the subset inequalities; in the kernel case only sets not
/// adjacent to the negative kernel vertex, and the dual family of sets not
/// adjacent to the positive kernel vertex.
pub fn subset_check<S: Scalar>(c: &[S], g: &Graph) -> Result<Option<Violation<S>>> {
    if let Some(v) = basic_checks(c, g)? {
        return Ok(Some(v));
    }
    let mp = g.m_plus;
    let mm = g.m - mp;
    if mp > MAX_ENUMERATED || (g.has_kernel() && mm > MAX_ENUMERATED) {
        return Err(IblError::Unsupported("too many vertices for subset enumeration".into()));
    }
    let scale = magnitude(c);
    let alpha = |i: usize| c[i - 1].clone() - S::one();
    let beta = |j: usize| c[j - 1].abs();
    for mask in 1u64..(1u64 << mp) {
        let set = labels_of(mask, 1, mp);
        let nb = g.right_neighbours(&set);
        if nb.contains(&(g.m + 1)) {
            continue;
        }
        let lhs = sum(set.iter().map(|&i| alpha(i)));
        let rhs = sum(nb.iter().map(|&j| beta(j)));
        if !lhs.le_tol(&rhs, &scale) {
            return Ok(Some(Violation::Subset { set, lhs, rhs }));
        }
    }
    if g.has_kernel() {
        for mask in 1u64..(1u64 << mm) {
            let set = labels_of(mask, mp + 1, mm);
            let nb = g.left_neighbours(&set);
            if nb.contains(&0) {
                continue;
            }
            let lhs = sum(set.iter().map(|&j| beta(j)));
            let rhs = sum(nb.iter().map(|&i| alpha(i)));
            if !lhs.le_tol(&rhs, &scale) {
                return Ok(Some(Violation::Coset { set, lhs, rhs }));
            }
        }
    }
    Ok(None)
}

/// Decides membership by max flow; on success the plan certifies it.
pub fn flow_check<S: Scalar>(c: &[S], g: &Graph) -> Result<(Option<Violation<S>>, Option<TransportPlan<S>>)> {
    if let Some(v) = basic_checks(c, g)? {
        return Ok((Some(v), None));
    }
    let mp = g.m_plus;
    let mut left: Vec<usize> = (1..=mp).collect();
    let mut right: Vec<usize> = (mp + 1..=g.m).collect();
    let mut alpha: Vec<S> = left.iter().map(|&i| c[i - 1].clone() - S::one()).collect();
    let mut beta: Vec<S> = right.iter().map(|&j| c[j - 1].abs()).collect();
    let mut edges: Vec<(usize, usize)> = g.edges.clone();
    if g.has_kernel() {
        // Free supply at 0 and free demand at m+1, joined by an extra edge.
        let a0 = sum(beta.iter().cloned()) + S::one();
        let b_last = sum(alpha.iter().cloned()) + S::one();
        left.insert(0, 0);
        alpha.insert(0, a0);
        right.push(g.m + 1);
        beta.push(b_last);
        edges.push((0, g.m + 1));
    }
    let idx: Vec<(usize, usize)> = edges
        .iter()
        .map(|(i, j)| {
            let li = left.iter().position(|x| x == i).expect("left label");
            let rj = right.iter().position(|x| x == j).expect("right label");
            (li, rj)
        })
        .collect();
    Ok(match transport_plan(&alpha, &beta, &idx) {
        TransportOutcome::Feasible(p) => {
            let flows = p.flows.into_iter().map(|(i, j, f)| (left[i], right[j], f)).collect();
            (None, Some(TransportPlan { flows }))
        }
        TransportOutcome::MassMismatch { supply, demand } => (
            Some(Violation::Homogeneity {
                sum: supply - demand + S::from_int(mp as i64),
                expected: S::from_int(mp as i64),
            }),
            None,
        ),
        TransportOutcome::Cut { set, excess } => {
            (Some(Violation::Cut { set: set.into_iter().map(|i| left[i]).collect(), excess }), None)
        }
    })
}

/// Replays a certificate against `c`: nonnegative flows on edges of the
/// graph (plus `(0, m+1)` in the kernel case) with marginals `c_i - 1` and
/// `|c_j|` on the data vertices.
pub fn replay_certificate<S: Scalar>(c: &[S], g: &Graph, plan: &TransportPlan<S>) -> bool {
    let mut marg = vec![S::zero(); g.m + 2];
    for (i, j, f) in &plan.flows {
        let on_edge = g.adjacent(*i, *j) || (g.has_kernel() && (*i, *j) == (0, g.m + 1));
        if f.is_negative() || !on_edge {
            return false;
        }
        marg[*i] = marg[*i].clone() + f.clone();
        marg[*j] = marg[*j].clone() + f.clone();
    }
    let scale = magnitude(c);
    (1..=g.m).all(|k| {
        let want = if k <= g.m_plus { c[k - 1].clone() - S::one() } else { c[k - 1].abs() };
        marg[k].eq_tol(&want, &scale)
    })
}

/// Re-evaluates a violation from `c` and the graph alone; `true` when the
/// recorded constraint is indeed broken.
pub fn replay_violation<S: Scalar>(c: &[S], g: &Graph, v: &Violation<S>) -> bool {
    if c.len() != g.m {
        return false;
    }
    let scale = magnitude(c);
    let alpha = |i: usize| c[i - 1].clone() - S::one();
    let beta = |j: usize| c[j - 1].abs();
    match v {
        Violation::Sign { k } => {
            *k >= 1 && *k <= g.m && (if *k <= g.m_plus { !c[k - 1].is_positive() } else { c[k - 1].is_positive() })
        }
        Violation::LowerBound { i, .. } => *i >= 1 && *i <= g.m_plus && !S::one().le_tol(&c[i - 1], &scale),
        Violation::Homogeneity { .. } => {
            !g.has_kernel() && !sum(c.iter().cloned()).eq_tol(&S::from_int(g.m_plus as i64), &scale)
        }
        Violation::Subset { set, .. } => {
            let nb = g.right_neighbours(set);
            !nb.contains(&(g.m + 1))
                && !sum(set.iter().map(|&i| alpha(i))).le_tol(&sum(nb.iter().map(|&j| beta(j))), &scale)
        }
        Violation::Coset { set, .. } => {
            let nb = g.left_neighbours(set);
            g.has_kernel()
                && !nb.contains(&0)
                && !sum(set.iter().map(|&j| beta(j))).le_tol(&sum(nb.iter().map(|&i| alpha(i))), &scale)
        }
        Violation::Cut { set, .. } => {
            // Free masses of the kernel vertices as in the flow route.
            let free_in = sum((g.m_plus + 1..=g.m).map(beta)) + S::one();
            let free_out = sum((1..=g.m_plus).map(alpha)) + S::one();
            let mut nb = g.right_neighbours(set);
            if g.has_kernel() && set.contains(&0) && !nb.contains(&(g.m + 1)) {
                nb.push(g.m + 1);
            }
            let supply = sum(set.iter().map(|&i| if i == 0 { free_in.clone() } else { alpha(i) }));
            let demand = sum(nb.iter().map(|&j| if j == g.m + 1 { free_out.clone() } else { beta(j) }));
            !supply.le_tol(&demand, &scale)
        }
    }
}

fn decide<S: Scalar>(c: &[S], g: &Graph) -> Result<Membership<S>> {
    let enumerable = g.m_plus <= MAX_ENUMERATED && (!g.has_kernel() || g.m - g.m_plus <= MAX_ENUMERATED);
    let (flow_violation, plan) = flow_check(c, g)?;
    let (route, violation) = if enumerable {
        (Route::Subsets, subset_check(c, g)?)
    } else {
        (Route::Flow, flow_violation.clone())
    };
    if violation.is_none() != plan.is_some() {
        return Err(IblError::Tolerance {
            what: "subset inequalities and transport plan disagree".into(),
            residual: 1.0,
            bound: 0.0,
        });
    }
    Ok(Membership {
        member: violation.is_none(),
        route,
        violation,
        plan,
        kernel_vertices_isolated: g.kernel_vertices_isolated(),
    })
}

/// Membership without kernel directions: `c_i >= 1`, `sum c = m+`, and the
/// subset inequalities.
pub fn membership<S: Scalar>(c: &[S], g: &Graph) -> Result<Membership<S>> {
    if g.has_kernel() {
        return Err(IblError::Precondition("graph has kernel vertices; use membership_with_kernel".into()));
    }
    decide(c, g)
}

/// Membership with kernel directions: `c_i >= 1` and the two restricted
/// families of subset inequalities, with no homogeneity constraint.
pub fn membership_with_kernel<S: Scalar>(c: &[S], g: &Graph) -> Result<Membership<S>> {
    decide(c, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Edge(usize, usize),
    Up(usize),
    Down(usize),
}

/// Cone generators: `1_i - 1_j` for edges, `1_i` for `i ~ m+1` and `-1_j`
/// for `0 ~ j`.
pub fn generators(g: &Graph) -> Vec<(Generator, Vec<i64>)> {
    let mut out = Vec::new();
    for &(i, j) in &g.edges {
        let mut v = vec![0; g.m];
        let kind = match (i, j) {
            (0, j) => {
                v[j - 1] = -1;
                Generator::Down(j)
            }
            (i, j) if j == g.m + 1 => {
                v[i - 1] = 1;
                Generator::Up(i)
            }
            (i, j) => {
                v[i - 1] = 1;
                v[j - 1] = -1;
                Generator::Edge(i, j)
            }
        };
        out.push((kind, v));
    }
    out
}

/// Third route: `c - 1_{[1, m+]}` is a nonnegative combination of the
/// generators.  Returns the weights.
pub fn cone_feasible<S: Scalar>(c: &[S], g: &Graph) -> Result<Option<Vec<S>>> {
    if c.len() != g.m {
        return Err(IblError::DimensionMismatch { what: "exponent vector".into(), expected: g.m, found: c.len() });
    }
    let gens = generators(g);
    let rows: Vec<Vec<S>> = (0..g.m).map(|r| gens.iter().map(|(_, v)| S::from_int(v[r])).collect()).collect();
    let b: Vec<S> = c
        .iter()
        .enumerate()
        .map(|(k, x)| if k < g.m_plus { x.clone() - S::one() } else { x.clone() })
        .collect();
    if gens.is_empty() {
        let scale = magnitude(c);
        return Ok(b.iter().all(|x| x.near_zero(&scale)).then(Vec::new));
    }
    Ok(nonneg_solution(&rows, &b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InequalityKind {
    LowerBound(usize),
    NonPositive(usize),
    Subset(Vec<usize>),
    Coset(Vec<usize>),
}

/// `normal . c <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub kind: InequalityKind,
    pub normal: Vec<i64>,
    pub bound: i64,
}

/// Irredundant description of the domain: affine hull `normal . c = rhs`
/// and one inequality per facet.
#[derive(Debug, Clone, PartialEq)]
pub struct Facets {
    pub equalities: Vec<(Vec<Q>, Q)>,
    pub inequalities: Vec<Inequality>,
}

fn candidate_inequalities(g: &Graph) -> Result<Vec<Inequality>> {
    let (m, mp) = (g.m, g.m_plus);
    if mp > MAX_ENUMERATED || m - mp > MAX_ENUMERATED {
        return Err(IblError::Unsupported("too many vertices for facet enumeration".into()));
    }
    let mut out = Vec::new();
    for i in 1..=mp {
        let mut a = vec![0; m];
        a[i - 1] = -1;
        out.push(Inequality { kind: InequalityKind::LowerBound(i), normal: a, bound: -1 });
    }
    for j in mp + 1..=m {
        let mut a = vec![0; m];
        a[j - 1] = 1;
        out.push(Inequality { kind: InequalityKind::NonPositive(j), normal: a, bound: 0 });
    }
    for mask in 1u64..(1u64 << mp) {
        let set = labels_of(mask, 1, mp);
        let nb = g.right_neighbours(&set);
        if nb.contains(&(m + 1)) {
            continue;
        }
        let mut a = vec![0; m];
        set.iter().chain(&nb).for_each(|&k| a[k - 1] = 1);
        out.push(Inequality { kind: InequalityKind::Subset(set.clone()), normal: a, bound: set.len() as i64 });
    }
    for mask in 1u64..(1u64 << (m - mp)) {
        let set = labels_of(mask, mp + 1, m - mp);
        let nb = g.left_neighbours(&set);
        if nb.contains(&0) {
            continue;
        }
        let mut a = vec![0; m];
        set.iter().chain(&nb).for_each(|&k| a[k - 1] = -1);
        out.push(Inequality { kind: InequalityKind::Coset(set), normal: a, bound: -(nb.len() as i64) });
    }
    Ok(out)
}

/// Facets of the domain, found exactly: a valid inequality is kept when the
/// generators it leaves tight span a hyperplane of the generator span, and
/// only the first inequality per tight set is reported.
pub fn facets(g: &Graph) -> Result<Facets> {
    let m = g.m;
    let gens: Vec<Vec<i64>> = generators(g).into_iter().map(|(_, v)| v).collect();
    let as_q = |v: &[i64]| v.iter().map(|&x| Q::from_integer(x.into())).collect::<Vec<Q>>();
    let gen_rows: Vec<Vec<Q>> = gens.iter().map(|v| as_q(v)).collect();
    let full_rank = rank_of(&gen_rows, m);
    let apex: Vec<i64> = (0..m).map(|k| i64::from(k < g.m_plus)).collect();
    let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();

    // Affine hull: annihilator of the generator span, through the apex.
    let (red, piv) = row_reduce(&gen_rows, m);
    let free: Vec<usize> = (0..m).filter(|c| !piv.contains(c)).collect();
    let mut equalities = Vec::new();
    for &f in &free {
        let mut n = vec![Q::zero(); m];
        n[f] = Q::one();
        for (r, &p) in piv.iter().enumerate() {
            n[p] = -red[r][f].clone();
        }
        let rhs = n.iter().zip(&apex).fold(Q::zero(), |s, (x, &a)| s + x * Q::from_integer(a.into()));
        equalities.push((n, rhs));
    }

    let mut seen_faces: Vec<Vec<usize>> = Vec::new();
    let mut inequalities = Vec::new();
    for ineq in candidate_inequalities(g)? {
        let valid = dot(&ineq.normal, &apex) <= ineq.bound && gens.iter().all(|v| dot(&ineq.normal, v) <= 0);
        if !valid || dot(&ineq.normal, &apex) != ineq.bound {
            continue;
        }
        let tight: Vec<usize> = (0..gens.len()).filter(|&e| dot(&ineq.normal, &gens[e]) == 0).collect();
        let tight_rows: Vec<Vec<Q>> = tight.iter().map(|&e| gen_rows[e].clone()).collect();
        if full_rank == 0 || rank_of(&tight_rows, m) + 1 != full_rank {
            continue;
        }
        if seen_faces.contains(&tight) {
            continue;
        }
        seen_faces.push(tight);
        inequalities.push(ineq);
    }
    Ok(Facets { equalities, inequalities })
}
