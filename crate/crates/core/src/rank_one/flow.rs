//! Bipartite transport by maximum flow (Edmonds-Karp), generic over the
//! scalar so that rational inputs are handled exactly.

use crate::field::Scalar;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Mass moved along each edge `(left index, right index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S> {
    pub flows: Vec<(usize, usize, S)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransportOutcome<S> {
    Feasible(TransportPlan<S>),
    /// Total supply and demand differ.
    MassMismatch { supply: S, demand: S },
    /// `set` is a set of left vertices whose supply exceeds the demand of
    /// its neighbourhood by `excess`.
    Cut { set: Vec<usize>, excess: S },
}

struct Network<S> {
    to: Vec<usize>,
    cap: Vec<S>,
    head: Vec<Vec<usize>>,
}

impl<S: Scalar> Network<S> {
    fn new(n: usize) -> Self {
        Network { to: Vec::new(), cap: Vec::new(), head: vec![Vec::new(); n] }
    }

    fn add(&mut self, a: usize, b: usize, c: S) -> usize {
        let id = self.to.len();
        self.to.push(b);
        self.cap.push(c);
        self.head[a].push(id);
        self.to.push(a);
        self.cap.push(S::zero());
        self.head[b].push(id + 1);
        id
    }

    fn residual_positive(&self, e: usize, eps: &S) -> bool {
        self.cap[e] > *eps
    }

    /// Breadth-first search in the residual network; returns parent edges.
    fn bfs(&self, s: usize, eps: &S) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.head.len()];
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                let w = self.to[e];
                if !seen[w] && self.residual_positive(e, eps) {
                    seen[w] = true;
                    parent[w] = Some(e);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    fn reachable(&self, s: usize, eps: &S) -> Vec<bool> {
        let parent = self.bfs(s, eps);
        (0..self.head.len()).map(|v| v == s || parent[v].is_some()).collect()
    }

    fn max_flow(&mut self, s: usize, t: usize, eps: &S) -> S {
        let mut total = S::zero();
        loop {
            let parent = self.bfs(s, eps);
            if parent[t].is_none() {
                return total;
            }
            let mut bottleneck: Option<S> = None;
            let mut v = t;
            while v != s {
                let e = parent[v].expect("on path");
                bottleneck = Some(match bottleneck {
                    Some(b) if b < self.cap[e] => b,
                    _ => self.cap[e].clone(),
                });
                v = self.to[e ^ 1];
            }
            let b = bottleneck.expect("nonempty path");
            let mut v = t;
            while v != s {
                let e = parent[v].expect("on path");
                self.cap[e] = self.cap[e].clone() - b.clone();
                self.cap[e ^ 1] = self.cap[e ^ 1].clone() + b.clone();
                v = self.to[e ^ 1];
            }
            total = total + b;
        }
    }
}

/// Transport from supplies `alpha` (left) to demands `beta` (right) along
/// `edges`, or a witness that none exists.  Edge capacities are
/// `1 + sum alpha`, large enough never to bind.
pub fn transport_plan<S: Scalar>(alpha: &[S], beta: &[S], edges: &[(usize, usize)]) -> TransportOutcome<S> {
    let supply = alpha.iter().fold(S::zero(), |a, x| a + x.clone());
    let demand = beta.iter().fold(S::zero(), |a, x| a + x.clone());
    if !supply.eq_tol(&demand, &supply) {
        return TransportOutcome::MassMismatch { supply, demand };
    }
    let (l, r) = (alpha.len(), beta.len());
    let (src, sink) = (l + r, l + r + 1);
    let mut net = Network::new(l + r + 2);
    let w = S::one() + supply.clone();
    for (i, a) in alpha.iter().enumerate() {
        net.add(src, i, a.clone());
    }
    let ids: Vec<usize> = edges.iter().map(|&(i, j)| net.add(i, l + j, w.clone())).collect();
    for (j, b) in beta.iter().enumerate() {
        net.add(l + j, sink, b.clone());
    }
    let eps = if S::EXACT {
        S::zero()
    } else {
        S::from_f64(1e-12).expect("f64") * (S::one() + supply.clone())
    };
    let value = net.max_flow(src, sink, &eps);
    if value.eq_tol(&supply, &supply) {
        let flows = edges
            .iter()
            .zip(&ids)
            .map(|(&(i, j), &e)| (i, j, net.cap[e ^ 1].clone()))
            .filter(|(_, _, f)| !f.is_zero())
            .collect();
        return TransportOutcome::Feasible(TransportPlan { flows });
    }
    let seen = net.reachable(src, &eps);
    let set: Vec<usize> = (0..l).filter(|&i| seen[i]).collect();
    let mut excess = S::zero();
    for &i in &set {
        excess = excess + alpha[i].clone();
    }
    for j in 0..r {
        if edges.iter().any(|&(i, jj)| jj == j && seen[i]) {
            excess = excess - beta[j].clone();
        }
    }
    TransportOutcome::Cut { set, excess }
}

/// Replays a plan: nonnegative flows on listed edges with exact marginals
/// (up to the float slack for `f64`).
pub fn verify_plan<S: Scalar>(alpha: &[S], beta: &[S], edges: &[(usize, usize)], plan: &TransportPlan<S>) -> bool {
    let mut out = vec![S::zero(); alpha.len()];
    let mut inn = vec![S::zero(); beta.len()];
    for (i, j, f) in &plan.flows {
        if f.is_negative() || !edges.contains(&(*i, *j)) {
            return false;
        }
        out[*i] = out[*i].clone() + f.clone();
        inn[*j] = inn[*j].clone() + f.clone();
    }
    let scale = alpha.iter().fold(S::zero(), |a, x| a + x.abs());
    out.iter().zip(alpha).all(|(a, b)| a.eq_tol(b, &scale)) && inn.iter().zip(beta).all(|(a, b)| a.eq_tol(b, &scale))
}
