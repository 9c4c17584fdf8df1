//! Positivity domain for data whose factors all have rank one and whose
//! kernel has at most one positive and one negative direction.
//!
//! Writing `B_k x = <x, u_k>`, the domain is described by a bipartite graph
//! between the positive vectors (and the positive kernel direction `u_0`)
//! and the non-positive ones (and the negative kernel direction `u_{m+1}`),
//! with `i ~ j` when `u_j` has a nonzero coordinate on `u_i` in the basis
//! `(u_0, u_1, ..., u_{m+})`.  Membership is decided three independent
//! ways: subset inequalities, a max-flow transport plan, and feasibility of
//! the generator cone.

pub mod domain;
pub mod flow;
pub mod graph;
pub mod simplex;

pub use domain::{
    cone_feasible, facets, flow_check, generators, membership, membership_with_kernel,
    replay_certificate, replay_violation, subset_check, Facets, Generator, Inequality, InequalityKind, Membership,
    Route, Violation,
};
pub use flow::{transport_plan, verify_plan, TransportOutcome, TransportPlan};
pub use graph::{build_graph, Graph, RankOneData};
