//! The subspace condition characterising positivity of the inverse
//! inequality, checked over a finite family of candidate subspaces.
//!
//! Only kernels matter: with `K_k = ker B_k` for `k = 0..=m+1`,
//! `dim B_k V = dim V - dim (V & K_k)`.  The check therefore runs on any
//! [`Lattice`], exactly over the rationals when the datum is rational.
//! The candidate family is the closure of the kernels, the radical of `Q`,
//! `H` and `{0}` under sums and intersections up to a fixed depth, plus
//! random subspaces; a violation is conclusive, a pass is not.

mod check;
mod lattice;

pub use check::{
    check_condition_c, exponent_ledger, generate_candidates, split_data, CandidateOptions, CandidateSet,
    ClauseReport, ConditionCReport, CriticalKind, KernelDatum, LedgerEntry, SplitData, Verdict, Witness,
};
pub use lattice::{ExactLattice, FloatLattice, Lattice};
