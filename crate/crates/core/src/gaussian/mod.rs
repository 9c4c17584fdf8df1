//! Centered and translated Gaussian inputs: evaluation, the optimisation
//! problem for the best centered constant, and the structural checks on
//! normalised data.

pub mod evaluate;
pub mod normal;
pub mod shift;
pub mod solver;

pub use evaluate::{evaluate_gaussian, objective, stationarity_residual, GaussTuple};
pub use normal::{cdp_check, geometric_check, CdpReport, GeometricReport};
pub use shift::{evaluate_translated, quad_gap, shift_form, ShiftForm};
pub use solver::{solve_d, SolveOptions, SolveResult, SolveStatus, UnboundedCertificate};
pub(crate) use solver::{random_tuple, scaled_start};
