//! Small reference data shared by unit tests.

#[allow(unused_imports)]
use num_traits::Float;
use crate::linalg::{Mat, QuadForm};
use crate::problem::{validate, Factor, NormalizedProblem, Problem};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub fn row(v: &[f64]) -> Mat {
    Mat::from_row_slice(1, v.len(), v)
}

pub fn build(n: usize, factors: Vec<(Mat, f64)>, q: Mat) -> NormalizedProblem {
    let f = factors.into_iter().map(|(m, c)| Factor::new(m, c)).collect();
    validate(&Problem::new(n, f, QuadForm::new(q).unwrap())).unwrap()
}

pub fn two_copies_of_x() -> NormalizedProblem {
    build(2, vec![(row(&[1.0, 0.0]), 1.0), (row(&[1.0, 0.0]), 1.0)], Mat::zeros(2, 2))
}

/// Two-point hypercontractive datum with `e = e^{-2t}` and `c_1 = c_2 = 2`.
pub fn hypercontractivity(e: f64) -> NormalizedProblem {
    let s = 1.0 / (2.0 * PI * (1.0 - e));
    let d = 1.0 - 2.0 * (1.0 - e);
    let q = Mat::from_row_slice(2, 2, &[d, -e.sqrt(), -e.sqrt(), d]) * s;
    build(2, vec![(row(&[1.0, 0.0]), 2.0), (row(&[0.0, 1.0]), 2.0)], q)
}

pub fn single_identity_negative_kernel() -> NormalizedProblem {
    build(1, vec![(row(&[1.0]), 1.0)], Mat::from_row_slice(1, 1, &[-1.0]))
}

pub fn indefinite_with_kernel() -> NormalizedProblem {
    let q = Mat::from_row_slice(3, 3, &[-1.0, 0.3, 0.2, 0.3, 2.0, 0.1, 0.2, 0.1, 1.0]);
    build(3, vec![(row(&[1.0, 0.0, 0.0]), 2.0), (row(&[0.0, 1.0, 0.0]), -0.5)], q)
}

/// Maps `x - y`, `y`, `x` on `R^2` with the given exponents, reordered so
/// positive exponents come first.
pub fn reverse_young(c: [f64; 3]) -> NormalizedProblem {
    let maps = [row(&[1.0, -1.0]), row(&[0.0, 1.0]), row(&[1.0, 0.0])];
    let mut f: Vec<(Mat, f64)> = maps.into_iter().zip(c).collect();
    f.sort_by(|a, b| (b.1 > 0.0).cmp(&(a.1 > 0.0)));
    build(2, f, Mat::zeros(2, 2))
}

/// Coordinate projections of the plane with unit exponents.
pub fn two_copies_of_x_geometric() -> NormalizedProblem {
    build(2, vec![(row(&[1.0, 0.0]), 1.0), (row(&[0.0, 1.0]), 1.0)], Mat::zeros(2, 2))
}
