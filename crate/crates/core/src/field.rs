//! Scalars shared by the combinatorial routines, which run either in `f64`
//! or exactly over `BigRational`.

use core::fmt::Debug;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive {
    /// True when arithmetic is exact and comparisons need no slack.
    const EXACT: bool;

    /// Zero test relative to a magnitude `scale`.
    fn near_zero(&self, scale: &Self) -> bool;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `self <= other` up to the slack of `near_zero`.
    fn le_tol(&self, other: &Self, scale: &Self) -> bool {
        let d = self.clone() - other.clone();
        d <= Self::zero() || d.near_zero(scale)
    }

    fn eq_tol(&self, other: &Self, scale: &Self) -> bool {
        (self.clone() - other.clone()).near_zero(scale)
    }
}

/// Relative slack used for floating comparisons of masses and coordinates.
pub const FLOAT_SLACK: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn near_zero(&self, scale: &Self) -> bool {
        self.abs() <= FLOAT_SLACK * (1.0 + scale.abs())
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn near_zero(&self, _scale: &Self) -> bool {
        self.is_zero()
    }
}

/// Gauss-Jordan elimination with largest-magnitude pivots.  Returns the
/// reduced rows and the pivot columns.
pub fn row_reduce<S: Scalar>(rows: &[alloc::vec::Vec<S>], ncols: usize) -> (alloc::vec::Vec<alloc::vec::Vec<S>>, alloc::vec::Vec<usize>) {
    let mut m: alloc::vec::Vec<alloc::vec::Vec<S>> = rows.to_vec();
    let scale = m.iter().flatten().fold(S::zero(), |a, x| if x.abs() > a { x.abs() } else { a });
    let mut pivots = alloc::vec::Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let best = (r..m.len())
            .filter(|&i| !m[i][c].near_zero(&scale))
            .max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap_or(core::cmp::Ordering::Equal));
        let Some(p) = best else { continue };
        m.swap(r, p);
        let inv = S::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..m[i].len() {
                    let v = f.clone() * m[r][j].clone();
                    m[i][j] = m[i][j].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank_of<S: Scalar>(rows: &[alloc::vec::Vec<S>], ncols: usize) -> usize {
    row_reduce(rows, ncols).1.len()
}

/// Solves `a x = b` column by column for a square invertible `a` given by
/// rows; `None` when `a` is singular.
pub fn solve_square<S: Scalar>(a: &[alloc::vec::Vec<S>], b: &[alloc::vec::Vec<S>]) -> Option<alloc::vec::Vec<alloc::vec::Vec<S>>> {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let aug: alloc::vec::Vec<alloc::vec::Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).cloned().collect())
        .collect();
    let (red, piv) = row_reduce(&aug, n);
    if piv.len() < n {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..n + k].to_vec()).collect())
}
