//! Phase-one simplex with Bland's rule: a nonnegative solution of
//! `G gamma = b`, exact over the rationals.

use crate::field::Scalar;
use alloc::vec;
use alloc::vec::Vec;

/// `g` is given by rows; returns `gamma >= 0` with `g gamma = b` if one
/// exists.
pub fn nonneg_solution<S: Scalar>(g: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let rows = g.len();
    let cols = g.first().map_or(0, |r| r.len());
    let width = cols + rows + 1;
    let scale = g.iter().flatten().chain(b).fold(S::one(), |a, x| if x.abs() > a { x.abs() } else { a });
    // Tableau with artificial variables cols..cols+rows and rhs last.
    let mut t: Vec<Vec<S>> = Vec::with_capacity(rows);
    for (r, row) in g.iter().enumerate() {
        let flip = b[r].is_negative();
        let mut line = vec![S::zero(); width];
        for (j, x) in row.iter().enumerate() {
            line[j] = if flip { -x.clone() } else { x.clone() };
        }
        line[cols + r] = S::one();
        line[width - 1] = if flip { -b[r].clone() } else { b[r].clone() };
        t.push(line);
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    // Reduced costs of the phase-one objective (sum of artificials).
    let mut cost = vec![S::zero(); width];
    for line in &t {
        for j in 0..width {
            if j < cols || j == width - 1 {
                cost[j] = cost[j].clone() - line[j].clone();
            }
        }
    }
    loop {
        let Some(enter) = (0..width - 1).find(|&j| cost[j].is_negative() && !cost[j].near_zero(&scale)) else {
            break;
        };
        let mut leave: Option<(usize, S)> = None;
        for r in 0..rows {
            let a = &t[r][enter];
            if a.is_positive() && !a.near_zero(&scale) {
                let ratio = t[r][width - 1].clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (pr, _) = leave?;
        let piv = t[pr][enter].clone();
        for x in t[pr].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let pivot_row = t[pr].clone();
        for (r, line) in t.iter_mut().enumerate() {
            if r != pr && !line[enter].is_zero() {
                let f = line[enter].clone();
                for j in 0..width {
                    line[j] = line[j].clone() - f.clone() * pivot_row[j].clone();
                }
            }
        }
        let f = cost[enter].clone();
        for j in 0..width {
            cost[j] = cost[j].clone() - f.clone() * pivot_row[j].clone();
        }
        basis[pr] = enter;
    }
    let objective = -cost[width - 1].clone();
    if !objective.near_zero(&scale) {
        return None;
    }
    let mut gamma = vec![S::zero(); cols];
    for (r, &v) in basis.iter().enumerate() {
        if v < cols {
            gamma[v] = t[r][width - 1].clone();
        }
    }
    Some(gamma)
}
