//! Small dense simplex solver for the few linear programs the cells need:
//! the deepest interior point and the extent along a direction.

use alloc::vec;
use alloc::vec::Vec;

use crate::cell::HalfSpace;
use crate::math::{dot, norm};

const PIVOT_EPS: f64 = 1e-12;

/// Maximizes `c.v` subject to `rows v <= rhs`, `v >= 0`, where `rhs >= 0`
/// so the all-slack basis is feasible. Returns `None` when unbounded.
fn simplex(rows: &[Vec<f64>], rhs: &[f64], objective: &[f64]) -> Option<Vec<f64>> {
    let m = rows.len();
    let n = objective.len();
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for (i, row) in rows.iter().enumerate() {
        t[i * width..i * width + n].copy_from_slice(row);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = rhs[i].max(0.0);
    }
    for (j, c) in objective.iter().enumerate() {
        t[m * width + j] = -c;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_iters = 50 * (n + m) + 100;
    for _ in 0..max_iters {
        // Bland's rule: lowest-index improving column.
        let Some(enter) = (0..n + m).find(|&j| t[m * width + j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < best - PIVOT_EPS
                            || (ratio <= best + PIVOT_EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pivot_row, _) = leave?;
        let p = t[pivot_row * width + enter];
        for j in 0..width {
            t[pivot_row * width + j] /= p;
        }
        for i in 0..=m {
            if i == pivot_row {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * t[pivot_row * width + j];
                }
            }
        }
        basis[pivot_row] = enter;
    }
    let mut v = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            v[b] = t[i * width + width - 1];
        }
    }
    Some(v)
}

/// Center and radius of the largest ball inside the intersection of
/// `halfspaces`. `start` may be any point; it only anchors the variables.
pub(crate) fn chebyshev_center(halfspaces: &[HalfSpace], start: &[f64]) -> Option<(Vec<f64>, f64)> {
    let d = start.len();
    let norms: Vec<f64> = halfspaces.iter().map(|h| norm(h.normal())).collect();
    let slack0 = halfspaces
        .iter()
        .zip(&norms)
        .map(|(h, n)| (h.offset() - dot(h.normal(), start)) / n)
        .fold(f64::INFINITY, f64::min);
    let mut rows = Vec::with_capacity(halfspaces.len());
    let mut rhs = Vec::with_capacity(halfspaces.len());
    for (h, n) in halfspaces.iter().zip(&norms) {
        let mut row = Vec::with_capacity(2 * d + 1);
        row.extend(h.normal().iter().map(|a| a / n));
        row.extend(h.normal().iter().map(|a| -a / n));
        row.push(1.0);
        rows.push(row);
        rhs.push((h.offset() - dot(h.normal(), start)) / n - slack0);
    }
    let mut objective = vec![0.0; 2 * d + 1];
    objective[2 * d] = 1.0;
    let v = simplex(&rows, &rhs, &objective)?;
    let center = (0..d).map(|j| start[j] + v[j] - v[d + j]).collect();
    Some((center, slack0 + v[2 * d]))
}

/// `max direction . y` over the intersection, given a feasible point.
pub(crate) fn support(
    halfspaces: &[HalfSpace],
    feasible: &[f64],
    direction: &[f64],
) -> Option<f64> {
    let d = feasible.len();
    let mut rows = Vec::with_capacity(halfspaces.len());
    let mut rhs = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        let n = norm(h.normal());
        let mut row = Vec::with_capacity(2 * d);
        row.extend(h.normal().iter().map(|a| a / n));
        row.extend(h.normal().iter().map(|a| -a / n));
        rows.push(row);
        rhs.push((h.offset() - dot(h.normal(), feasible)) / n);
    }
    let mut objective = Vec::with_capacity(2 * d);
    objective.extend_from_slice(direction);
    objective.extend(direction.iter().map(|c| -c));
    let v = simplex(&rows, &rhs, &objective)?;
    let step: Vec<f64> = (0..d).map(|j| v[j] - v[d + j]).collect();
    Some(dot(direction, feasible) + dot(direction, &step))
}
