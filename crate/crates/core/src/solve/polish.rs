//! Iterative refinement of a vertex returned by a simplex backend.
//!
//! Quantities in the model span kg of product (1e8) down to truck counts and
//! fractions of a kiln, so the backend's residuals after unscaling can reach
//! 1e-3 in absolute terms. Refinement keeps non-basic columns on their bounds,
//! treats equality and tight inequality rows as active and applies the
//! minimum-norm correction to the basic columns that zeroes the active
//! residuals. Corrections are tiny next to the basic values, so the vertex and
//! its objective are unchanged to working precision.

use crate::model::{LinearProgram, Sense};

const ROUNDS: usize = 8;
const CG_ITERS: usize = 2000;
/// Distance from a bound, relative to the value, below which a column counts as on it.
const BOUND_GAP: f64 = 1e-9;
/// Smallest correction scale of a basic column, relative to its rows.
const FLOOR: f64 = 1e-4;

fn residual(lp: &LinearProgram, x: &[f64], i: usize) -> (f64, f64) {
    let row = &lp.rows[i];
    let mut lhs = 0.0;
    let mut scale = row.rhs.abs();
    for &(c, a) in &row.coeffs {
        lhs += a * x[c];
        scale = scale.max((a * x[c]).abs());
    }
    (row.rhs - lhs, scale.max(1.0))
}

/// Refines `x` in place and keeps the best iterate by largest scaled
/// violation. Columns clamped in one round become non-basic in the next and
/// rows pushed past their bound join the active set.
pub(super) fn polish(lp: &LinearProgram, x: &mut [f64]) {
    // Backend noise outside or within a hair of the bounds is snapped onto
    // them first; rows it touched are repaired by the basic columns.
    for (j, v) in x.iter_mut().enumerate() {
        let gap = BOUND_GAP * (1.0 + v.abs());
        *v = v.clamp(lp.lower[j], lp.upper[j]);
        if *v - lp.lower[j] <= gap {
            *v = lp.lower[j];
        } else if lp.upper[j] - *v <= gap {
            *v = lp.upper[j];
        }
    }
    let mut best = lp.max_violation(x);
    let mut cur = x.to_vec();
    for _ in 0..ROUNDS {
        if best == 0.0 || !refine(lp, &mut cur) {
            return;
        }
        let v = lp.max_violation(&cur);
        if v <= best {
            best = v;
            x.copy_from_slice(&cur);
        }
    }
}

fn refine(lp: &LinearProgram, x: &mut [f64]) -> bool {
    let n = lp.n_cols();
    // Small flows next to large stocks still have to absorb imbalance that
    // cancels along a stock chain, so each column may move at least a small
    // fraction of the rows it sits in.
    let mut floor = vec![0.0_f64; n];
    for i in 0..lp.rows.len() {
        let (_, scale) = residual(lp, x, i);
        for &(c, a) in &lp.rows[i].coeffs {
            if a != 0.0 {
                floor[c] = floor[c].max(FLOOR * scale / a.abs());
            }
        }
    }
    // Basic columns: strictly inside their bounds.
    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            let gap = BOUND_GAP * (1.0 + x[j].abs());
            if x[j] > lp.lower[j] + gap && x[j] < lp.upper[j] - gap {
                x[j].abs().max(floor[j])
            } else {
                0.0
            }
        })
        .collect();

    // Active rows, each normalised by its largest basic coefficient.
    let mut rows: Vec<(usize, f64, f64)> = Vec::new(); // (row, weight, target)
    for (i, row) in lp.rows.iter().enumerate() {
        let (r, scale) = residual(lp, x, i);
        let active = match row.sense {
            Sense::Eq => true,
            Sense::Le => r <= 1e-12 * scale,
        };
        if !active {
            continue;
        }
        let big = row
            .coeffs
            .iter()
            .map(|&(c, a)| (a * col_scale[c]).abs())
            .fold(0.0_f64, f64::max);
        if big > 0.0 {
            rows.push((i, 1.0 / big, r / big));
        }
    }
    if rows.is_empty() {
        return false;
    }

    // CGLS on min ||A u - r|| with A = W A_B D; the correction is D u.
    let apply = |u: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.extend(rows.iter().map(|&(i, w, _)| {
            lp.rows[i].coeffs.iter().map(|&(c, a)| a * col_scale[c] * u[c]).sum::<f64>() * w
        }));
    };
    let apply_t = |v: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, &(i, w, _)) in rows.iter().enumerate() {
            for &(c, a) in &lp.rows[i].coeffs {
                out[c] += a * col_scale[c] * w * v[k];
            }
        }
    };
    let mut u = vec![0.0; n];
    let mut r: Vec<f64> = rows.iter().map(|&(_, _, t)| t).collect();
    let r0 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r0 == 0.0 {
        return false;
    }
    let mut s = vec![0.0; n];
    apply_t(&r, &mut s);
    let mut p = s.clone();
    let mut gamma: f64 = s.iter().map(|v| v * v).sum();
    let mut q = Vec::with_capacity(rows.len());
    for _ in 0..CG_ITERS {
        if gamma <= 0.0 {
            break;
        }
        apply(&p, &mut q);
        let qq: f64 = q.iter().map(|v| v * v).sum();
        if qq <= 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for j in 0..n {
            u[j] += alpha * p[j];
        }
        for k in 0..r.len() {
            r[k] -= alpha * q[k];
        }
        // Rows are normalised, so the absolute floor is machine precision.
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= (1e-12 * r0).max(1e-15) {
            break;
        }
        apply_t(&r, &mut s);
        let next: f64 = s.iter().map(|v| v * v).sum();
        let beta = next / gamma;
        gamma = next;
        for j in 0..n {
            p[j] = s[j] + beta * p[j];
        }
    }
    for j in 0..n {
        if col_scale[j] > 0.0 {
            x[j] = (x[j] + col_scale[j] * u[j]).clamp(lp.lower[j], lp.upper[j]);
        }
    }
    true
}
