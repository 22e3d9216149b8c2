use super::{Backend, RawOutcome, SolveError, SolverConfig};
use crate::model::{Row, Sense};
use microlp::{ComparisonOp, Error, LinearExpr, OptimizationDirection, Problem, SolveOutcome};

/// Embedded pure-Rust simplex. The problem is equilibrated before it is
/// handed to the solver; coefficients of the supply-chain LP span about ten
/// orders of magnitude (kg of cement against $/kg·h storage rates).
pub struct MicroLp;

/// Row and column scale factors (powers of two) such that
/// `r_i * a_ij * c_j` is close to 1 in geometric mean.
struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
    obj: f64,
}

fn pow2(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        v.log2().round().exp2()
    } else {
        1.0
    }
}

fn equilibrate(n_cols: usize, rows: &[Row], objective: &[f64]) -> Scaling {
    // The right-hand side takes part as one extra column so that the scaled
    // solution values, not just the coefficients, end up near 1.
    let rhs = n_cols;
    let mut row = vec![1.0; rows.len()];
    let mut col = vec![1.0; n_cols + 1];
    let entries = |r: &Row| r.coeffs.clone().into_iter().chain((r.rhs != 0.0).then_some((rhs, r.rhs)));
    for _ in 0..8 {
        for (i, r) in rows.iter().enumerate() {
            let (lo, hi) = entries(r).fold((f64::INFINITY, 0.0_f64), |(lo, hi), (c, a)| {
                let v = (a * col[c]).abs();
                (lo.min(v), hi.max(v))
            });
            row[i] = pow2(1.0 / (lo * hi).sqrt());
        }
        let mut lo = vec![f64::INFINITY; n_cols + 1];
        let mut hi = vec![0.0_f64; n_cols + 1];
        for (i, r) in rows.iter().enumerate() {
            for (c, a) in entries(r) {
                let v = (a * row[i]).abs();
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        for j in 0..=n_cols {
            if hi[j] > 0.0 {
                col[j] = pow2(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
    }
    let s = col.pop().expect("rhs scale");
    row.iter_mut().for_each(|r| *r *= s);
    col.iter_mut().for_each(|c| *c /= s);
    let max_obj = objective
        .iter()
        .zip(&col)
        .map(|(c, s)| (c * s).abs())
        .fold(0.0_f64, f64::max);
    Scaling {
        row,
        col,
        obj: if max_obj > 0.0 { pow2(1.0 / max_obj) } else { 1.0 },
    }
}

impl Backend for MicroLp {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn solve_raw(
        &self,
        objective: &[f64],
        lower: &[f64],
        upper: &[f64],
        rows: &[Row],
        config: &SolverConfig,
    ) -> Result<RawOutcome, SolveError> {
        let sc = equilibrate(objective.len(), rows, objective);
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        if let Some(limit) = config.time_limit {
            problem.set_time_limit(limit);
        }
        let vars: Vec<_> = (0..objective.len())
            .map(|j| {
                let c = sc.col[j];
                problem.add_var(objective[j] * c * sc.obj, (lower[j] / c, upper[j] / c))
            })
            .collect();
        for (i, row) in rows.iter().enumerate() {
            let r = sc.row[i];
            let expr: LinearExpr = row
                .coeffs
                .iter()
                .map(|&(c, a)| (vars[c], a * r * sc.col[c]))
                .collect();
            let op = match row.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, row.rhs * r);
        }
        match problem.solve() {
            Ok(SolveOutcome::Solution(sol)) => Ok(RawOutcome::Optimal(
                vars.iter()
                    .zip(&sc.col)
                    .map(|(&v, c)| sol.var_value_raw(v) * c)
                    .collect(),
            )),
            Ok(SolveOutcome::Interrupted(_)) => Ok(RawOutcome::TimeLimit),
            Err(Error::Infeasible) => Ok(RawOutcome::Infeasible),
            Err(Error::Unbounded) => Ok(RawOutcome::Unbounded),
            Err(e) => Err(SolveError::Backend(e.to_string())),
        }
    }
}
