use super::{Backend, RawOutcome, SolveError, SolverConfig};
use crate::model::{Row, Sense};
use highs::{HighsModelStatus, RowProblem, Sense as Direction};

/// HiGHS through its C API. Much faster than the embedded simplex on the
/// week-long hourly fixtures.
pub struct Highs;

impl Backend for Highs {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve_raw(
        &self,
        objective: &[f64],
        lower: &[f64],
        upper: &[f64],
        rows: &[Row],
        config: &SolverConfig,
    ) -> Result<RawOutcome, SolveError> {
        let mut pb = RowProblem::default();
        let cols: Vec<_> = (0..objective.len())
            .map(|j| pb.add_column(objective[j], lower[j]..=upper[j]))
            .collect();
        for row in rows {
            let factors = row.coeffs.iter().map(|&(c, a)| (cols[c], a));
            match row.sense {
                Sense::Le => pb.add_row(..=row.rhs, factors),
                Sense::Eq => pb.add_row(row.rhs..=row.rhs, factors),
            }
        }
        let mut model = pb.optimise(Direction::Minimise);
        model.make_quiet();
        model.set_option("primal_feasibility_tolerance", config.feasibility_tol);
        model.set_option("dual_feasibility_tolerance", config.optimality_tol);
        if let Some(limit) = config.time_limit {
            model.set_option("time_limit", limit.as_secs_f64());
        }
        let solved = model
            .try_solve()
            .map_err(|s| SolveError::Backend(format!("highs: {s:?}")))?;
        match solved.status() {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
                Ok(RawOutcome::Optimal(solved.get_solution().columns().to_vec()))
            }
            HighsModelStatus::Infeasible => Ok(RawOutcome::Infeasible),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => Ok(RawOutcome::Unbounded),
            HighsModelStatus::ReachedTimeLimit => Ok(RawOutcome::TimeLimit),
            other => Err(SolveError::Backend(format!("highs: {other:?}"))),
        }
    }
}
