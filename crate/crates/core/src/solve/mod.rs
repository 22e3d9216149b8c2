//! Solver backends and structured solutions.

mod io;
mod microlp_backend;
mod polish;
#[cfg(feature = "highs")]
mod highs_backend;
mod oracle;

pub use io::{read_solution, write_solution, SolutionSummary};
pub use oracle::{oracle_enumerate, OracleError, OracleResult, ORACLE_MAX_SCHEDULES};

use crate::model::{LinearProgram, ObjectiveBreakdown, Row, Sense, VarKind, VariableKey, VariableMap};
use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Solver settings. Tolerances are relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: String,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub time_limit: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: "microlp".into(),
            feasibility_tol: 1e-6,
            optimality_tol: 1e-6,
            time_limit: None,
        }
    }
}

impl SolverConfig {
    pub fn with_backend(backend: &str) -> Self {
        SolverConfig {
            backend: backend.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimeLimit,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("LP is infeasible; conflicting rows: {}", .hint.join(", "))]
    Infeasible { hint: Vec<String> },
    #[error("LP is unbounded")]
    Unbounded,
    #[error("time limit reached before an optimal solution was found")]
    TimeLimit,
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("unknown solver backend {0:?} (available: {1})")]
    UnknownBackend(String, String),
    #[error("invalid solver config: {0}")]
    Config(String),
}

impl SolveError {
    pub fn status(&self) -> Option<SolveStatus> {
        match self {
            SolveError::Infeasible { .. } => Some(SolveStatus::Infeasible),
            SolveError::TimeLimit => Some(SolveStatus::TimeLimit),
            _ => None,
        }
    }
}

/// Raw outcome of a backend call on a column/row description.
pub enum RawOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
    TimeLimit,
}

/// Narrow backend interface: minimise `objective · x` subject to `rows`
/// and column bounds, returning the primal vector.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve_raw(
        &self,
        objective: &[f64],
        lower: &[f64],
        upper: &[f64],
        rows: &[Row],
        config: &SolverConfig,
    ) -> Result<RawOutcome, SolveError>;
}

pub fn available_backends() -> Vec<&'static str> {
    let mut v = vec!["microlp"];
    if cfg!(feature = "highs") {
        v.push("highs");
    }
    v
}

pub fn backend(id: &str) -> Result<Box<dyn Backend>, SolveError> {
    match id {
        "microlp" => Ok(Box::new(microlp_backend::MicroLp)),
        #[cfg(feature = "highs")]
        "highs" => Ok(Box::new(highs_backend::Highs)),
        other => Err(SolveError::UnknownBackend(other.into(), available_backends().join(", "))),
    }
}

/// Solver metadata carried with a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub backend: String,
    /// Non-renewable penalty of the LP that produced the solution ($/kWh).
    pub k_power: f64,
    pub n_cols: usize,
    pub n_rows: usize,
    /// Largest scaled row residual of the returned point.
    pub max_violation: f64,
}

/// Values of every LP column, addressable by variable kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSolution {
    pub map: VariableMap,
    pub values: Vec<f64>,
    pub objective: f64,
    pub breakdown: ObjectiveBreakdown,
    pub status: SolveStatus,
    pub meta: SolverMeta,
}

impl PlanSolution {
    /// All-zero solution over `map`, handy for hand-built test points.
    pub fn zeros(map: VariableMap) -> Self {
        let n = map.n_cols();
        PlanSolution {
            map,
            values: vec![0.0; n],
            objective: 0.0,
            breakdown: ObjectiveBreakdown::default(),
            status: SolveStatus::Optimal,
            meta: SolverMeta {
                backend: "none".into(),
                k_power: 0.0,
                n_cols: n,
                n_rows: 0,
                max_violation: 0.0,
            },
        }
    }

    /// Value of a timed variable; absent families read as zero.
    pub fn get(&self, kind: VarKind, entity: usize, step: usize) -> f64 {
        self.map.col(VariableKey::at(kind, entity, step)).map_or(0.0, |c| self.values[c])
    }

    /// Value of a static (sizing) variable; absent families read as zero.
    pub fn get_fixed(&self, kind: VarKind, entity: usize) -> f64 {
        self.map.col(VariableKey::fixed(kind, entity)).map_or(0.0, |c| self.values[c])
    }

    /// Sets a variable. Panics if the key is not in the map.
    pub fn set(&mut self, key: VariableKey, value: f64) {
        let c = self.map.col(key).unwrap_or_else(|| panic!("{key:?} not in variable map"));
        self.values[c] = value;
    }

    /// The per-step series of one entity of a timed family.
    pub fn trajectory(&self, kind: VarKind, entity: usize) -> Vec<f64> {
        (0..self.map.n_steps()).map(|t| self.get(kind, entity, t)).collect()
    }

    /// Sum over entities of a timed family at every step.
    pub fn total_trajectory(&self, kind: VarKind) -> Vec<f64> {
        let n_e = self.map.entity_count(kind);
        (0..self.map.n_steps())
            .map(|t| (0..n_e).map(|e| self.get(kind, e, t)).sum())
            .collect()
    }

    pub fn n_steps(&self) -> usize {
        self.map.n_steps()
    }
}

/// Objective terms read off the LP's own cost vector.
fn breakdown_from_lp(lp: &LinearProgram, x: &[f64]) -> ObjectiveBreakdown {
    let mut b = ObjectiveBreakdown::default();
    for (j, (&c, &v)) in lp.objective.iter().zip(x).enumerate() {
        if c == 0.0 {
            continue;
        }
        let term = c * v;
        match lp.map.key(j).map(|k| k.kind) {
            Some(VarKind::FleetSize) => b.capex_truck += term,
            Some(VarKind::WarehouseCap) => b.capex_warehouse += term,
            Some(VarKind::EquipCap) => b.capex_equipment += term,
            Some(VarKind::NonRenewable) => b.opex_nonrenewable_penalty += term,
            _ => b.opex_base_energy += term,
        }
    }
    b
}

fn check_config(config: &SolverConfig) -> Result<(), SolveError> {
    if !(config.feasibility_tol > 0.0 && config.optimality_tol > 0.0) {
        return Err(SolveError::Config("tolerances must be positive".into()));
    }
    Ok(())
}

/// Solves `lp` with the configured backend.
///
/// On infeasibility an elastic copy of the LP is solved to name the rows
/// that cannot be satisfied together.
pub fn solve(lp: &LinearProgram, config: &SolverConfig) -> Result<PlanSolution, SolveError> {
    check_config(config)?;
    lp.check_well_formed().map_err(SolveError::Backend)?;
    let be = backend(&config.backend)?;
    let outcome = be.solve_raw(&lp.objective, &lp.lower, &lp.upper, &lp.rows, config)?;
    let mut x = match outcome {
        RawOutcome::Optimal(x) => x,
        RawOutcome::Infeasible => {
            let hint = infeasibility_hint(lp, be.as_ref(), config).unwrap_or_default();
            return Err(SolveError::Infeasible { hint });
        }
        RawOutcome::Unbounded => return Err(SolveError::Unbounded),
        RawOutcome::TimeLimit => return Err(SolveError::TimeLimit),
    };
    for (j, v) in x.iter_mut().enumerate() {
        // Round-off below the lower bound is clamped back onto it.
        if *v < lp.lower[j] && lp.lower[j] - *v <= config.feasibility_tol * v.abs().max(1.0) {
            *v = lp.lower[j];
        }
    }
    polish::polish(lp, &mut x);
    for v in x.iter_mut().filter(|v| **v == 0.0) {
        *v = 0.0; // drop negative zero so exports are stable
    }
    let max_violation = lp.max_violation(&x);
    Ok(PlanSolution {
        objective: lp.objective_value(&x),
        breakdown: breakdown_from_lp(lp, &x),
        status: SolveStatus::Optimal,
        meta: SolverMeta {
            backend: be.name().into(),
            k_power: lp.k_power,
            n_cols: lp.n_cols(),
            n_rows: lp.n_rows(),
            max_violation,
        },
        map: lp.map.clone(),
        values: x,
    })
}

/// Row tags of an infeasible subset, found by minimising total slack on an
/// elastic copy of the LP.
pub fn infeasibility_hint(
    lp: &LinearProgram,
    be: &dyn Backend,
    config: &SolverConfig,
) -> Option<Vec<String>> {
    let n = lp.n_cols();
    let mut objective = vec![0.0; n];
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut rows = Vec::with_capacity(lp.n_rows());
    let mut owners = Vec::new();
    for (i, row) in lp.rows.iter().enumerate() {
        let mut r = row.clone();
        let scale = row.coeffs.iter().fold(row.rhs.abs(), |m, &(_, a)| m.max(a.abs())).max(1.0);
        let mut add_slack = |sign: f64, r: &mut Row| {
            r.coeffs.push((objective.len(), sign * scale));
            objective.push(1.0);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            owners.push(i);
        };
        add_slack(-1.0, &mut r);
        if row.sense == Sense::Eq {
            add_slack(1.0, &mut r);
        }
        rows.push(r);
    }
    match be.solve_raw(&objective, &lower, &upper, &rows, config).ok()? {
        RawOutcome::Optimal(x) => {
            let mut hint: Vec<String> = Vec::new();
            for (k, &i) in owners.iter().enumerate() {
                if x[n + k] > 1e-7 {
                    let tag = lp.rows[i].tag.to_string();
                    if !hint.contains(&tag) {
                        hint.push(tag);
                    }
                }
            }
            Some(hint)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_backend_is_reported() {
        let err = backend("cplex").err().unwrap();
        assert!(err.to_string().contains("microlp"));
    }

    #[test]
    fn config_rejects_nonpositive_tolerance() {
        let mut c = SolverConfig::default();
        c.feasibility_tol = 0.0;
        assert!(check_config(&c).is_err());
    }
}
