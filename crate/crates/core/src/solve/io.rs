use super::{PlanSolution, SolveStatus, SolverMeta};
use crate::model::{ObjectiveBreakdown, VariableKey, VariableMap};
use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::Path;

/// Contents of `summary.json` next to the per-kind CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub objective: f64,
    pub breakdown: ObjectiveBreakdown,
    pub status: SolveStatus,
    pub solver: SolverMeta,
}

/// Writes one `<kind>.csv` (entity,step,value) per variable family plus
/// `summary.json`. Static families leave the step column empty.
pub fn write_solution(sol: &PlanSolution, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let map = &sol.map;
    for kind in map.kinds() {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", kind.file_stem())))?;
        w.write_record(["entity", "step", "value"])?;
        for e in 0..map.entity_count(kind) {
            let label = map.entity_label(kind, e);
            if kind.is_timed() {
                for t in 0..map.n_steps() {
                    w.write_record([label, &t.to_string(), &sol.get(kind, e, t).to_string()])?;
                }
            } else {
                w.write_record([label, "", &sol.get_fixed(kind, e).to_string()])?;
            }
        }
        w.flush()?;
    }
    let summary = SolutionSummary {
        objective: sol.objective,
        breakdown: sol.breakdown,
        status: sol.status,
        solver: sol.meta.clone(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")
}

/// Reads a solution written by [`write_solution`] for the same scenario.
pub fn read_solution(s: &Scenario, dir: &Path) -> io::Result<PlanSolution> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let map = VariableMap::for_scenario(s);
    let mut sol = PlanSolution::zeros(map.clone());
    for kind in map.kinds() {
        let path = dir.join(format!("{}.csv", kind.file_stem()));
        let mut r = csv::Reader::from_path(&path)?;
        for rec in r.records() {
            let rec = rec?;
            let (label, step, value) = (&rec[0], &rec[1], &rec[2]);
            let entity = (0..map.entity_count(kind))
                .find(|&e| map.entity_label(kind, e) == label)
                .ok_or_else(|| bad(format!("{}: unknown entity {label:?}", path.display())))?;
            let value: f64 = value.parse().map_err(|_| bad(format!("{}: bad value {value:?}", path.display())))?;
            let key = if kind.is_timed() {
                let t: usize = step.parse().map_err(|_| bad(format!("{}: bad step {step:?}", path.display())))?;
                VariableKey::at(kind, entity, t)
            } else {
                VariableKey::fixed(kind, entity)
            };
            let c = map.col(key).ok_or_else(|| bad(format!("{}: {key:?} out of range", path.display())))?;
            sol.values[c] = value;
        }
    }
    let summary: SolutionSummary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    sol.objective = summary.objective;
    sol.breakdown = summary.breakdown;
    sol.status = summary.status;
    sol.meta = summary.solver;
    Ok(sol)
}
