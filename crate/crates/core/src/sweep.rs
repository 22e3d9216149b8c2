//! Batch runs over carbon taxes, cost scales and demand-clearing variants.
//!
//! Every grid cell is an independent solve. Cells run on a rayon pool sized
//! from [`SweepSpec::workers`], falling back to the `SUPPLYFLEX_WORKERS`
//! environment variable; results come back in grid order regardless.

use crate::kpi::{kpi_report, KpiReport};
use crate::model::{build_lp, ModelError, VarKind};
use crate::scenario::{DemandClearing, Scenario, ScenarioError};
use crate::solve::{backend, solve, RawOutcome, SolveError, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

pub const WORKERS_ENV: &str = "SUPPLYFLEX_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Grid definition. Readable from TOML:
///
/// ```toml
/// taxes = [0.0, 50.0]
/// truck_scales = [0.1, 1.0, 10.0]
/// mfg_scales = [0.1, 1.0, 10.0]
/// clearings = ["weekly"]
/// workers = 4
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Carbon taxes, $/t CO2.
    pub taxes: Vec<f64>,
    #[serde(default = "unit")]
    pub truck_scales: Vec<f64>,
    #[serde(default = "unit")]
    pub mfg_scales: Vec<f64>,
    /// Empty means the scenario's own clearing.
    #[serde(default)]
    pub clearings: Vec<DemandClearing>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn unit() -> Vec<f64> {
    vec![1.0]
}

impl SweepSpec {
    pub fn tax_ladder(taxes: &[f64]) -> Self {
        SweepSpec {
            taxes: taxes.to_vec(),
            truck_scales: unit(),
            mfg_scales: unit(),
            clearings: Vec::new(),
            workers: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| SweepError::Spec(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), SweepError> {
        if self.taxes.is_empty() || self.truck_scales.is_empty() || self.mfg_scales.is_empty() {
            return Err(SweepError::Spec("point lists must be non-empty".into()));
        }
        if let Some(t) = self.taxes.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(SweepError::Spec(format!("tax {t} must be finite and non-negative")));
        }
        if let Some(f) = self
            .truck_scales
            .iter()
            .chain(&self.mfg_scales)
            .find(|f| !(f.is_finite() && **f > 0.0))
        {
            return Err(SweepError::Spec(format!("scale factor {f} must be positive")));
        }
        if self.workers == Some(0) {
            return Err(SweepError::Spec("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn clearings_for(&self, base: &Scenario) -> Vec<DemandClearing> {
        if self.clearings.is_empty() {
            vec![base.demand_clearing]
        } else {
            self.clearings.clone()
        }
    }

    /// Grid points in output order: clearing, truck scale, mfg scale, tax.
    pub fn points(&self, base: &Scenario) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for clearing in self.clearings_for(base) {
            for &truck_scale in &self.truck_scales {
                for &mfg_scale in &self.mfg_scales {
                    for &tax in &self.taxes {
                        out.push(GridPoint { tax, truck_scale, mfg_scale, clearing });
                    }
                }
            }
        }
        out
    }

    /// Worker count: the spec, then the environment, else rayon's default.
    pub fn resolved_workers(&self) -> Option<usize> {
        self.workers.or_else(workers_from_env)
    }
}

/// Positive worker count from the `SUPPLYFLEX_WORKERS` environment variable.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub tax: f64,
    pub truck_scale: f64,
    pub mfg_scale: f64,
    pub clearing: DemandClearing,
}

impl GridPoint {
    /// The base scenario with this point's costs and clearing applied.
    pub fn apply(&self, base: &Scenario) -> Result<Scenario, ScenarioError> {
        let (ts, ms) = (self.truck_scale, self.mfg_scale);
        base.with(|p| {
            p.costs.k_truck *= ts;
            p.costs.k_equip.iter_mut().for_each(|k| *k *= ms);
            p.demand_clearing = self.clearing;
        })?
        .with_carbon_tax(self.tax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    Error,
}

impl CellStatus {
    fn as_str(self) -> &'static str {
        match self {
            CellStatus::Optimal => "optimal",
            CellStatus::Infeasible => "infeasible",
            CellStatus::TimeLimit => "time-limit",
            CellStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: GridPoint,
    pub status: CellStatus,
    pub message: Option<String>,
    pub energy_kwh: Option<f64>,
    pub renewable_pct: Option<f64>,
    pub fleet: Option<f64>,
    pub equipment: Option<f64>,
    pub warehouse_kg: Option<f64>,
    pub distance_km: Option<f64>,
    /// Fleet equals the minimum feasible fleet for this clearing.
    pub fleet_at_floor: bool,
    /// Installed equipment equals the minimum feasible total.
    pub equipment_at_floor: bool,
    pub report: Option<KpiReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Floors {
    pub clearing: DemandClearing,
    pub fleet: Option<f64>,
    pub equipment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub floors: Vec<Floors>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Fleet,
    Equipment,
}

/// Smallest fleet size (or total equipment) any feasible plan needs, found by
/// minimising that quantity alone over the same constraints.
pub fn minimum_feasible_floor(s: &Scenario, quantity: Quantity, config: &SolverConfig) -> Result<f64, SweepError> {
    let lp = build_lp(s)?;
    let kind = match quantity {
        Quantity::Fleet => VarKind::FleetSize,
        Quantity::Equipment => VarKind::EquipCap,
    };
    let cols: Vec<usize> = (0..lp.map.entity_count(kind))
        .filter_map(|e| lp.map.col(crate::model::VariableKey::fixed(kind, e)))
        .collect();
    let mut objective = vec![0.0; lp.n_cols()];
    for &c in &cols {
        objective[c] = 1.0;
    }
    let be = backend(&config.backend)?;
    match be.solve_raw(&objective, &lp.lower, &lp.upper, &lp.rows, config)? {
        RawOutcome::Optimal(x) => Ok(cols.iter().map(|&c| x[c]).sum::<f64>().max(0.0)),
        RawOutcome::Infeasible => Err(SolveError::Infeasible { hint: Vec::new() }.into()),
        RawOutcome::Unbounded => Err(SolveError::Unbounded.into()),
        RawOutcome::TimeLimit => Err(SolveError::TimeLimit.into()),
    }
}

/// Whether a solved value sits on its floor.
pub fn at_floor(value: f64, floor: f64) -> bool {
    (value - floor).abs() <= 1e-6 * floor.abs().max(1.0)
}

fn run_cell(base: &Scenario, point: GridPoint, config: &SolverConfig) -> SweepRow {
    let mut row = SweepRow {
        point,
        status: CellStatus::Error,
        message: None,
        energy_kwh: None,
        renewable_pct: None,
        fleet: None,
        equipment: None,
        warehouse_kg: None,
        distance_km: None,
        fleet_at_floor: false,
        equipment_at_floor: false,
        report: None,
    };
    let solved = point
        .apply(base)
        .map_err(SweepError::from)
        .and_then(|s| Ok((build_lp(&s)?, s)))
        .and_then(|(lp, s)| Ok((solve(&lp, config)?, s)));
    match solved {
        Ok((sol, s)) => {
            let r = kpi_report(&sol, &s);
            row.status = CellStatus::Optimal;
            row.energy_kwh = Some(r.energy_total_kwh);
            row.renewable_pct = Some(r.renewable_pct_of_demand);
            row.fleet = Some(r.fleet_size);
            row.equipment = Some(r.equipment_total);
            row.warehouse_kg = Some(r.warehouse_total_kg);
            row.distance_km = r.total_distance_km;
            row.report = Some(r);
        }
        Err(e) => {
            row.status = match &e {
                SweepError::Solve(SolveError::Infeasible { .. }) => CellStatus::Infeasible,
                SweepError::Solve(SolveError::TimeLimit) => CellStatus::TimeLimit,
                _ => CellStatus::Error,
            };
            row.message = Some(e.to_string());
        }
    }
    row
}

/// Solves every grid point. Per-cell failures are recorded in the row
/// status; only an invalid spec or worker pool aborts the run.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec, config: &SolverConfig) -> Result<SweepResult, SweepError> {
    spec.check()?;
    let points = spec.points(base);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.resolved_workers() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| SweepError::Pool(e.to_string()))?;

    let clearings = spec.clearings_for(base);
    let (mut rows, floors) = pool.install(|| {
        let rows: Vec<SweepRow> = points.par_iter().map(|&p| run_cell(base, p, config)).collect();
        let floors: Vec<Floors> = clearings
            .par_iter()
            .map(|&clearing| {
                let floor = |q| {
                    base.with_clearing(clearing)
                        .map_err(SweepError::from)
                        .and_then(|s| minimum_feasible_floor(&s, q, config))
                        .ok()
                };
                Floors {
                    clearing,
                    fleet: floor(Quantity::Fleet),
                    equipment: floor(Quantity::Equipment),
                }
            })
            .collect();
        (rows, floors)
    });
    let by_clearing: BTreeMap<DemandClearing, Floors> = floors.iter().map(|f| (f.clearing, *f)).collect();
    for row in &mut rows {
        let f = &by_clearing[&row.point.clearing];
        row.fleet_at_floor = matches!((row.fleet, f.fleet), (Some(v), Some(fl)) if at_floor(v, fl));
        row.equipment_at_floor = matches!((row.equipment, f.equipment), (Some(v), Some(fl)) if at_floor(v, fl));
    }
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        floors,
    })
}

fn num(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl SweepResult {
    /// One line per cell. A `*` in the `_floor` columns marks values equal
    /// to the minimum feasible floor.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "clearing,truck_scale,mfg_scale,tax_per_tonne,status,energy_kwh,renewable_pct,\
             fleet,fleet_floor,equipment,equipment_floor,warehouse_kg,distance_km\n",
        );
        for r in &self.rows {
            let p = r.point;
            let mark = |b: bool| if b { "*" } else { "" };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.clearing,
                p.truck_scale,
                p.mfg_scale,
                p.tax,
                r.status.as_str(),
                num(r.energy_kwh),
                num(r.renewable_pct),
                num(r.fleet),
                mark(r.fleet_at_floor),
                num(r.equipment),
                mark(r.equipment_at_floor),
                num(r.warehouse_kg),
                num(r.distance_km),
            ));
        }
        out
    }

    /// Writes `sweep.csv` and the full archive `sweep.json` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.csv"), self.to_csv())?;
        fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn row(&self, point: &GridPoint) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.point == *point)
    }

    pub fn failed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.status != CellStatus::Optimal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_and_validates() {
        let spec = SweepSpec::from_toml(
            "taxes = [0.0, 50.0]\ntruck_scales = [0.1, 10.0]\nclearings = [\"weekly\", \"monthly\"]\n",
        )
        .unwrap();
        assert_eq!(spec.mfg_scales, vec![1.0]);
        assert_eq!(spec.clearings.len(), 2);
        assert!(SweepSpec::from_toml("taxes = []").is_err());
        assert!(SweepSpec::from_toml("taxes = [0.0]\ntruck_scales = [0.0]").is_err());
        assert!(SweepSpec::from_toml("taxes = [-1.0]").is_err());
        assert!(SweepSpec::from_toml("taxes = [0.0]\nbogus = 1").is_err());
    }

    #[test]
    fn floor_comparison_is_relative() {
        assert!(at_floor(208.333_333_4, 208.333_333_3));
        assert!(!at_floor(209.0, 208.3));
        assert!(at_floor(0.0, 1e-9));
    }
}
