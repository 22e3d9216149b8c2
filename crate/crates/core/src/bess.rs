//! Battery-only alternative: freeze the zero-tax schedule, then size one
//! system-level battery against the same carbon penalty.

use crate::model::{build_lp, Constraint, ModelError, Row, RowTag, Sense, VarKind};
use crate::scenario::{carbon_tax_to_penalty, Scenario, ScenarioError};
use crate::solve::{backend, solve, PlanSolution, RawOutcome, SolveError, SolverConfig};
use crate::sweep::{run_sweep, CellStatus, SweepError, SweepSpec};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum BessError {
    #[error("profile must come from a zero-tax solve, got k_power = {0}")]
    NotZeroTax(f64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("proposed model failed at tax {tax}: {message}")]
    Proposed { tax: f64, message: String },
}

/// System-wide load and renewable availability per step, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedLoadProfile {
    pub step_hours: f64,
    pub total_demand: Vec<f64>,
    pub renewable_available: Vec<f64>,
}

impl FixedLoadProfile {
    pub fn n_steps(&self) -> usize {
        self.total_demand.len()
    }

    pub fn energy(&self) -> f64 {
        self.total_demand.iter().sum::<f64>() * self.step_hours
    }

    /// Renewable share of the load without storage, percent.
    pub fn renewable_pct(&self) -> f64 {
        let used: f64 = self
            .total_demand
            .iter()
            .zip(&self.renewable_available)
            .map(|(p, r)| p.min(*r))
            .sum();
        let total: f64 = self.total_demand.iter().sum();
        if total > 0.0 {
            100.0 * used / total
        } else {
            0.0
        }
    }
}

/// Load profile of a plan solved without a carbon penalty.
pub fn derive_fixed_profile(sol: &PlanSolution, s: &Scenario) -> Result<FixedLoadProfile, BessError> {
    if sol.meta.k_power != 0.0 {
        return Err(BessError::NotZeroTax(sol.meta.k_power));
    }
    if sol.n_steps() != s.n_steps() {
        return Err(BessError::Input("solution and scenario horizons differ".into()));
    }
    Ok(FixedLoadProfile {
        step_hours: s.dt(),
        total_demand: sol
            .total_trajectory(VarKind::Power)
            .into_iter()
            .map(|p| p.max(0.0))
            .collect(),
        renewable_available: (0..s.n_steps()).map(|t| s.renewable_total(t)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BessResult {
    /// Installed capacity, kWh.
    pub b_max: f64,
    /// Stored energy at the end of each step, kWh.
    pub battery: Vec<f64>,
    /// Non-renewable power per step, kW.
    pub z: Vec<f64>,
    /// Curtailed renewable power per step, kW.
    pub r_curt: Vec<f64>,
    pub renewable_pct: f64,
    pub k_batt: f64,
    pub k_power: f64,
    /// Battery capex plus penalty and base energy cost, $.
    pub objective: f64,
}

/// Sizes the battery that minimises `k_batt·B_max + k_power·Δt·Σz`.
///
/// `k_batt` is the battery cost over the whole horizon ($/kWh installed).
/// The base cost `epsilon` is charged on the fixed load and, as a tie-breaker,
/// keeps non-renewable draw at its minimum when `k_power` is zero. No charge
/// or discharge power limit applies.
pub fn size_battery(
    profile: &FixedLoadProfile,
    k_batt: f64,
    k_power: f64,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<BessResult, BessError> {
    let n = profile.n_steps();
    let dt = profile.step_hours;
    if n == 0 || profile.renewable_available.len() != n {
        return Err(BessError::Input("profile series must have equal, non-zero length".into()));
    }
    if !(dt > 0.0) {
        return Err(BessError::Input("step_hours must be positive".into()));
    }
    for (name, v) in [("k_batt", k_batt), ("k_power", k_power), ("epsilon", epsilon)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(BessError::Input(format!("{name} must be non-negative")));
        }
    }
    if profile
        .total_demand
        .iter()
        .chain(&profile.renewable_available)
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(BessError::Input("profile values must be non-negative".into()));
    }

    // Columns: B[0..n], z[n..2n], r_curt[2n..3n], B_max[3n].
    let (b, z, rc, bmax) = (0, n, 2 * n, 3 * n);
    let mut objective = vec![0.0; 3 * n + 1];
    objective[bmax] = k_batt;
    for t in 0..n {
        objective[z + t] = (k_power + epsilon) * dt;
    }
    let lower = vec![0.0; 3 * n + 1];
    let mut upper = vec![f64::INFINITY; 3 * n + 1];
    // Only available renewable power can be curtailed.
    upper[rc..rc + n].copy_from_slice(&profile.renewable_available);
    let mut rows = Vec::with_capacity(2 * n);
    let tag = |constraint, t| RowTag {
        constraint,
        entity: "system".into(),
        step: Some(t),
    };
    for t in 0..n {
        let prev = (t + n - 1) % n;
        let mut coeffs = vec![(b + t, 1.0), (z + t, -dt), (rc + t, dt)];
        if prev != t {
            coeffs.push((b + prev, -1.0));
        } else {
            coeffs[0].1 = 0.0;
        }
        rows.push(Row {
            tag: tag(Constraint::BatteryBalance, t),
            sense: Sense::Eq,
            rhs: (profile.renewable_available[t] - profile.total_demand[t]) * dt,
            coeffs: coeffs.into_iter().filter(|c| c.1 != 0.0).collect(),
        });
        rows.push(Row {
            tag: tag(Constraint::BatteryCapacity, t),
            sense: Sense::Le,
            rhs: 0.0,
            coeffs: vec![(b + t, 1.0), (bmax, -1.0)],
        });
    }
    let be = backend(&config.backend)?;
    let x = match be.solve_raw(&objective, &lower, &upper, &rows, config)? {
        RawOutcome::Optimal(x) => x,
        RawOutcome::Infeasible => return Err(SolveError::Infeasible { hint: Vec::new() }.into()),
        RawOutcome::Unbounded => return Err(SolveError::Unbounded.into()),
        RawOutcome::TimeLimit => return Err(SolveError::TimeLimit.into()),
    };
    let clean = |v: f64| if v.abs() < 1e-9 { 0.0 } else { v.max(0.0) };
    let battery: Vec<f64> = x[b..b + n].iter().map(|&v| clean(v)).collect();
    let zs: Vec<f64> = x[z..z + n].iter().map(|&v| clean(v)).collect();
    let r_curt: Vec<f64> = x[rc..rc + n].iter().map(|&v| clean(v)).collect();
    let b_max = clean(x[bmax]);
    let load: f64 = profile.total_demand.iter().sum();
    let nonren: f64 = zs.iter().sum();
    let renewable_pct = if load > 0.0 {
        (100.0 * (load - nonren) / load).clamp(0.0, 100.0)
    } else {
        0.0
    };
    Ok(BessResult {
        b_max,
        battery,
        z: zs,
        r_curt,
        renewable_pct,
        k_batt,
        k_power,
        objective: k_batt * b_max + k_power * dt * nonren + epsilon * dt * load,
    })
}

/// One line of the flexible-vs-battery comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub tax_per_tonne: f64,
    pub b_max_kwh: f64,
    pub proposed_renewable_pct: f64,
    pub bess_renewable_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub batteries: Vec<BessResult>,
    pub profile: FixedLoadProfile,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tax_per_tonne,b_max_kwh,proposed_renewable_pct,bess_renewable_pct\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                r.tax_per_tonne, r.b_max_kwh, r.proposed_renewable_pct, r.bess_renewable_pct
            ));
        }
        out
    }
}

/// Runs the flexible model and the battery alternative at each tax.
///
/// The battery side freezes the schedule of the zero-tax solve of `s` and
/// pays the horizon battery cost [`Scenario::battery_cost_over_horizon`].
pub fn compare(s: &Scenario, taxes: &[f64], config: &SolverConfig) -> Result<Comparison, BessError> {
    let base = s.with_carbon_tax(0.0)?;
    let zero = solve(&build_lp(&base)?, config)?;
    let profile = derive_fixed_profile(&zero, &base)?;
    let sweep = run_sweep(s, &SweepSpec::tax_ladder(taxes), config)?;
    let mut rows = Vec::with_capacity(taxes.len());
    let mut batteries = Vec::with_capacity(taxes.len());
    for (&tax, cell) in taxes.iter().zip(&sweep.rows) {
        let proposed = match (cell.status, cell.renewable_pct) {
            (CellStatus::Optimal, Some(pct)) => pct,
            _ => {
                return Err(BessError::Proposed {
                    tax,
                    message: cell.message.clone().unwrap_or_default(),
                })
            }
        };
        let k_power = carbon_tax_to_penalty(tax, s.costs.emission_factor)?;
        let b = size_battery(&profile, s.battery_cost_over_horizon(), k_power, s.costs.epsilon, config)?;
        rows.push(ComparisonRow {
            tax_per_tonne: tax,
            b_max_kwh: b.b_max,
            proposed_renewable_pct: proposed,
            bess_renewable_pct: b.renewable_pct,
        });
        batteries.push(b);
    }
    Ok(Comparison { rows, batteries, profile })
}

#[derive(Serialize)]
struct BessSummary {
    b_max: f64,
    renewable_pct: f64,
    k_batt: f64,
    k_power: f64,
    objective: f64,
}

/// Writes `step,B,z,r_curt` to `<stem>.csv` and the headline numbers to
/// `<stem>.json` in `dir`.
pub fn write_bess(result: &BessResult, dir: &Path, stem: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
    w.write_record(["step", "B", "z", "r_curt"])?;
    for t in 0..result.battery.len() {
        w.write_record([
            t.to_string(),
            result.battery[t].to_string(),
            result.z[t].to_string(),
            result.r_curt[t].to_string(),
        ])?;
    }
    w.flush()?;
    let summary = BessSummary {
        b_max: result.b_max,
        renewable_pct: result.renewable_pct,
        k_batt: result.k_batt,
        k_power: result.k_power,
        objective: result.objective,
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&summary)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(load: &[f64], ren: &[f64]) -> FixedLoadProfile {
        FixedLoadProfile {
            step_hours: 1.0,
            total_demand: load.to_vec(),
            renewable_available: ren.to_vec(),
        }
    }

    #[test]
    fn day_night_battery_covers_the_night() {
        // 10 kW load; 20 kW of renewables for half the day, none at night.
        let p = profile(&[10.0; 4], &[20.0, 20.0, 0.0, 0.0]);
        let cfg = SolverConfig::default();
        let r = size_battery(&p, 1.0, 5.0, 0.0, &cfg).unwrap();
        assert!((r.b_max - 20.0).abs() < 1e-6, "{}", r.b_max);
        assert!((r.renewable_pct - 100.0).abs() < 1e-6);
        // Storage dearer than the penalty it avoids: none built.
        let r = size_battery(&p, 100.0, 5.0, 0.0, &cfg).unwrap();
        assert_eq!(r.b_max, 0.0);
        assert!((r.renewable_pct - 50.0).abs() < 1e-6);
        assert!((r.renewable_pct - p.renewable_pct()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let p = profile(&[1.0, 2.0], &[1.0]);
        assert!(matches!(
            size_battery(&p, 1.0, 1.0, 0.0, &SolverConfig::default()),
            Err(BessError::Input(_))
        ));
        let p = profile(&[1.0], &[1.0]);
        assert!(size_battery(&p, -1.0, 1.0, 0.0, &SolverConfig::default()).is_err());
    }
}
