//! Reported metrics of a solved plan.
//!
//! Renewables are pooled system-wide each step, so the renewable energy a plan
//! consumes at step `t` is `min(Σp, Σr)·Δt`. Wind and solar shares of that
//! pool follow their shares of availability.

use crate::model::{ObjectiveBreakdown, VarKind};
use crate::scenario::Scenario;
use crate::solve::PlanSolution;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum KpiError {
    #[error("solutions have different shapes: {0}")]
    ShapeMismatch(String),
    #[error("no distance for path {0}")]
    MissingDistance(String),
}

/// Energy by source, kWh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceSplit {
    pub nonrenewable: f64,
    pub wind: f64,
    pub solar: f64,
}

impl SourceSplit {
    pub fn total(&self) -> f64 {
        self.nonrenewable + self.wind + self.solar
    }
}

/// Consumption split by sector and source, kWh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub manufacturing: SourceSplit,
    pub transport: SourceSplit,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.manufacturing.total() + self.transport.total()
    }
}

/// Mean utilization in percent. `None` when no entity has capacity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub trucks: Option<f64>,
    pub warehouse: Option<f64>,
    pub equipment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub k_power: f64,
    pub renewable_pct_of_demand: f64,
    pub renewable_pct_of_available: f64,
    pub energy_total_kwh: f64,
    pub energy: EnergySplit,
    pub utilization: Utilization,
    pub costs: ObjectiveBreakdown,
    pub fleet_size: f64,
    pub warehouse_total_kg: f64,
    pub equipment_total: f64,
    pub total_distance_km: Option<f64>,
    /// Cumulative consumption at the end of each step, kWh.
    pub cumulative_energy_kwh: Vec<f64>,
}

/// Total grid draw per step, kW.
fn total_power(sol: &PlanSolution) -> Vec<f64> {
    sol.total_trajectory(VarKind::Power)
}

/// Renewable power consumed per step, kW.
fn renewable_used(sol: &PlanSolution, s: &Scenario) -> Vec<f64> {
    total_power(sol)
        .iter()
        .enumerate()
        .map(|(t, p)| p.min(s.renewable_total(t)).max(0.0))
        .collect()
}

/// `(renewable % of consumption, renewable % of availability)`; 0 when the
/// denominator is 0.
pub fn renewable_fractions(sol: &PlanSolution, s: &Scenario) -> (f64, f64) {
    let used: f64 = renewable_used(sol, s).iter().sum();
    let total: f64 = total_power(sol).iter().sum();
    let avail: f64 = (0..s.n_steps()).map(|t| s.renewable_total(t)).sum();
    let pct = |a: f64, b: f64| if b > 0.0 { (100.0 * a / b).clamp(0.0, 100.0) } else { 0.0 };
    (pct(used, total), pct(used, avail))
}

/// Process energy drawn at each step, kWh.
pub fn manufacturing_energy_per_step(sol: &PlanSolution, s: &Scenario) -> Vec<f64> {
    let h = &s.horizon;
    let dt = s.dt();
    (0..s.n_steps())
        .map(|t| {
            sol.map
                .units
                .iter()
                .enumerate()
                .map(|(u, unit)| {
                    let spec = &s.processes[unit.process];
                    let running: f64 = (0..spec.duration_steps)
                        .map(|lag| sol.get(VarKind::ProcessStart, u, h.lag(t, lag)))
                        .sum();
                    spec.power_per_unit * dt * running
                })
                .sum()
        })
        .collect()
}

/// Splits consumption into manufacturing and transport, each by source.
///
/// Manufacturing gets its process energy; transport gets the rest of the
/// step's grid draw (truck charging). At a step where parked batteries feed
/// the processes, the transport entry is negative; over the horizon it sums
/// to the trip energy.
pub fn attribute_energy(sol: &PlanSolution, s: &Scenario) -> EnergySplit {
    let dt = s.dt();
    let power = total_power(sol);
    let used = renewable_used(sol, s);
    let mfg = manufacturing_energy_per_step(sol, s);
    let mut out = EnergySplit::default();
    for t in 0..s.n_steps() {
        let e = power[t] * dt;
        if e <= 0.0 {
            continue;
        }
        let wind: f64 = (0..s.n_locations()).map(|i| s.wind(i, t)).sum();
        let solar: f64 = (0..s.n_locations()).map(|i| s.solar(i, t)).sum();
        let wind_share = if wind + solar > 0.0 { wind / (wind + solar) } else { 0.0 };
        let ren = used[t] * dt;
        let shares = [(e - ren) / e, ren * wind_share / e, ren * (1.0 - wind_share) / e];
        for (split, amount) in [(&mut out.manufacturing, mfg[t]), (&mut out.transport, e - mfg[t])] {
            split.nonrenewable += amount * shares[0];
            split.wind += amount * shares[1];
            split.solar += amount * shares[2];
        }
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Capacities at or below this are treated as not built.
const MIN_CAPACITY: f64 = 1e-6;

/// Trucks in transit per step, counting a trip for all of its travel steps.
pub fn trucks_in_transit(sol: &PlanSolution, s: &Scenario) -> Vec<f64> {
    let h = &s.horizon;
    (0..s.n_steps())
        .map(|t| {
            s.paths
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    (0..p.travel_steps)
                        .map(|lag| {
                            let d = h.lag(t, lag);
                            sol.get(VarKind::LoadedDispatch, k, d) + sol.get(VarKind::EmptyDispatch, k, d)
                        })
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Mean utilization of trucks (in transit / fleet), warehouses (stock /
/// capacity) and equipment (running units / installed), in percent.
pub fn utilization(sol: &PlanSolution, s: &Scenario) -> Utilization {
    let h = &s.horizon;
    let n = s.n_steps();
    let fleet = sol.get_fixed(VarKind::FleetSize, 0);
    let trucks = (fleet > MIN_CAPACITY)
        .then(|| mean(trucks_in_transit(sol, s).into_iter().map(|v| 100.0 * v / fleet)))
        .flatten();
    let warehouse = mean((0..s.n_locations()).filter_map(|i| {
        let w = sol.get_fixed(VarKind::WarehouseCap, i);
        (w > MIN_CAPACITY).then(|| {
            mean((0..n).map(|t| 100.0 * (sol.get(VarKind::Product, i, t) + sol.get(VarKind::Raw, i, t)) / w))
                .unwrap_or(0.0)
        })
    }));
    let equipment = mean(sol.map.units.iter().enumerate().filter_map(|(u, unit)| {
        let cap = sol.get_fixed(VarKind::EquipCap, u);
        let tau = s.processes[unit.process].duration_steps;
        (cap > MIN_CAPACITY).then(|| {
            mean((0..n).map(|t| {
                let running: f64 = (0..tau).map(|lag| sol.get(VarKind::ProcessStart, u, h.lag(t, lag))).sum();
                100.0 * running / cap
            }))
            .unwrap_or(0.0)
        })
    }));
    Utilization {
        trucks,
        warehouse,
        equipment,
    }
}

/// Running difference of cumulative consumption, `Σ_{τ≤t} (p_a − p_b)·Δt`
/// in kWh. Positive values mean `a` has consumed earlier than `b`.
pub fn cumulative_shift(a: &PlanSolution, b: &PlanSolution, step_hours: f64) -> Result<Vec<f64>, KpiError> {
    if a.n_steps() != b.n_steps() || a.map.location_ids != b.map.location_ids {
        return Err(KpiError::ShapeMismatch(format!(
            "{} vs {} steps, {} vs {} locations",
            a.n_steps(),
            b.n_steps(),
            a.map.location_ids.len(),
            b.map.location_ids.len()
        )));
    }
    let (pa, pb) = (total_power(a), total_power(b));
    let mut acc = 0.0;
    Ok(pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| {
            acc += (x - y) * step_hours;
            acc
        })
        .collect())
}

/// Longest run of consecutive steps over which the shift keeps one sign
/// (beyond `threshold` kWh), in steps.
pub fn longest_shift_run(shift: &[f64], threshold: f64) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut sign = 0;
    for &v in shift {
        let sg = if v > threshold {
            1
        } else if v < -threshold {
            -1
        } else {
            0
        };
        run = if sg != 0 && sg == sign { run + 1 } else { usize::from(sg != 0) };
        sign = sg;
        best = best.max(run);
    }
    best
}

/// Distance driven by all trucks, loaded and empty, in km.
pub fn total_distance(sol: &PlanSolution, s: &Scenario, distances_km: &[f64]) -> Result<f64, KpiError> {
    if distances_km.len() < s.paths.len() {
        return Err(KpiError::MissingDistance(s.path_label(distances_km.len())));
    }
    Ok(s.paths
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let trips: f64 = (0..s.n_steps())
                .map(|t| sol.get(VarKind::LoadedDispatch, k, t) + sol.get(VarKind::EmptyDispatch, k, t))
                .sum();
            trips * distances_km[k]
        })
        .sum())
}

pub fn kpi_report(sol: &PlanSolution, s: &Scenario) -> KpiReport {
    let (pct_demand, pct_avail) = renewable_fractions(sol, s);
    let dt = s.dt();
    let mut acc = 0.0;
    let cumulative = total_power(sol)
        .iter()
        .map(|p| {
            acc += p * dt;
            acc
        })
        .collect::<Vec<_>>();
    KpiReport {
        k_power: sol.meta.k_power,
        renewable_pct_of_demand: pct_demand,
        renewable_pct_of_available: pct_avail,
        energy_total_kwh: acc,
        energy: attribute_energy(sol, s),
        utilization: utilization(sol, s),
        costs: sol.breakdown,
        fleet_size: sol.get_fixed(VarKind::FleetSize, 0),
        warehouse_total_kg: (0..s.n_locations()).map(|i| sol.get_fixed(VarKind::WarehouseCap, i)).sum(),
        equipment_total: (0..sol.map.units.len()).map(|u| sol.get_fixed(VarKind::EquipCap, u)).sum(),
        total_distance_km: s.distances_km.as_ref().and_then(|d| total_distance(sol, s, d).ok()),
        cumulative_energy_kwh: cumulative,
    }
}

/// Plain-text table of headline KPIs, one row per labelled report.
pub fn format_table(rows: &[(String, &KpiReport)]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<14} {:>12} {:>10} {:>10} {:>10} {:>12} {:>14}",
        "run", "energy GWh", "ren % dem", "ren % av", "fleet", "equip units", "dist 10^3 km"
    )
    .unwrap();
    for (label, r) in rows {
        let dist = r.total_distance_km.map_or("-".to_string(), |d| format!("{:.1}", d / 1e3));
        writeln!(
            out,
            "{:<14} {:>12.3} {:>10.2} {:>10.2} {:>10.1} {:>12.2} {:>14}",
            label,
            r.energy_total_kwh / 1e6,
            r.renewable_pct_of_demand,
            r.renewable_pct_of_available,
            r.fleet_size,
            r.equipment_total,
            dist
        )
        .unwrap();
    }
    out
}

/// Writes `step,value` rows.
pub fn write_series_csv(path: &Path, header: &str, series: &[f64]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", header])?;
    for (t, v) in series.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_runs() {
        assert_eq!(longest_shift_run(&[0.0, 1.0, 2.0, 3.0, -1.0, -1.0], 0.5), 3);
        assert_eq!(longest_shift_run(&[0.0, 0.1], 0.5), 0);
        assert_eq!(longest_shift_run(&[-2.0, -2.0, 2.0], 0.5), 2);
    }

    #[test]
    fn mean_of_nothing_is_none() {
        assert_eq!(mean(std::iter::empty()), None);
        assert_eq!(mean([1.0, 3.0].into_iter()), Some(2.0));
    }
}
