//! Arithmetic re-check of a plan against the scenario.
//!
//! Residuals are recomputed directly from the scenario data and the solution
//! trajectories, without going through the LP rows, so this doubles as an
//! independent check on [`build_lp`](super::build_lp).

use super::{empty_truck_energy, Constraint, VarKind};
use crate::scenario::Scenario;
use crate::solve::PlanSolution;
use serde::Serialize;

/// Feasibility tolerance: a residual is a violation when it exceeds
/// `max(abs, rel * scale)`, where `scale` is the largest term in the row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Tolerance { rel, abs: 1e-4 }
    }

    fn allows(&self, residual: f64, scale: f64) -> bool {
        residual <= self.abs.max(self.rel * scale.max(1.0))
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-6)
    }
}

/// One violated constraint instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub entity: String,
    pub step: Option<usize>,
    pub magnitude: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("solution does not match scenario dimensions: {0}")]
pub struct ValidationError(pub String);

struct Checker {
    tol: Tolerance,
    out: Vec<Violation>,
}

impl Checker {
    /// Records an equality residual given its terms (summed to the residual).
    fn equality(&mut self, c: Constraint, entity: &str, step: Option<usize>, terms: &[f64]) {
        let residual: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !self.tol.allows(residual.abs(), scale) {
            self.push(c, entity, step, residual.abs());
        }
    }

    /// Records a `sum(terms) <= 0` residual.
    fn at_most_zero(&mut self, c: Constraint, entity: &str, step: Option<usize>, terms: &[f64]) {
        let lhs: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if lhs > 0.0 && !self.tol.allows(lhs, scale) {
            self.push(c, entity, step, lhs);
        }
    }

    fn push(&mut self, constraint: Constraint, entity: &str, step: Option<usize>, magnitude: f64) {
        self.out.push(Violation {
            constraint,
            entity: entity.to_string(),
            step,
            magnitude,
        });
    }
}

/// Lists every constraint the plan violates beyond `tol`. An empty list
/// means the plan is feasible for the scenario.
pub fn validate_solution(
    s: &Scenario,
    sol: &PlanSolution,
    tol: Tolerance,
) -> Result<Vec<Violation>, ValidationError> {
    let map = &sol.map;
    let n = s.n_steps();
    let n_loc = s.n_locations();
    if map.n_steps() != n
        || map.location_ids.len() != n_loc
        || map.path_labels.len() != s.paths.len()
        || map.entity_count(VarKind::ProcessStart)
            != s.processes.iter().map(|p| p.sites.len()).sum::<usize>()
        || sol.values.len() != map.n_cols()
    {
        return Err(ValidationError(format!(
            "solution has {} steps, {} locations, {} paths; scenario has {n}, {n_loc}, {}",
            map.n_steps(),
            map.location_ids.len(),
            map.path_labels.len(),
            s.paths.len()
        )));
    }

    let h = &s.horizon;
    let dt = s.dt();
    let truck = &s.truck;
    let theta = truck.theta();
    let mut ck = Checker {
        tol,
        out: Vec::new(),
    };
    let g = |kind, e, t| sol.get(kind, e, t);

    for col in 0..map.n_cols() {
        let v = sol.values[col];
        if v < 0.0 && !tol.allows(-v, 1.0) {
            let key = map.key(col).expect("column in range");
            ck.push(
                Constraint::Nonnegativity,
                &map.name(col),
                key.step,
                -v,
            );
        }
    }

    for i in 0..n_loc {
        let id = s.locations[i].id.as_str();
        let units: Vec<usize> = (0..map.units.len()).filter(|&u| map.units[u].location == i).collect();
        for t in 0..n {
            let prev = h.lag(t, 1);

            let mut terms = vec![g(VarKind::Charge, i, t), -g(VarKind::Charge, i, prev), -dt * g(VarKind::Power, i, t)];
            for &u in &units {
                let spec = &s.processes[map.units[u].process];
                let running: f64 = (0..spec.duration_steps)
                    .map(|lag| g(VarKind::ProcessStart, u, h.lag(t, lag)))
                    .sum();
                terms.push(dt * spec.power_per_unit * running);
            }
            for (k, p) in s.paths.iter().enumerate().filter(|(_, p)| p.origin == i) {
                terms.push(p.energy_kwh * g(VarKind::LoadedDispatch, k, t));
                terms.push(empty_truck_energy(p, theta) * g(VarKind::EmptyDispatch, k, t));
            }
            let c = if t == 0 { Constraint::ChargePeriodic } else { Constraint::ChargeBalance };
            ck.equality(c, id, Some(t), &terms);

            if !s.paths.is_empty() {
                let mut terms = vec![g(VarKind::StationaryTrucks, i, t), -g(VarKind::StationaryTrucks, i, prev)];
                for (k, p) in s.paths.iter().enumerate() {
                    if p.origin == i {
                        terms.push(g(VarKind::LoadedDispatch, k, t) + g(VarKind::EmptyDispatch, k, t));
                    }
                    if p.dest == i {
                        let dep = h.lag(t, p.travel_steps);
                        terms.push(-(g(VarKind::LoadedDispatch, k, dep) + g(VarKind::EmptyDispatch, k, dep)));
                    }
                }
                ck.equality(Constraint::TruckBalance, id, Some(t), &terms);
            }

            let mut terms = vec![g(VarKind::Product, i, t), -g(VarKind::Product, i, prev), -s.q(i, t)];
            for (k, p) in s.paths.iter().enumerate() {
                if p.origin == i {
                    terms.push(truck.load_kg * g(VarKind::LoadedDispatch, k, t));
                }
                if p.dest == i {
                    terms.push(-truck.load_kg * g(VarKind::LoadedDispatch, k, h.lag(t, p.travel_steps)));
                }
            }
            for &u in &units {
                let spec = &s.processes[map.units[u].process];
                terms.push(-spec.output_per_unit * g(VarKind::ProcessStart, u, h.lag(t, spec.duration_steps)));
            }
            let c = if t == 0 { Constraint::ProductPeriodic } else { Constraint::ProductBalance };
            ck.equality(c, id, Some(t), &terms);

            let prev_raw = if t == 0 { 0.0 } else { g(VarKind::Raw, i, t - 1) };
            let mut terms = vec![g(VarKind::Raw, i, t), -prev_raw, -s.raw_arrivals(i, t)];
            for &u in &units {
                let spec = &s.processes[map.units[u].process];
                terms.push(spec.raw_per_unit * g(VarKind::ProcessStart, u, t));
            }
            ck.equality(Constraint::RawBalance, id, Some(t), &terms);

            let rate = dt / truck.full_charge_hours * truck.battery_kwh;
            ck.at_most_zero(
                Constraint::ChargeRate,
                id,
                Some(t),
                &[
                    g(VarKind::Charge, i, t),
                    -g(VarKind::Charge, i, prev),
                    -rate * g(VarKind::StationaryTrucks, i, prev),
                ],
            );
            ck.at_most_zero(
                Constraint::ChargeCapacity,
                id,
                Some(t),
                &[g(VarKind::Charge, i, t), -truck.battery_kwh * g(VarKind::StationaryTrucks, i, t)],
            );
            ck.at_most_zero(
                Constraint::WarehouseCapacity,
                id,
                Some(t),
                &[
                    g(VarKind::Product, i, t),
                    g(VarKind::Raw, i, t),
                    -sol.get_fixed(VarKind::WarehouseCap, i),
                ],
            );
        }
    }

    for t in 0..n {
        if !s.paths.is_empty() {
            let mut terms: Vec<f64> = (0..n_loc).map(|i| g(VarKind::StationaryTrucks, i, t)).collect();
            for (k, p) in s.paths.iter().enumerate() {
                for lag in 0..p.travel_steps {
                    let d = h.lag(t, lag);
                    terms.push(g(VarKind::LoadedDispatch, k, d) + g(VarKind::EmptyDispatch, k, d));
                }
            }
            terms.push(-sol.get_fixed(VarKind::FleetSize, 0));
            ck.at_most_zero(Constraint::FleetSize, "system", Some(t), &terms);
        }
        for (u, unit) in map.units.iter().enumerate() {
            let spec = &s.processes[unit.process];
            let mut terms: Vec<f64> = (0..spec.duration_steps)
                .map(|lag| g(VarKind::ProcessStart, u, h.lag(t, lag)))
                .collect();
            terms.push(-sol.get_fixed(VarKind::EquipCap, u));
            ck.at_most_zero(Constraint::EquipmentCapacity, &map.unit_labels[u], Some(t), &terms);
        }
        let mut terms: Vec<f64> = (0..n_loc).map(|i| g(VarKind::Power, i, t)).collect();
        terms.push(-s.renewable_total(t));
        terms.push(-g(VarKind::NonRenewable, 0, t));
        ck.at_most_zero(Constraint::CopperPlate, "system", Some(t), &terms);
    }

    Ok(ck.out)
}
