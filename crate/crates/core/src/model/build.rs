use super::{Constraint, LinearProgram, RowTag, Sense, VarKind, VariableKey, VariableMap};
use crate::scenario::{Path, Scenario};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(
        "demand of {demand:.3} kg exceeds imports plus maximum production of {supply:.3} kg \
         (product-balance / raw-balance cannot close)"
    )]
    InsufficientSupply { demand: f64, supply: f64 },
    #[error("malformed LP: {0}")]
    Malformed(String),
}

/// Energy an empty truck uses on `path`: the loaded energy scaled by the
/// empty/loaded weight ratio.
pub fn empty_truck_energy(path: &Path, theta: f64) -> f64 {
    theta * path.energy_kwh
}

/// Objective split into its capital and operating terms ($ over the horizon).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub capex_truck: f64,
    pub capex_warehouse: f64,
    pub capex_equipment: f64,
    pub opex_nonrenewable_penalty: f64,
    pub opex_base_energy: f64,
}

impl ObjectiveBreakdown {
    pub fn total(&self) -> f64 {
        self.capex_truck
            + self.capex_warehouse
            + self.capex_equipment
            + self.opex_nonrenewable_penalty
            + self.opex_base_energy
    }

    pub fn capex(&self) -> f64 {
        self.capex_truck + self.capex_warehouse + self.capex_equipment
    }
}

/// Cost terms for a column vector laid out by `map`.
pub fn objective_breakdown(s: &Scenario, map: &VariableMap, x: &[f64]) -> ObjectiveBreakdown {
    let horizon_hours = s.horizon.total_hours();
    let dt = s.dt();
    let val = |key| map.col(key).map_or(0.0, |c| x[c]);
    let mut b = ObjectiveBreakdown::default();
    if map.has(VarKind::FleetSize) {
        b.capex_truck = horizon_hours * s.costs.k_truck * val(VariableKey::fixed(VarKind::FleetSize, 0));
    }
    b.capex_warehouse = horizon_hours
        * (0..s.n_locations())
            .map(|i| s.costs.k_store[i] * val(VariableKey::fixed(VarKind::WarehouseCap, i)))
            .sum::<f64>();
    b.capex_equipment = horizon_hours
        * map
            .units
            .iter()
            .enumerate()
            .map(|(u, unit)| s.costs.k_equip[unit.process] * val(VariableKey::fixed(VarKind::EquipCap, u)))
            .sum::<f64>();
    let n = s.n_steps();
    b.opex_nonrenewable_penalty = s.costs.k_power
        * dt
        * (0..n).map(|t| val(VariableKey::at(VarKind::NonRenewable, 0, t))).sum::<f64>();
    b.opex_base_energy = s.costs.epsilon
        * dt
        * (0..s.n_locations())
            .flat_map(|i| (0..n).map(move |t| (i, t)))
            .map(|(i, t)| val(VariableKey::at(VarKind::Power, i, t)))
            .sum::<f64>();
    b
}

/// Builds the relaxed planning LP for a scenario.
///
/// All lagged indices (previous step, travel time, process duration) wrap
/// cyclically, so the stored product, charge and truck positions at the end
/// of the horizon feed the first step. Raw material starts empty.
pub fn build_lp(s: &Scenario) -> Result<LinearProgram, ModelError> {
    let demand = s.total_demand();
    let supply = s.total_imports() + s.max_production();
    if demand > supply * (1.0 + 1e-12) + 1e-9 {
        return Err(ModelError::InsufficientSupply { demand, supply });
    }

    let map = VariableMap::for_scenario(s);
    let mut lp = LinearProgram::new(map.clone());
    lp.k_power = s.costs.k_power;
    let h = &s.horizon;
    let n = h.n_steps;
    let dt = s.dt();
    let n_loc = s.n_locations();
    let truck = &s.truck;
    let theta = truck.theta();
    let has_trucks = map.has(VarKind::StationaryTrucks);
    let col = |kind, e, t| map.col(VariableKey::at(kind, e, t)).expect("timed column");
    let fixed = |kind, e| map.col(VariableKey::fixed(kind, e)).expect("static column");
    let tag = |constraint, entity: &str, step| RowTag {
        constraint,
        entity: entity.to_string(),
        step,
    };

    // Objective.
    let horizon_hours = h.total_hours();
    if has_trucks {
        lp.objective[fixed(VarKind::FleetSize, 0)] = horizon_hours * s.costs.k_truck;
    }
    for i in 0..n_loc {
        lp.objective[fixed(VarKind::WarehouseCap, i)] = horizon_hours * s.costs.k_store[i];
        for t in 0..n {
            lp.objective[col(VarKind::Power, i, t)] = s.costs.epsilon * dt;
        }
    }
    for (u, unit) in map.units.iter().enumerate() {
        lp.objective[fixed(VarKind::EquipCap, u)] = horizon_hours * s.costs.k_equip[unit.process];
    }
    for t in 0..n {
        lp.objective[col(VarKind::NonRenewable, 0, t)] = s.costs.k_power * dt;
    }

    let outgoing: Vec<Vec<usize>> = (0..n_loc)
        .map(|i| (0..s.paths.len()).filter(|&k| s.paths[k].origin == i).collect())
        .collect();
    let incoming: Vec<Vec<usize>> = (0..n_loc)
        .map(|i| (0..s.paths.len()).filter(|&k| s.paths[k].dest == i).collect())
        .collect();
    let units_at: Vec<Vec<usize>> = (0..n_loc)
        .map(|i| (0..map.units.len()).filter(|&u| map.units[u].location == i).collect())
        .collect();

    for i in 0..n_loc {
        let id = s.locations[i].id.as_str();
        for t in 0..n {
            let prev = h.lag(t, 1);

            // Charge balance: grid energy in, process and departure energy out.
            let mut row = vec![(col(VarKind::Charge, i, t), 1.0), (col(VarKind::Charge, i, prev), -1.0)];
            row.push((col(VarKind::Power, i, t), -dt));
            for &u in &units_at[i] {
                let spec = &s.processes[map.units[u].process];
                for lag in 0..spec.duration_steps {
                    row.push((col(VarKind::ProcessStart, u, h.lag(t, lag)), dt * spec.power_per_unit));
                }
            }
            for &k in &outgoing[i] {
                let p = &s.paths[k];
                row.push((col(VarKind::LoadedDispatch, k, t), p.energy_kwh));
                row.push((col(VarKind::EmptyDispatch, k, t), empty_truck_energy(p, theta)));
            }
            let c = if t == 0 {
                Constraint::ChargePeriodic
            } else {
                Constraint::ChargeBalance
            };
            lp.push_row(tag(c, id, Some(t)), Sense::Eq, 0.0, row);

            // Truck balance.
            if has_trucks {
                let mut row = vec![
                    (col(VarKind::StationaryTrucks, i, t), 1.0),
                    (col(VarKind::StationaryTrucks, i, prev), -1.0),
                ];
                for &k in &outgoing[i] {
                    row.push((col(VarKind::LoadedDispatch, k, t), 1.0));
                    row.push((col(VarKind::EmptyDispatch, k, t), 1.0));
                }
                for &k in &incoming[i] {
                    let dep = h.lag(t, s.paths[k].travel_steps);
                    row.push((col(VarKind::LoadedDispatch, k, dep), -1.0));
                    row.push((col(VarKind::EmptyDispatch, k, dep), -1.0));
                }
                lp.push_row(tag(Constraint::TruckBalance, id, Some(t)), Sense::Eq, 0.0, row);
            }

            // Product balance.
            let mut row = vec![(col(VarKind::Product, i, t), 1.0), (col(VarKind::Product, i, prev), -1.0)];
            for &k in &outgoing[i] {
                row.push((col(VarKind::LoadedDispatch, k, t), truck.load_kg));
            }
            for &k in &incoming[i] {
                let dep = h.lag(t, s.paths[k].travel_steps);
                row.push((col(VarKind::LoadedDispatch, k, dep), -truck.load_kg));
            }
            for &u in &units_at[i] {
                let spec = &s.processes[map.units[u].process];
                row.push((col(VarKind::ProcessStart, u, h.lag(t, spec.duration_steps)), -spec.output_per_unit));
            }
            let c = if t == 0 {
                Constraint::ProductPeriodic
            } else {
                Constraint::ProductBalance
            };
            lp.push_row(tag(c, id, Some(t)), Sense::Eq, s.q(i, t), row);

            // Raw material balance, starting from an empty store.
            let mut row = vec![(col(VarKind::Raw, i, t), 1.0)];
            if t > 0 {
                row.push((col(VarKind::Raw, i, t - 1), -1.0));
            }
            for &u in &units_at[i] {
                let spec = &s.processes[map.units[u].process];
                row.push((col(VarKind::ProcessStart, u, t), spec.raw_per_unit));
            }
            lp.push_row(tag(Constraint::RawBalance, id, Some(t)), Sense::Eq, s.raw_arrivals(i, t), row);

            // Charging rate limited by the trucks parked in the previous step.
            let mut row = vec![(col(VarKind::Charge, i, t), 1.0), (col(VarKind::Charge, i, prev), -1.0)];
            if has_trucks {
                row.push((
                    col(VarKind::StationaryTrucks, i, prev),
                    -dt / truck.full_charge_hours * truck.battery_kwh,
                ));
            }
            lp.push_row(tag(Constraint::ChargeRate, id, Some(t)), Sense::Le, 0.0, row);

            // Stored charge fits in the parked batteries.
            let mut row = vec![(col(VarKind::Charge, i, t), 1.0)];
            if has_trucks {
                row.push((col(VarKind::StationaryTrucks, i, t), -truck.battery_kwh));
            }
            lp.push_row(tag(Constraint::ChargeCapacity, id, Some(t)), Sense::Le, 0.0, row);

            // Warehouse holds product and raw material.
            lp.push_row(
                tag(Constraint::WarehouseCapacity, id, Some(t)),
                Sense::Le,
                0.0,
                vec![
                    (col(VarKind::Product, i, t), 1.0),
                    (col(VarKind::Raw, i, t), 1.0),
                    (fixed(VarKind::WarehouseCap, i), -1.0),
                ],
            );
        }
    }

    for t in 0..n {
        if has_trucks {
            // Parked plus in-transit trucks within the fleet.
            let mut row: Vec<(usize, f64)> = (0..n_loc).map(|i| (col(VarKind::StationaryTrucks, i, t), 1.0)).collect();
            for (k, p) in s.paths.iter().enumerate() {
                for lag in 0..p.travel_steps {
                    let d = h.lag(t, lag);
                    row.push((col(VarKind::LoadedDispatch, k, d), 1.0));
                    row.push((col(VarKind::EmptyDispatch, k, d), 1.0));
                }
            }
            row.push((fixed(VarKind::FleetSize, 0), -1.0));
            lp.push_row(tag(Constraint::FleetSize, "system", Some(t)), Sense::Le, 0.0, row);
        }

        for (u, unit) in map.units.iter().enumerate() {
            let spec = &s.processes[unit.process];
            let mut row: Vec<(usize, f64)> = (0..spec.duration_steps)
                .map(|lag| (col(VarKind::ProcessStart, u, h.lag(t, lag)), 1.0))
                .collect();
            row.push((fixed(VarKind::EquipCap, u), -1.0));
            lp.push_row(
                tag(Constraint::EquipmentCapacity, &map.unit_labels[u], Some(t)),
                Sense::Le,
                0.0,
                row,
            );
        }

        let mut row: Vec<(usize, f64)> = (0..n_loc).map(|i| (col(VarKind::Power, i, t), 1.0)).collect();
        row.push((col(VarKind::NonRenewable, 0, t), -1.0));
        lp.push_row(tag(Constraint::CopperPlate, "system", Some(t)), Sense::Le, s.renewable_total(t), row);
    }

    lp.check_well_formed().map_err(ModelError::Malformed)?;
    Ok(lp)
}
