//! Time-expanded linear program of the coupled supply chain.
//!
//! Every decision variable is addressed by a [`VariableKey`]; the
//! [`VariableMap`] turns keys into LP column indices and back. Rows carry a
//! [`RowTag`] naming the constraint family they belong to.

mod build;
mod lp;
mod validate;

pub use build::{build_lp, empty_truck_energy, objective_breakdown, ModelError, ObjectiveBreakdown};
pub use lp::{LinearProgram, Row, Sense};
pub use validate::{validate_solution, Tolerance, ValidationError, Violation};

use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Decision-variable families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    /// Accumulated charge at a location (kWh).
    Charge,
    /// Trucks parked at a location.
    StationaryTrucks,
    /// Finished product stored (kg).
    Product,
    /// Raw material stored (kg).
    Raw,
    /// Grid power drawn at a location (kW).
    Power,
    /// System-wide non-renewable power (kW).
    NonRenewable,
    /// Loaded trucks dispatched on a path.
    LoadedDispatch,
    /// Empty trucks dispatched on a path.
    EmptyDispatch,
    /// Process units started at a site.
    ProcessStart,
    /// Total fleet size.
    FleetSize,
    /// Warehouse capacity at a location (kg).
    WarehouseCap,
    /// Equipment capacity at a site (units).
    EquipCap,
}

impl VarKind {
    pub const ALL: [VarKind; 12] = [
        VarKind::Charge,
        VarKind::StationaryTrucks,
        VarKind::Product,
        VarKind::Raw,
        VarKind::Power,
        VarKind::NonRenewable,
        VarKind::LoadedDispatch,
        VarKind::EmptyDispatch,
        VarKind::ProcessStart,
        VarKind::FleetSize,
        VarKind::WarehouseCap,
        VarKind::EquipCap,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            VarKind::Charge => "C",
            VarKind::StationaryTrucks => "Y",
            VarKind::Product => "X",
            VarKind::Raw => "F",
            VarKind::Power => "p",
            VarKind::NonRenewable => "z",
            VarKind::LoadedDispatch => "y",
            VarKind::EmptyDispatch => "yp",
            VarKind::ProcessStart => "m",
            VarKind::FleetSize => "Yhat",
            VarKind::WarehouseCap => "W",
            VarKind::EquipCap => "M",
        }
    }

    /// File stem used when a solution is written to disk.
    pub fn file_stem(self) -> &'static str {
        match self {
            VarKind::Charge => "charge",
            VarKind::StationaryTrucks => "stationary_trucks",
            VarKind::Product => "product",
            VarKind::Raw => "raw",
            VarKind::Power => "power",
            VarKind::NonRenewable => "nonrenewable",
            VarKind::LoadedDispatch => "loaded_dispatch",
            VarKind::EmptyDispatch => "empty_dispatch",
            VarKind::ProcessStart => "process_start",
            VarKind::FleetSize => "fleet_size",
            VarKind::WarehouseCap => "warehouse_capacity",
            VarKind::EquipCap => "equipment_capacity",
        }
    }

    /// Whether the variable carries a step index.
    pub fn is_timed(self) -> bool {
        !matches!(self, VarKind::FleetSize | VarKind::WarehouseCap | VarKind::EquipCap)
    }

    /// Truck-count families (relaxed integers).
    pub fn is_truck(self) -> bool {
        matches!(
            self,
            VarKind::StationaryTrucks
                | VarKind::LoadedDispatch
                | VarKind::EmptyDispatch
                | VarKind::FleetSize
        )
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Address of one decision variable. `entity` indexes the family's entity
/// list: locations, paths, process sites, or 0 for system-wide variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableKey {
    pub kind: VarKind,
    pub entity: usize,
    pub step: Option<usize>,
}

impl VariableKey {
    pub fn at(kind: VarKind, entity: usize, step: usize) -> Self {
        VariableKey {
            kind,
            entity,
            step: Some(step),
        }
    }

    pub fn fixed(kind: VarKind, entity: usize) -> Self {
        VariableKey {
            kind,
            entity,
            step: None,
        }
    }
}

/// A process installed at a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessUnit {
    pub process: usize,
    pub location: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    offset: usize,
    entities: usize,
}

/// Bijection between [`VariableKey`]s and LP columns, plus the labels
/// needed to name entities in exports.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    n_steps: usize,
    blocks: [Option<Block>; 12],
    n_cols: usize,
    pub location_ids: Vec<String>,
    pub path_labels: Vec<String>,
    pub units: Vec<ProcessUnit>,
    pub unit_labels: Vec<String>,
}

impl VariableMap {
    /// Lays out the column space for a scenario. Truck families are omitted
    /// when the scenario has no paths.
    pub fn for_scenario(s: &Scenario) -> Self {
        let units: Vec<ProcessUnit> = s
            .processes
            .iter()
            .enumerate()
            .flat_map(|(p, spec)| {
                spec.sites.iter().map(move |&location| ProcessUnit {
                    process: p,
                    location,
                })
            })
            .collect();
        let unit_labels = units
            .iter()
            .map(|u| format!("{}@{}", s.processes[u.process].id, s.locations[u.location].id))
            .collect();
        let has_trucks = !s.paths.is_empty();
        let n_loc = s.n_locations();
        let mut entities = [0usize; 12];
        for kind in VarKind::ALL {
            entities[kind.slot()] = match kind {
                VarKind::Charge | VarKind::Product | VarKind::Raw | VarKind::Power => n_loc,
                VarKind::WarehouseCap => n_loc,
                VarKind::StationaryTrucks => {
                    if has_trucks {
                        n_loc
                    } else {
                        0
                    }
                }
                VarKind::NonRenewable => 1,
                VarKind::LoadedDispatch | VarKind::EmptyDispatch => s.paths.len(),
                VarKind::FleetSize => usize::from(has_trucks),
                VarKind::ProcessStart | VarKind::EquipCap => units.len(),
            };
        }
        Self::with_entities(
            s.n_steps(),
            entities,
            s.locations.iter().map(|l| l.id.clone()).collect(),
            (0..s.paths.len()).map(|k| s.path_label(k)).collect(),
            units,
            unit_labels,
        )
    }

    fn with_entities(
        n_steps: usize,
        entities: [usize; 12],
        location_ids: Vec<String>,
        path_labels: Vec<String>,
        units: Vec<ProcessUnit>,
        unit_labels: Vec<String>,
    ) -> Self {
        let mut blocks = [None; 12];
        let mut offset = 0;
        for kind in VarKind::ALL {
            let e = entities[kind.slot()];
            if e == 0 {
                continue;
            }
            blocks[kind.slot()] = Some(Block { offset, entities: e });
            offset += e * if kind.is_timed() { n_steps } else { 1 };
        }
        VariableMap {
            n_steps,
            blocks,
            n_cols: offset,
            location_ids,
            path_labels,
            units,
            unit_labels,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn has(&self, kind: VarKind) -> bool {
        self.blocks[kind.slot()].is_some()
    }

    pub fn entity_count(&self, kind: VarKind) -> usize {
        self.blocks[kind.slot()].map_or(0, |b| b.entities)
    }

    pub fn kinds(&self) -> impl Iterator<Item = VarKind> + '_ {
        VarKind::ALL.into_iter().filter(|k| self.has(*k))
    }

    /// Column of a key, or `None` when the family is absent or the key is out of range.
    pub fn col(&self, key: VariableKey) -> Option<usize> {
        let b = self.blocks[key.kind.slot()]?;
        if key.entity >= b.entities {
            return None;
        }
        match (key.kind.is_timed(), key.step) {
            (true, Some(t)) if t < self.n_steps => Some(b.offset + key.entity * self.n_steps + t),
            (false, None) => Some(b.offset + key.entity),
            _ => None,
        }
    }

    /// Inverse of [`VariableMap::col`].
    pub fn key(&self, col: usize) -> Option<VariableKey> {
        if col >= self.n_cols {
            return None;
        }
        VarKind::ALL.into_iter().rev().find_map(|kind| {
            let b = self.blocks[kind.slot()]?;
            if col < b.offset {
                return None;
            }
            let rel = col - b.offset;
            Some(if kind.is_timed() {
                VariableKey::at(kind, rel / self.n_steps, rel % self.n_steps)
            } else {
                VariableKey::fixed(kind, rel)
            })
        })
    }

    pub fn entity_label(&self, kind: VarKind, entity: usize) -> &str {
        match kind {
            VarKind::LoadedDispatch | VarKind::EmptyDispatch => &self.path_labels[entity],
            VarKind::ProcessStart | VarKind::EquipCap => &self.unit_labels[entity],
            VarKind::NonRenewable | VarKind::FleetSize => "system",
            _ => &self.location_ids[entity],
        }
    }

    /// Column name in the `kind[entity][step]` layout used by exports.
    pub fn name(&self, col: usize) -> String {
        let key = self.key(col).expect("column in range");
        let sym = key.kind.symbol();
        match (key.kind, key.step) {
            (VarKind::NonRenewable, Some(t)) => format!("{sym}[{t}]"),
            (VarKind::FleetSize, None) => sym.to_string(),
            (_, Some(t)) => format!("{sym}[{}][{t}]", self.entity_label(key.kind, key.entity)),
            (_, None) => format!("{sym}[{}]", self.entity_label(key.kind, key.entity)),
        }
    }
}

/// Constraint families of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    ChargeBalance,
    TruckBalance,
    ProductBalance,
    RawBalance,
    ChargeRate,
    ChargeCapacity,
    WarehouseCapacity,
    FleetSize,
    EquipmentCapacity,
    /// Charge balance at the first step, closing the horizon on the final charge.
    ChargePeriodic,
    /// Product balance at the first step, closing the horizon on the final stock.
    ProductPeriodic,
    CopperPlate,
    /// Lower bound of zero on a decision variable.
    Nonnegativity,
    /// Stored energy update of the stand-alone battery.
    BatteryBalance,
    /// Stored energy within the installed battery capacity.
    BatteryCapacity,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::ChargeBalance => "charge-balance",
            Constraint::TruckBalance => "truck-balance",
            Constraint::ProductBalance => "product-balance",
            Constraint::RawBalance => "raw-balance",
            Constraint::ChargeRate => "charge-rate",
            Constraint::ChargeCapacity => "charge-capacity",
            Constraint::WarehouseCapacity => "warehouse-capacity",
            Constraint::FleetSize => "fleet-size",
            Constraint::EquipmentCapacity => "equipment-capacity",
            Constraint::ChargePeriodic => "charge-periodic",
            Constraint::ProductPeriodic => "product-periodic",
            Constraint::CopperPlate => "copper-plate",
            Constraint::Nonnegativity => "nonnegativity",
            Constraint::BatteryBalance => "battery-balance",
            Constraint::BatteryCapacity => "battery-capacity",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Provenance of one LP row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowTag {
    pub constraint: Constraint,
    /// Location id, process unit label or `system`.
    pub entity: String,
    pub step: Option<usize>,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.constraint, self.entity)?;
        if let Some(t) = self.step {
            write!(f, "[{t}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_map(n_steps: usize, n_loc: usize, n_paths: usize, n_units: usize) -> VariableMap {
        let mut entities = [0; 12];
        for kind in VarKind::ALL {
            entities[kind.slot()] = match kind {
                VarKind::NonRenewable | VarKind::FleetSize => 1,
                VarKind::LoadedDispatch | VarKind::EmptyDispatch => n_paths,
                VarKind::ProcessStart | VarKind::EquipCap => n_units,
                _ => n_loc,
            };
        }
        VariableMap::with_entities(
            n_steps,
            entities,
            (0..n_loc).map(|i| format!("L{i}")).collect(),
            (0..n_paths).map(|k| format!("P{k}")).collect(),
            (0..n_units)
                .map(|u| ProcessUnit {
                    process: 0,
                    location: u % n_loc,
                })
                .collect(),
            (0..n_units).map(|u| format!("U{u}")).collect(),
        )
    }

    proptest! {
        #[test]
        fn column_map_is_a_bijection(n_steps in 1usize..6, n_loc in 1usize..4, n_paths in 0usize..4, n_units in 0usize..3) {
            let map = sample_map(n_steps, n_loc, n_paths, n_units);
            let mut seen = vec![false; map.n_cols()];
            for col in 0..map.n_cols() {
                let key = map.key(col).unwrap();
                prop_assert_eq!(map.col(key), Some(col));
                prop_assert!(!std::mem::replace(&mut seen[key_col(&map, key)], true));
            }
            prop_assert!(map.key(map.n_cols()).is_none());
        }
    }

    fn key_col(map: &VariableMap, key: VariableKey) -> usize {
        map.col(key).unwrap()
    }

    #[test]
    fn names_follow_kind_entity_step() {
        let map = sample_map(3, 2, 1, 1);
        let c = map.col(VariableKey::at(VarKind::Charge, 1, 2)).unwrap();
        assert_eq!(map.name(c), "C[L1][2]");
        let z = map.col(VariableKey::at(VarKind::NonRenewable, 0, 1)).unwrap();
        assert_eq!(map.name(z), "z[1]");
        let yhat = map.col(VariableKey::fixed(VarKind::FleetSize, 0)).unwrap();
        assert_eq!(map.name(yhat), "Yhat");
        let m = map.col(VariableKey::fixed(VarKind::EquipCap, 0)).unwrap();
        assert_eq!(map.name(m), "M[U0]");
    }

    #[test]
    fn mismatched_step_shape_has_no_column() {
        let map = sample_map(3, 2, 1, 1);
        assert!(map.col(VariableKey::fixed(VarKind::Charge, 0)).is_none());
        assert!(map.col(VariableKey::at(VarKind::FleetSize, 0, 0)).is_none());
        assert!(map.col(VariableKey::at(VarKind::Charge, 0, 3)).is_none());
        assert!(map.col(VariableKey::at(VarKind::Charge, 2, 0)).is_none());
    }
}
