//! Problem instances: network, fleet and process parameters, costs and the
//! exogenous time series that drive a planning run.
//!
//! A [`Scenario`] is validated once on construction and is immutable
//! afterwards, so it can be shared freely between concurrent solves.

mod io;
pub mod params;

pub use io::{load_scenario, save_scenario, ScenarioConfig};
pub use params::{
    carbon_tax_to_penalty, cement_process_params, levelize, warehouse_cost_per_kg_hour,
    ProcessEnergy, DEFAULT_EMISSION_FACTOR, DEFAULT_EPSILON, HOURS_PER_YEAR, PUBLISHED_KILN_ENERGY_KWH,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Errors raised while loading or validating a scenario.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("{file}: schema mismatch: {detail}")]
    Schema { file: String, detail: String },
    #[error("invalid {field}{}: {reason}", .row.map(|r| format!(" (row {r})")).unwrap_or_default())]
    Invariant {
        field: String,
        row: Option<usize>,
        reason: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Invariant {
            field: field.into(),
            row: None,
            reason: reason.into(),
        }
    }

    /// `index` is the 0-based record index; it is reported as a 1-based data row.
    pub(crate) fn at_row(field: impl Into<String>, index: usize, reason: impl Into<String>) -> Self {
        ScenarioError::Invariant {
            field: field.into(),
            row: Some(index + 1),
            reason: reason.into(),
        }
    }
}

/// Discretisation of the planning horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub n_steps: usize,
    pub step_hours: f64,
}

impl Horizon {
    pub fn new(n_steps: usize, step_hours: f64) -> Result<Self, ScenarioError> {
        let h = Horizon {
            n_steps,
            step_hours,
        };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_steps == 0 {
            return Err(ScenarioError::invariant("horizon.n_steps", "must be at least 1"));
        }
        if !(self.step_hours > 0.0 && self.step_hours.is_finite()) {
            return Err(ScenarioError::invariant(
                "horizon.step_hours",
                "must be positive and finite",
            ));
        }
        Ok(())
    }

    pub fn total_hours(&self) -> f64 {
        self.n_steps as f64 * self.step_hours
    }

    /// Number of steps in one week, at least 1.
    pub fn steps_per_week(&self) -> usize {
        ((168.0 / self.step_hours).round() as usize).max(1)
    }

    /// Index `t - lag` wrapped onto the cyclic horizon.
    #[inline]
    pub fn lag(&self, t: usize, lag: usize) -> usize {
        let n = self.n_steps;
        (t + n - lag % n) % n
    }
}

/// A city or site in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: String,
    pub name: String,
    /// Wind nameplate capacity in MW.
    pub wind_mw: f64,
    /// Solar nameplate capacity in MW.
    pub solar_mw: f64,
}

impl Location {
    pub fn wind_kw(&self) -> f64 {
        self.wind_mw * 1000.0
    }

    pub fn solar_kw(&self) -> f64 {
        self.solar_mw * 1000.0
    }
}

/// A directed origin-destination pair a truck can drive on one charge.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub origin: usize,
    pub dest: usize,
    pub travel_steps: usize,
    /// Energy used by a loaded truck on this path (kWh).
    pub energy_kwh: f64,
}

/// Electric truck parameters. Every field is required; there is no default
/// empty weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruckSpec {
    pub battery_kwh: f64,
    pub load_kg: f64,
    pub empty_weight_kg: f64,
    pub full_charge_hours: f64,
    pub unit_cost: f64,
    pub lifetime_years: f64,
}

impl TruckSpec {
    /// Ratio of empty to loaded truck weight; scales the energy of an empty trip.
    pub fn theta(&self) -> f64 {
        self.empty_weight_kg / (self.empty_weight_kg + self.load_kg)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let fields = [
            ("truck.battery_kwh", self.battery_kwh),
            ("truck.load_kg", self.load_kg),
            ("truck.empty_weight_kg", self.empty_weight_kg),
            ("truck.full_charge_hours", self.full_charge_hours),
            ("truck.unit_cost", self.unit_cost),
            ("truck.lifetime_years", self.lifetime_years),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScenarioError::invariant(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// A single-stage manufacturing process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub id: String,
    pub duration_steps: usize,
    /// Power drawn per unit while running (kW).
    pub power_per_unit: f64,
    /// Finished product per unit (kg).
    pub output_per_unit: f64,
    /// Raw material consumed per unit (kg).
    pub raw_per_unit: f64,
    pub equip_unit_cost: f64,
    pub equip_lifetime_years: f64,
    /// Location indices where equipment for this process may be installed.
    pub sites: Vec<usize>,
}

/// Cost coefficients of the objective. Capital rates are levelized per hour.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBook {
    /// $/truck/h.
    pub k_truck: f64,
    /// $/(kg h) per location.
    pub k_store: Vec<f64>,
    /// $/(unit h) per process.
    pub k_equip: Vec<f64>,
    /// Penalty on non-renewable energy, $/kWh.
    pub k_power: f64,
    /// Base cost on all consumed energy, $/kWh.
    pub epsilon: f64,
    /// Levelized battery cost, $/(kWh h).
    pub k_batt: f64,
    /// kg CO2 per kWh of non-renewable energy.
    pub emission_factor: f64,
}

/// How finished-product demand deadlines are placed on the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandClearing {
    PerStep,
    Weekly,
    Monthly,
}

impl fmt::Display for DemandClearing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DemandClearing::PerStep => "per-step",
            DemandClearing::Weekly => "weekly",
            DemandClearing::Monthly => "monthly",
        })
    }
}

impl std::str::FromStr for DemandClearing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-step" | "per_step" | "step" => Ok(DemandClearing::PerStep),
            "weekly" => Ok(DemandClearing::Weekly),
            "monthly" => Ok(DemandClearing::Monthly),
            other => Err(format!("unknown demand clearing '{other}'")),
        }
    }
}

/// Dense `(location, step)` table.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTable {
    n_steps: usize,
    data: Vec<f64>,
}

impl StepTable {
    pub fn zeros(n_locations: usize, n_steps: usize) -> Self {
        StepTable {
            n_steps,
            data: vec![0.0; n_locations * n_steps],
        }
    }

    #[inline]
    pub fn get(&self, loc: usize, t: usize) -> f64 {
        self.data[loc * self.n_steps + t]
    }

    #[inline]
    pub fn set(&mut self, loc: usize, t: usize, v: f64) {
        self.data[loc * self.n_steps + t] = v;
    }

    pub fn row(&self, loc: usize) -> &[f64] {
        &self.data[loc * self.n_steps..(loc + 1) * self.n_steps]
    }

    pub fn n_locations(&self) -> usize {
        if self.n_steps == 0 {
            0
        } else {
            self.data.len() / self.n_steps
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }
}

/// Exogenous inputs over the horizon, as supplied (before demand clearing).
#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousSeries {
    /// Signed product injection in kg: positive imports, negative demand.
    pub product_injection: StepTable,
    /// Raw material arriving, kg.
    pub raw_arrivals: StepTable,
    pub wind_cf: StepTable,
    pub solar_cf: StepTable,
}

/// A validated problem instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub horizon: Horizon,
    pub locations: Vec<Location>,
    pub paths: Vec<Path>,
    pub truck: TruckSpec,
    pub processes: Vec<ProcessSpec>,
    pub costs: CostBook,
    pub exogenous: ExogenousSeries,
    pub demand_clearing: DemandClearing,
    /// Optional road distances per path, km.
    pub distances_km: Option<Vec<f64>>,
    /// Battery capital cost for the storage comparison, $/kWh.
    pub battery_unit_cost: f64,
    pub battery_lifetime_years: f64,
    q_effective: StepTable,
    renewable: StepTable,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.horizon == other.horizon
            && self.locations == other.locations
            && self.paths == other.paths
            && self.truck == other.truck
            && self.processes == other.processes
            && self.costs == other.costs
            && self.exogenous == other.exogenous
            && self.demand_clearing == other.demand_clearing
            && self.distances_km == other.distances_km
            && self.battery_unit_cost == other.battery_unit_cost
            && self.battery_lifetime_years == other.battery_lifetime_years
    }
}

/// Unvalidated parts of a scenario; [`Scenario::new`] checks and freezes them.
#[derive(Debug, Clone)]
pub struct ScenarioParts {
    pub horizon: Horizon,
    pub locations: Vec<Location>,
    pub paths: Vec<Path>,
    pub truck: TruckSpec,
    pub processes: Vec<ProcessSpec>,
    pub costs: CostBook,
    pub exogenous: ExogenousSeries,
    pub demand_clearing: DemandClearing,
    pub distances_km: Option<Vec<f64>>,
    pub battery_unit_cost: f64,
    pub battery_lifetime_years: f64,
}

impl Scenario {
    pub fn new(parts: ScenarioParts) -> Result<Self, ScenarioError> {
        let ScenarioParts {
            horizon,
            locations,
            paths,
            truck,
            processes,
            costs,
            exogenous,
            demand_clearing,
            distances_km,
            battery_unit_cost,
            battery_lifetime_years,
        } = parts;
        horizon.validate()?;
        truck.validate()?;
        let n_loc = locations.len();
        let n = horizon.n_steps;
        if n_loc == 0 {
            return Err(ScenarioError::invariant("locations", "at least one location required"));
        }
        for (row, loc) in locations.iter().enumerate() {
            if !(loc.wind_mw >= 0.0 && loc.solar_mw >= 0.0)
                || !loc.wind_mw.is_finite()
                || !loc.solar_mw.is_finite()
            {
                return Err(ScenarioError::at_row(
                    "locations.nameplate",
                    row,
                    format!("nameplate of {} must be non-negative", loc.id),
                ));
            }
            if locations[..row].iter().any(|l| l.id == loc.id) {
                return Err(ScenarioError::at_row(
                    "locations.id",
                    row,
                    format!("duplicate id {}", loc.id),
                ));
            }
        }
        for (row, p) in paths.iter().enumerate() {
            if p.origin >= n_loc || p.dest >= n_loc {
                return Err(ScenarioError::at_row("paths", row, "unknown location"));
            }
            if p.origin == p.dest {
                return Err(ScenarioError::at_row("paths.dest", row, "origin equals destination"));
            }
            if p.travel_steps == 0 || p.travel_steps >= n {
                return Err(ScenarioError::at_row(
                    "paths.travel_steps",
                    row,
                    format!("must be in 1..{n}"),
                ));
            }
            if !(p.energy_kwh > 0.0 && p.energy_kwh.is_finite()) {
                return Err(ScenarioError::at_row("paths.energy_kwh", row, "must be positive"));
            }
            if p.energy_kwh > truck.battery_kwh {
                return Err(ScenarioError::at_row(
                    "paths.energy_kwh",
                    row,
                    "path unreachable on one charge",
                ));
            }
            if paths[..row]
                .iter()
                .any(|q| q.origin == p.origin && q.dest == p.dest)
            {
                return Err(ScenarioError::at_row("paths", row, "duplicate path"));
            }
        }
        for (row, s) in processes.iter().enumerate() {
            if s.duration_steps == 0 || s.duration_steps >= n {
                return Err(ScenarioError::at_row(
                    "process.duration_steps",
                    row,
                    format!("must be in 1..{n}"),
                ));
            }
            for (name, v) in [
                ("process.power_per_unit", s.power_per_unit),
                ("process.output_per_unit", s.output_per_unit),
                ("process.raw_per_unit", s.raw_per_unit),
                ("process.equip_lifetime_years", s.equip_lifetime_years),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ScenarioError::at_row(name, row, "must be positive"));
                }
            }
            if !(s.equip_unit_cost >= 0.0) {
                return Err(ScenarioError::at_row("process.equip_unit_cost", row, "must be >= 0"));
            }
            if s.sites.is_empty() || s.sites.iter().any(|&i| i >= n_loc) {
                return Err(ScenarioError::at_row("process.sites", row, "unknown or empty site list"));
            }
        }
        if costs.k_store.len() != n_loc || costs.k_equip.len() != processes.len() {
            return Err(ScenarioError::invariant("costs", "dimension mismatch"));
        }
        let scalar_costs = [
            ("costs.k_truck", costs.k_truck),
            ("costs.k_power", costs.k_power),
            ("costs.epsilon", costs.epsilon),
            ("costs.k_batt", costs.k_batt),
            ("costs.emission_factor", costs.emission_factor),
        ];
        for (name, v) in scalar_costs
            .into_iter()
            .chain(costs.k_store.iter().map(|&v| ("costs.k_store", v)))
            .chain(costs.k_equip.iter().map(|&v| ("costs.k_equip", v)))
        {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ScenarioError::invariant(name, "must be non-negative"));
            }
        }
        for (name, table) in [
            ("product_injection", &exogenous.product_injection),
            ("raw_arrivals", &exogenous.raw_arrivals),
            ("wind_cf", &exogenous.wind_cf),
            ("solar_cf", &exogenous.solar_cf),
        ] {
            if table.n_steps() != n || table.n_locations() != n_loc {
                return Err(ScenarioError::invariant(name, "does not cover every (location, step)"));
            }
        }
        for i in 0..n_loc {
            for t in 0..n {
                if !exogenous.product_injection.get(i, t).is_finite() {
                    return Err(ScenarioError::invariant("product_injection", "non-finite value"));
                }
                let f = exogenous.raw_arrivals.get(i, t);
                if !(f >= 0.0 && f.is_finite()) {
                    return Err(ScenarioError::invariant("raw_arrivals", "must be non-negative"));
                }
                for (name, cf) in [
                    ("wind_cf", exogenous.wind_cf.get(i, t)),
                    ("solar_cf", exogenous.solar_cf.get(i, t)),
                ] {
                    if !(0.0..=1.0).contains(&cf) {
                        return Err(ScenarioError::invariant(name, "capacity factor outside [0, 1]"));
                    }
                }
            }
        }
        if let Some(d) = &distances_km {
            if d.len() != paths.len() || d.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(ScenarioError::invariant("distances", "one non-negative distance per path"));
            }
        }
        if !(battery_unit_cost >= 0.0 && battery_lifetime_years > 0.0) {
            return Err(ScenarioError::invariant("battery", "cost >= 0 and lifetime > 0 required"));
        }

        let q_effective = clear_demand(&exogenous.product_injection, demand_clearing, &horizon);
        let mut renewable = StepTable::zeros(n_loc, n);
        for (i, loc) in locations.iter().enumerate() {
            for t in 0..n {
                renewable.set(
                    i,
                    t,
                    loc.wind_kw() * exogenous.wind_cf.get(i, t)
                        + loc.solar_kw() * exogenous.solar_cf.get(i, t),
                );
            }
        }
        Ok(Scenario {
            horizon,
            locations,
            paths,
            truck,
            processes,
            costs,
            exogenous,
            demand_clearing,
            distances_km,
            battery_unit_cost,
            battery_lifetime_years,
            q_effective,
            renewable,
        })
    }

    /// Copy of the scenario's parts, for building modified variants.
    pub fn to_parts(&self) -> ScenarioParts {
        ScenarioParts {
            horizon: self.horizon,
            locations: self.locations.clone(),
            paths: self.paths.clone(),
            truck: self.truck,
            processes: self.processes.clone(),
            costs: self.costs.clone(),
            exogenous: self.exogenous.clone(),
            demand_clearing: self.demand_clearing,
            distances_km: self.distances_km.clone(),
            battery_unit_cost: self.battery_unit_cost,
            battery_lifetime_years: self.battery_lifetime_years,
        }
    }

    /// Rebuilds the scenario after `edit` modifies its parts.
    pub fn with(&self, edit: impl FnOnce(&mut ScenarioParts)) -> Result<Scenario, ScenarioError> {
        let mut parts = self.to_parts();
        edit(&mut parts);
        Scenario::new(parts)
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn n_steps(&self) -> usize {
        self.horizon.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon.step_hours
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn path_label(&self, k: usize) -> String {
        let p = &self.paths[k];
        format!("{}-{}", self.locations[p.origin].id, self.locations[p.dest].id)
    }

    /// Product injection after demand clearing is applied (kg).
    pub fn q(&self, loc: usize, t: usize) -> f64 {
        self.q_effective.get(loc, t)
    }

    pub fn q_table(&self) -> &StepTable {
        &self.q_effective
    }

    pub fn raw_arrivals(&self, loc: usize, t: usize) -> f64 {
        self.exogenous.raw_arrivals.get(loc, t)
    }

    /// Renewable power available at a location (kW).
    pub fn renewable(&self, loc: usize, t: usize) -> f64 {
        self.renewable.get(loc, t)
    }

    pub fn wind(&self, loc: usize, t: usize) -> f64 {
        self.locations[loc].wind_kw() * self.exogenous.wind_cf.get(loc, t)
    }

    pub fn solar(&self, loc: usize, t: usize) -> f64 {
        self.locations[loc].solar_kw() * self.exogenous.solar_cf.get(loc, t)
    }

    /// System-wide renewable power available at step `t` (kW).
    pub fn renewable_total(&self, t: usize) -> f64 {
        (0..self.n_locations()).map(|i| self.renewable(i, t)).sum()
    }

    /// Total demand over the horizon (kg, positive).
    pub fn total_demand(&self) -> f64 {
        self.q_effective.data.iter().filter(|&&v| v < 0.0).map(|v| -v).sum()
    }

    pub fn total_imports(&self) -> f64 {
        self.q_effective.data.iter().filter(|&&v| v > 0.0).sum()
    }

    /// Upper bound on finished product that can be made from the raw material
    /// delivered to process sites over the horizon (kg).
    pub fn max_production(&self) -> f64 {
        (0..self.n_locations())
            .map(|i| {
                let yield_ratio = self
                    .processes
                    .iter()
                    .filter(|s| s.sites.contains(&i))
                    .map(|s| s.output_per_unit / s.raw_per_unit)
                    .fold(0.0_f64, f64::max);
                yield_ratio * self.exogenous.raw_arrivals.row(i).iter().sum::<f64>()
            })
            .sum()
    }

    /// Penalty per kWh implied by a carbon tax with this scenario's emission factor.
    pub fn with_carbon_tax(&self, tax_per_tonne: f64) -> Result<Scenario, ScenarioError> {
        let penalty = carbon_tax_to_penalty(tax_per_tonne, self.costs.emission_factor)?;
        self.with(|p| p.costs.k_power = penalty)
    }

    pub fn with_clearing(&self, clearing: DemandClearing) -> Result<Scenario, ScenarioError> {
        self.with(|p| p.demand_clearing = clearing)
    }

    /// Battery cost over the whole horizon, $/kWh of installed capacity.
    pub fn battery_cost_over_horizon(&self) -> f64 {
        self.costs.k_batt * self.horizon.total_hours()
    }
}

/// Moves each location's demand (negative injections) to the deadline step of
/// its clearing window. Imports stay where they are.
fn clear_demand(q: &StepTable, clearing: DemandClearing, horizon: &Horizon) -> StepTable {
    let n = horizon.n_steps;
    let window = match clearing {
        DemandClearing::PerStep => return q.clone(),
        DemandClearing::Weekly => horizon.steps_per_week().min(n),
        DemandClearing::Monthly => n,
    };
    let mut out = StepTable::zeros(q.n_locations(), n);
    for i in 0..q.n_locations() {
        let mut pending = 0.0;
        for t in 0..n {
            let v = q.get(i, t);
            if v > 0.0 {
                out.set(i, t, out.get(i, t) + v);
            } else {
                pending += v;
            }
            if (t + 1) % window == 0 || t + 1 == n {
                out.set(i, t, out.get(i, t) + pending);
                pending = 0.0;
            }
        }
    }
    out
}

/// Serializable snapshot of the scenario parameters (used in manifests).
pub fn scenario_summary(s: &Scenario) -> BTreeMap<&'static str, serde_json::Value> {
    let mut m = BTreeMap::new();
    m.insert("locations", serde_json::json!(s.n_locations()));
    m.insert("paths", serde_json::json!(s.paths.len()));
    m.insert("processes", serde_json::json!(s.processes.len()));
    m.insert("n_steps", serde_json::json!(s.horizon.n_steps));
    m.insert("step_hours", serde_json::json!(s.horizon.step_hours));
    m.insert("demand_clearing", serde_json::json!(s.demand_clearing.to_string()));
    m.insert("k_power", serde_json::json!(s.costs.k_power));
    m
}
