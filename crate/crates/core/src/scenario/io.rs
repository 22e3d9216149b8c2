//! Scenario directory format.
//!
//! ```text
//! locations.csv         id,name,wind_mw,solar_mw
//! paths.csv             origin,dest,travel_steps,energy_kwh
//! capacity_factors.csv  step,location,wind_cf,solar_cf
//! demand.csv            location,step,kg_signed
//! raw_arrivals.csv      location,step,kg
//! distances.csv         origin,dest,km              (optional)
//! params.toml           horizon, truck, processes, costs, demand clearing
//! ```
//!
//! Steps are 0-based. Demand and raw-arrival files may omit zero entries.

use super::{
    levelize, CostBook, DemandClearing, ExogenousSeries, Horizon, Location, Path, ProcessSpec,
    Scenario, ScenarioError, ScenarioParts, StepTable, TruckSpec, DEFAULT_EMISSION_FACTOR,
    DEFAULT_EPSILON,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;

/// Contents of `params.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub demand_clearing: DemandClearing,
    pub horizon: Horizon,
    pub truck: TruckSpec,
    #[serde(rename = "process", default)]
    pub processes: Vec<ProcessConfig>,
    #[serde(default)]
    pub costs: CostConfig,
    #[serde(default)]
    pub battery: BatteryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub id: String,
    pub duration_steps: usize,
    pub power_per_unit_kw: f64,
    pub output_per_unit_kg: f64,
    pub raw_per_unit_kg: f64,
    pub equip_unit_cost: f64,
    pub equip_lifetime_years: f64,
    /// Location ids; empty means every location.
    #[serde(default)]
    pub sites: Vec<String>,
    /// Overrides the levelized equipment cost, $/(unit h).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_equip: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    /// $/truck/h; levelized from the truck spec when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_truck: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_store_default: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub k_store: BTreeMap<String, f64>,
    /// Explicit penalty in $/kWh. Mutually exclusive with `carbon_tax`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_power: Option<f64>,
    /// $/tonne CO2, converted with the emission factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carbon_tax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub unit_cost_per_kwh: f64,
    pub lifetime_years: f64,
    /// Overrides the levelized rate, $/(kWh h).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_batt: Option<f64>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            unit_cost_per_kwh: 400.0,
            lifetime_years: 5.0,
            k_batt: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LocationRow {
    id: String,
    name: String,
    wind_mw: f64,
    solar_mw: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathRow {
    origin: String,
    dest: String,
    travel_steps: usize,
    energy_kwh: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CapacityFactorRow {
    step: usize,
    location: String,
    wind_cf: f64,
    solar_cf: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandRow {
    location: String,
    step: usize,
    kg_signed: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRow {
    location: String,
    step: usize,
    kg: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DistanceRow {
    origin: String,
    dest: String,
    km: f64,
}

fn schema(file: &str, detail: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        file: file.to_string(),
        detail: detail.into(),
    }
}

/// Reads a headed CSV, checking the header names before decoding rows.
/// Returned row numbers are 1-based data rows.
fn read_csv<T: DeserializeOwned>(
    dir: &FsPath,
    file: &str,
    columns: &[&str],
    required: bool,
) -> Result<Option<Vec<(usize, T)>>, ScenarioError> {
    let path = dir.join(file);
    if !path.exists() {
        return if required {
            Err(ScenarioError::MissingFile(path.display().to_string()))
        } else {
            Ok(None)
        };
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| schema(file, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| schema(file, e.to_string()))?.clone();
    for col in columns {
        if !headers.iter().any(|h| h == *col) {
            return Err(schema(file, format!("missing column '{col}'")));
        }
    }
    if let Some(extra) = headers.iter().find(|h| !columns.contains(h)) {
        return Err(schema(file, format!("unexpected column '{extra}'")));
    }
    let mut out = Vec::new();
    for (idx, rec) in rdr.deserialize::<T>().enumerate() {
        let row = idx + 1;
        let value = rec.map_err(|e| {
            let column = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err
                    .field()
                    .and_then(|f| headers.get(f as usize))
                    .map(|c| format!(" column '{c}'"))
                    .unwrap_or_default(),
                _ => String::new(),
            };
            schema(file, format!("row {row}{column}: {e}"))
        })?;
        out.push((row, value));
    }
    Ok(Some(out))
}

fn lookup(
    ids: &BTreeMap<&str, usize>,
    file: &str,
    row: usize,
    id: &str,
) -> Result<usize, ScenarioError> {
    ids.get(id)
        .copied()
        .ok_or_else(|| schema(file, format!("row {row}: unknown location '{id}'")))
}

/// Loads and validates a scenario directory.
pub fn load_scenario(dir: impl AsRef<FsPath>) -> Result<Scenario, ScenarioError> {
    let dir = dir.as_ref();
    let params_path = dir.join("params.toml");
    if !params_path.exists() {
        return Err(ScenarioError::MissingFile(params_path.display().to_string()));
    }
    let text = fs::read_to_string(&params_path).map_err(|source| ScenarioError::Io {
        path: params_path.display().to_string(),
        source,
    })?;
    let config: ScenarioConfig =
        toml::from_str(&text).map_err(|e| schema("params.toml", e.to_string()))?;
    config.horizon.validate()?;
    let n = config.horizon.n_steps;

    let locations: Vec<Location> =
        read_csv::<LocationRow>(dir, "locations.csv", &["id", "name", "wind_mw", "solar_mw"], true)?
            .unwrap_or_default()
            .into_iter()
            .map(|(_, r)| Location {
                id: r.id,
                name: r.name,
                wind_mw: r.wind_mw,
                solar_mw: r.solar_mw,
            })
            .collect();
    let ids: BTreeMap<&str, usize> = locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id.as_str(), i))
        .collect();
    let n_loc = locations.len();

    let mut paths = Vec::new();
    for (row, r) in read_csv::<PathRow>(
        dir,
        "paths.csv",
        &["origin", "dest", "travel_steps", "energy_kwh"],
        true,
    )?
    .unwrap_or_default()
    {
        paths.push(Path {
            origin: lookup(&ids, "paths.csv", row, &r.origin)?,
            dest: lookup(&ids, "paths.csv", row, &r.dest)?,
            travel_steps: r.travel_steps,
            energy_kwh: r.energy_kwh,
        });
    }

    let mut wind_cf = StepTable::zeros(n_loc, n);
    let mut solar_cf = StepTable::zeros(n_loc, n);
    let mut seen = vec![false; n_loc * n];
    for (row, r) in read_csv::<CapacityFactorRow>(
        dir,
        "capacity_factors.csv",
        &["step", "location", "wind_cf", "solar_cf"],
        true,
    )?
    .unwrap_or_default()
    {
        let file = "capacity_factors.csv";
        let i = lookup(&ids, file, row, &r.location)?;
        if r.step >= n {
            return Err(schema(file, format!("row {row}: step {} outside horizon", r.step)));
        }
        for (col, v) in [("wind_cf", r.wind_cf), ("solar_cf", r.solar_cf)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(schema(file, format!("row {row} column '{col}': {v} outside [0, 1]")));
            }
        }
        if std::mem::replace(&mut seen[i * n + r.step], true) {
            return Err(schema(file, format!("row {row}: duplicate (location, step)")));
        }
        wind_cf.set(i, r.step, r.wind_cf);
        solar_cf.set(i, r.step, r.solar_cf);
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(schema(
            "capacity_factors.csv",
            format!("no entry for location '{}' step {}", locations[k / n].id, k % n),
        ));
    }

    let product_injection = read_sparse::<DemandRow>(
        dir,
        "demand.csv",
        &["location", "step", "kg_signed"],
        &ids,
        n,
        |r| (r.location.as_str(), r.step, r.kg_signed),
    )?;
    let raw_arrivals = read_sparse::<RawRow>(
        dir,
        "raw_arrivals.csv",
        &["location", "step", "kg"],
        &ids,
        n,
        |r| (r.location.as_str(), r.step, r.kg),
    )?;
    if let Some(i) = (0..n_loc).find(|&i| raw_arrivals.row(i).iter().any(|&v| v < 0.0)) {
        return Err(ScenarioError::invariant(
            "raw_arrivals.kg",
            format!("negative arrival at {}", locations[i].id),
        ));
    }

    let distances_km = match read_csv::<DistanceRow>(dir, "distances.csv", &["origin", "dest", "km"], false)? {
        None => None,
        Some(rows) => {
            let mut d = vec![f64::NAN; paths.len()];
            for (row, r) in rows {
                let o = lookup(&ids, "distances.csv", row, &r.origin)?;
                let de = lookup(&ids, "distances.csv", row, &r.dest)?;
                let k = paths
                    .iter()
                    .position(|p| p.origin == o && p.dest == de)
                    .ok_or_else(|| schema("distances.csv", format!("row {row}: no such path")))?;
                d[k] = r.km;
            }
            if d.iter().any(|v| v.is_nan()) {
                return Err(schema("distances.csv", "missing distance for a path"));
            }
            Some(d)
        }
    };

    let mut processes = Vec::new();
    let mut k_equip = Vec::new();
    for (row, p) in config.processes.iter().enumerate() {
        let sites = if p.sites.is_empty() {
            (0..n_loc).collect()
        } else {
            p.sites
                .iter()
                .map(|s| {
                    ids.get(s.as_str()).copied().ok_or_else(|| {
                        ScenarioError::at_row("process.sites", row, format!("unknown location '{s}'"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        k_equip.push(match p.k_equip {
            Some(k) => k,
            None => levelize(p.equip_unit_cost, p.equip_lifetime_years)?,
        });
        processes.push(ProcessSpec {
            id: p.id.clone(),
            duration_steps: p.duration_steps,
            power_per_unit: p.power_per_unit_kw,
            output_per_unit: p.output_per_unit_kg,
            raw_per_unit: p.raw_per_unit_kg,
            equip_unit_cost: p.equip_unit_cost,
            equip_lifetime_years: p.equip_lifetime_years,
            sites,
        });
    }

    let c = &config.costs;
    let emission_factor = c.emission_factor.unwrap_or(DEFAULT_EMISSION_FACTOR);
    let k_power = match (c.k_power, c.carbon_tax) {
        (Some(_), Some(_)) => {
            return Err(schema("params.toml", "costs.k_power and costs.carbon_tax are exclusive"))
        }
        (Some(k), None) => k,
        (None, Some(tax)) => super::carbon_tax_to_penalty(tax, emission_factor)?,
        (None, None) => 0.0,
    };
    let mut k_store = Vec::with_capacity(n_loc);
    for loc in &locations {
        k_store.push(match c.k_store.get(&loc.id).or(c.k_store_default.as_ref()) {
            Some(&v) => v,
            None => {
                return Err(schema(
                    "params.toml",
                    format!("no storage cost for location '{}'", loc.id),
                ))
            }
        });
    }
    if let Some(unknown) = c.k_store.keys().find(|k| !ids.contains_key(k.as_str())) {
        return Err(schema("params.toml", format!("k_store for unknown location '{unknown}'")));
    }
    let costs = CostBook {
        k_truck: match c.k_truck {
            Some(k) => k,
            None => levelize(config.truck.unit_cost, config.truck.lifetime_years)?,
        },
        k_store,
        k_equip,
        k_power,
        epsilon: c.epsilon.unwrap_or(DEFAULT_EPSILON),
        k_batt: match config.battery.k_batt {
            Some(k) => k,
            None => levelize(config.battery.unit_cost_per_kwh, config.battery.lifetime_years)?,
        },
        emission_factor,
    };

    Scenario::new(ScenarioParts {
        horizon: config.horizon,
        locations,
        paths,
        truck: config.truck,
        processes,
        costs,
        exogenous: ExogenousSeries {
            product_injection,
            raw_arrivals,
            wind_cf,
            solar_cf,
        },
        demand_clearing: config.demand_clearing,
        distances_km,
        battery_unit_cost: config.battery.unit_cost_per_kwh,
        battery_lifetime_years: config.battery.lifetime_years,
    })
}

fn read_sparse<T: DeserializeOwned>(
    dir: &FsPath,
    file: &str,
    columns: &[&str],
    ids: &BTreeMap<&str, usize>,
    n: usize,
    fields: impl Fn(&T) -> (&str, usize, f64),
) -> Result<StepTable, ScenarioError> {
    let mut table = StepTable::zeros(ids.len(), n);
    let mut seen = vec![false; ids.len() * n];
    for (row, r) in read_csv::<T>(dir, file, columns, true)?.unwrap_or_default() {
        let (loc, step, v) = fields(&r);
        let i = lookup(ids, file, row, loc)?;
        if step >= n {
            return Err(schema(file, format!("row {row}: step {step} outside horizon")));
        }
        if !v.is_finite() {
            return Err(schema(file, format!("row {row}: non-finite value")));
        }
        if std::mem::replace(&mut seen[i * n + step], true) {
            return Err(schema(file, format!("row {row}: duplicate (location, step)")));
        }
        table.set(i, step, v);
    }
    Ok(table)
}

fn io_err(path: &FsPath, source: std::io::Error) -> ScenarioError {
    ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// The header is written explicitly so an empty table still has one.
fn write_csv<T: Serialize>(
    dir: &FsPath,
    file: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<(), ScenarioError> {
    let path = dir.join(file);
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .map_err(|e| schema(file, e.to_string()))?;
    w.write_record(header).map_err(|e| schema(file, e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| schema(file, e.to_string()))?;
    }
    w.flush().map_err(|e| io_err(&path, e))
}

/// Writes a scenario directory that [`load_scenario`] reads back to an equal scenario.
pub fn save_scenario(scenario: &Scenario, dir: impl AsRef<FsPath>) -> Result<(), ScenarioError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let s = scenario;
    let id = |i: usize| s.locations[i].id.clone();
    let n = s.n_steps();

    write_csv(
        dir,
        "locations.csv",
        &["id", "name", "wind_mw", "solar_mw"],
        s.locations.iter().map(|l| LocationRow {
            id: l.id.clone(),
            name: l.name.clone(),
            wind_mw: l.wind_mw,
            solar_mw: l.solar_mw,
        }),
    )?;
    write_csv(
        dir,
        "paths.csv",
        &["origin", "dest", "travel_steps", "energy_kwh"],
        s.paths.iter().map(|p| PathRow {
            origin: id(p.origin),
            dest: id(p.dest),
            travel_steps: p.travel_steps,
            energy_kwh: p.energy_kwh,
        }),
    )?;
    let ex = &s.exogenous;
    write_csv(
        dir,
        "capacity_factors.csv",
        &["step", "location", "wind_cf", "solar_cf"],
        (0..n).flat_map(|t| {
            (0..s.n_locations()).map(move |i| CapacityFactorRow {
                step: t,
                location: s.locations[i].id.clone(),
                wind_cf: ex.wind_cf.get(i, t),
                solar_cf: ex.solar_cf.get(i, t),
            })
        }),
    )?;
    let nonzero = |table: &StepTable| -> Vec<(String, usize, f64)> {
        (0..s.n_locations())
            .flat_map(|i| (0..n).map(move |t| (i, t)))
            .filter(|&(i, t)| table.get(i, t) != 0.0)
            .map(|(i, t)| (id(i), t, table.get(i, t)))
            .collect()
    };
    write_csv(
        dir,
        "demand.csv",
        &["location", "step", "kg_signed"],
        nonzero(&ex.product_injection)
            .into_iter()
            .map(|(location, step, kg_signed)| DemandRow {
                location,
                step,
                kg_signed,
            }),
    )?;
    write_csv(
        dir,
        "raw_arrivals.csv",
        &["location", "step", "kg"],
        nonzero(&ex.raw_arrivals)
            .into_iter()
            .map(|(location, step, kg)| RawRow { location, step, kg }),
    )?;
    if let Some(d) = &s.distances_km {
        write_csv(
            dir,
            "distances.csv",
            &["origin", "dest", "km"],
            s.paths.iter().zip(d).map(|(p, &km)| DistanceRow {
                origin: id(p.origin),
                dest: id(p.dest),
                km,
            }),
        )?;
    }

    let config = ScenarioConfig {
        demand_clearing: s.demand_clearing,
        horizon: s.horizon,
        truck: s.truck,
        processes: s
            .processes
            .iter()
            .zip(&s.costs.k_equip)
            .map(|(p, &k)| ProcessConfig {
                id: p.id.clone(),
                duration_steps: p.duration_steps,
                power_per_unit_kw: p.power_per_unit,
                output_per_unit_kg: p.output_per_unit,
                raw_per_unit_kg: p.raw_per_unit,
                equip_unit_cost: p.equip_unit_cost,
                equip_lifetime_years: p.equip_lifetime_years,
                sites: p.sites.iter().map(|&i| id(i)).collect(),
                k_equip: Some(k),
            })
            .collect(),
        costs: CostConfig {
            k_truck: Some(s.costs.k_truck),
            k_store_default: None,
            k_store: s
                .locations
                .iter()
                .zip(&s.costs.k_store)
                .map(|(l, &k)| (l.id.clone(), k))
                .collect(),
            k_power: Some(s.costs.k_power),
            carbon_tax: None,
            epsilon: Some(s.costs.epsilon),
            emission_factor: Some(s.costs.emission_factor),
        },
        battery: BatteryConfig {
            unit_cost_per_kwh: s.battery_unit_cost,
            lifetime_years: s.battery_lifetime_years,
            k_batt: Some(s.costs.k_batt),
        },
    };
    let text = toml::to_string(&config).map_err(|e| schema("params.toml", e.to_string()))?;
    let path = dir.join("params.toml");
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}
