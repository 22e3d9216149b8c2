#![allow(dead_code)]

use std::path::PathBuf;
use supplyflex::scenario::{
    levelize, load_scenario, CostBook, DemandClearing, ExogenousSeries, Horizon, Location, Path, ProcessSpec,
    Scenario, ScenarioParts, StepTable, TruckSpec, DEFAULT_EMISSION_FACTOR, DEFAULT_EPSILON,
};

pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Scenario {
    load_scenario(fixture_dir(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub const TRUCK: TruckSpec = TruckSpec {
    battery_kwh: 900.0,
    load_kg: 20_000.0,
    empty_weight_kg: 10_000.0,
    full_charge_hours: 2.0,
    unit_cost: 150_000.0,
    lifetime_years: 30.0,
};

fn place(id: &str, wind_mw: f64) -> Location {
    Location {
        id: id.into(),
        name: id.into(),
        wind_mw,
        solar_mw: 0.0,
    }
}

fn kiln(sites: Vec<usize>) -> ProcessSpec {
    ProcessSpec {
        id: "kiln".into(),
        duration_steps: 1,
        power_per_unit: 500.0,
        output_per_unit: 10_000.0,
        raw_per_unit: 10_000.0,
        equip_unit_cost: 25_000.0,
        equip_lifetime_years: 40.0,
        sites,
    }
}

/// One city, four 1-hour steps. 10 t of raw material lands at step 0 and
/// 10 t of product is due at step 3; a 500 kW kiln turns 10 t per unit-hour.
/// Only step 2 has renewable power (500 kW). Storage is free.
pub fn one_city(k_power: f64, k_equip: f64) -> Scenario {
    let n = 4;
    let mut q = StepTable::zeros(1, n);
    q.set(0, 3, -10_000.0);
    let mut raw = StepTable::zeros(1, n);
    raw.set(0, 0, 10_000.0);
    let mut wind = StepTable::zeros(1, n);
    wind.set(0, 2, 0.5);
    Scenario::new(ScenarioParts {
        horizon: Horizon::new(n, 1.0).unwrap(),
        locations: vec![place("A", 1.0)],
        paths: vec![],
        truck: TRUCK,
        processes: vec![kiln(vec![0])],
        costs: CostBook {
            k_truck: 1.0,
            k_store: vec![0.0],
            k_equip: vec![k_equip],
            k_power,
            epsilon: DEFAULT_EPSILON,
            k_batt: 0.0,
            emission_factor: DEFAULT_EMISSION_FACTOR,
        },
        exogenous: ExogenousSeries {
            product_injection: q,
            raw_arrivals: raw,
            wind_cf: wind,
            solar_cf: StepTable::zeros(1, n),
        },
        demand_clearing: DemandClearing::PerStep,
        distances_km: None,
        battery_unit_cost: 400.0,
        battery_lifetime_years: 5.0,
    })
    .unwrap()
}

/// A two-city shuttle: `A` makes product from one raw delivery at step 0,
/// `B` needs one truckload at `due`. Loaded trucks travel full, so whole
/// truckloads keep the integer model feasible.
pub struct Shuttle {
    pub n_steps: usize,
    pub travel_steps: usize,
    pub due: usize,
    pub wind_a: Vec<f64>,
    pub wind_b: Vec<f64>,
    pub tax: f64,
}

impl Shuttle {
    pub fn build(&self) -> Scenario {
        let n = self.n_steps;
        let leg = |origin, dest| Path {
            origin,
            dest,
            travel_steps: self.travel_steps,
            energy_kwh: 300.0,
        };
        let mut q = StepTable::zeros(2, n);
        q.set(1, self.due, -20_000.0);
        let mut raw = StepTable::zeros(2, n);
        raw.set(0, 0, 20_000.0);
        let mut wind = StepTable::zeros(2, n);
        for t in 0..n {
            wind.set(0, t, self.wind_a[t]);
            wind.set(1, t, self.wind_b[t]);
        }
        let s = Scenario::new(ScenarioParts {
            horizon: Horizon::new(n, 1.0).unwrap(),
            locations: vec![place("A", 0.4), place("B", 0.4)],
            paths: vec![leg(0, 1), leg(1, 0)],
            truck: TRUCK,
            processes: vec![kiln(vec![0])],
            costs: CostBook {
                k_truck: levelize(TRUCK.unit_cost, TRUCK.lifetime_years).unwrap(),
                k_store: vec![1e-6; 2],
                k_equip: vec![levelize(25_000.0, 40.0).unwrap()],
                k_power: 0.0,
                epsilon: DEFAULT_EPSILON,
                k_batt: 0.0,
                emission_factor: DEFAULT_EMISSION_FACTOR,
            },
            exogenous: ExogenousSeries {
                product_injection: q,
                raw_arrivals: raw,
                wind_cf: wind,
                solar_cf: StepTable::zeros(2, n),
            },
            demand_clearing: DemandClearing::PerStep,
            distances_km: None,
            battery_unit_cost: 400.0,
            battery_lifetime_years: 5.0,
        })
        .unwrap();
        s.with_carbon_tax(self.tax).unwrap()
    }
}

/// Three small shuttles that differ in timing, wind shape and tax.
pub fn shuttles() -> Vec<Shuttle> {
    vec![
        Shuttle {
            n_steps: 4,
            travel_steps: 1,
            due: 3,
            wind_a: vec![0.9, 0.6, 0.1, 0.0],
            wind_b: vec![0.1, 0.4, 0.9, 0.5],
            tax: 0.0,
        },
        Shuttle {
            n_steps: 4,
            travel_steps: 1,
            due: 2,
            wind_a: vec![0.0, 0.2, 0.8, 1.0],
            wind_b: vec![0.5, 0.5, 0.0, 0.3],
            tax: 50.0,
        },
        Shuttle {
            n_steps: 5,
            travel_steps: 2,
            due: 4,
            wind_a: vec![1.0, 0.0, 0.0, 0.5, 0.2],
            wind_b: vec![0.0, 0.3, 0.7, 0.0, 0.0],
            tax: 500.0,
        },
    ]
}
