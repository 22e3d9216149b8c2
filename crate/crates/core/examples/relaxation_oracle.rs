//! Continuous truck counts make the LP a relaxation: its cost can only be
//! lower than the best plan with whole trucks. On a two-city shuttle small
//! enough to enumerate every integer dispatch schedule, compare the two.
//!
//!     cargo run --release --example relaxation_oracle

use supplyflex::model::{build_lp, VarKind};
use supplyflex::scenario::{
    levelize, CostBook, DemandClearing, ExogenousSeries, Horizon, Location, Path, ProcessSpec, Scenario,
    ScenarioParts, StepTable, TruckSpec, DEFAULT_EMISSION_FACTOR, DEFAULT_EPSILON,
};
use supplyflex::solve::{oracle_enumerate, solve, SolverConfig};

/// Hub `A` bakes product from one raw delivery; `B` needs one truckload.
/// Loaded trucks always travel full, so the integer model needs whole
/// truckloads per cycle to be feasible at all.
fn shuttle(tax: f64) -> Scenario {
    let n = 4;
    let place = |id: &str| Location {
        id: id.into(),
        name: id.into(),
        wind_mw: 0.4,
        solar_mw: 0.0,
    };
    let leg = |origin, dest| Path {
        origin,
        dest,
        travel_steps: 1,
        energy_kwh: 300.0,
    };
    let truck = TruckSpec {
        battery_kwh: 900.0,
        load_kg: 20_000.0,
        empty_weight_kg: 10_000.0,
        full_charge_hours: 2.0,
        unit_cost: 150_000.0,
        lifetime_years: 30.0,
    };
    let kiln = ProcessSpec {
        id: "kiln".into(),
        duration_steps: 1,
        power_per_unit: 500.0,
        output_per_unit: 10_000.0,
        raw_per_unit: 10_000.0,
        equip_unit_cost: 25_000.0,
        equip_lifetime_years: 40.0,
        sites: vec![0],
    };
    let mut q = StepTable::zeros(2, n);
    q.set(1, 3, -20_000.0);
    let mut raw = StepTable::zeros(2, n);
    raw.set(0, 0, 20_000.0);
    let mut wind = StepTable::zeros(2, n);
    for t in 0..n {
        wind.set(0, t, [0.9, 0.6, 0.1, 0.0][t]);
        wind.set(1, t, [0.1, 0.4, 0.9, 0.5][t]);
    }
    let s = Scenario::new(ScenarioParts {
        horizon: Horizon::new(n, 1.0).unwrap(),
        locations: vec![place("A"), place("B")],
        paths: vec![leg(0, 1), leg(1, 0)],
        truck,
        processes: vec![kiln],
        costs: CostBook {
            k_truck: levelize(truck.unit_cost, truck.lifetime_years).unwrap(),
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
    s.with_carbon_tax(tax).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SolverConfig::default();
    for tax in [0.0, 50.0, 500.0] {
        let s = shuttle(tax);
        let relaxed = solve(&build_lp(&s)?, &config)?;
        let oracle = oracle_enumerate(&s, 2, &config)?;
        println!(
            "tax {tax:>5}: relaxed ${:.4} (fleet {:.3}) <= integer ${:.4} (fleet {}) over {} schedules, {} feasible",
            relaxed.objective,
            relaxed.get_fixed(VarKind::FleetSize, 0),
            oracle.objective,
            oracle.best.get_fixed(VarKind::FleetSize, 0),
            oracle.schedules,
            oracle.feasible,
        );
        assert!(relaxed.objective <= oracle.objective * (1.0 + 1e-6));
    }
    Ok(())
}
