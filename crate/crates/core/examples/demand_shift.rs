//! How much energy a carbon tax moves in time, under weekly and monthly
//! demand clearing.
//!
//! The shift series is the running difference of cumulative consumption
//! between the taxed and untaxed plans. It starts and ends at zero; its peak
//! is the volume of energy moved and its sign runs show for how long.
//!
//!     cargo run --release --example demand_shift [scenario_dir] [tax] [out_dir]

use std::path::PathBuf;
use supplyflex::kpi::{cumulative_shift, kpi_report, longest_shift_run, total_distance, write_series_csv};
use supplyflex::model::build_lp;
use supplyflex::scenario::{load_scenario, DemandClearing, Scenario};
use supplyflex::solve::{solve, PlanSolution, SolverConfig};

fn plan(s: &Scenario, tax: f64) -> Result<PlanSolution, Box<dyn std::error::Error>> {
    Ok(solve(&build_lp(&s.with_carbon_tax(tax)?)?, &SolverConfig::default())?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/carolinas_two_weeks"));
    let tax: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(50.0);
    let out = args.next().map(PathBuf::from);
    let base = load_scenario(&dir)?;
    let dt = base.dt();

    for clearing in [DemandClearing::Weekly, DemandClearing::Monthly] {
        let s = base.with_clearing(clearing)?;
        let (untaxed, taxed) = (plan(&s, 0.0)?, plan(&s, tax)?);
        let shift = cumulative_shift(&taxed, &untaxed, dt)?;
        let total = kpi_report(&untaxed, &s).energy_total_kwh;
        let peak = shift.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let run = longest_shift_run(&shift, 1e-3 * peak);
        let km = |p: &PlanSolution| s.distances_km.as_ref().map(|d| total_distance(p, &s, d)).transpose();
        println!("{clearing} clearing, ${tax}/t vs $0:");
        println!("  max |shift|      {:.3} GWh ({:.2}% of {:.1} GWh)", peak / 1e6, 100.0 * peak / total, total / 1e6);
        println!("  end of horizon   {:.3e} kWh", shift.last().copied().unwrap_or(0.0));
        println!("  longest one-sign {:.1} h ({:.1} days)", run as f64 * dt, run as f64 * dt / 24.0);
        if let (Some(a), Some(b)) = (km(&untaxed)?, km(&taxed)?) {
            println!("  distance         {:.0} km untaxed, {:.0} km taxed", a, b);
        }
        if let Some(out) = &out {
            std::fs::create_dir_all(out)?;
            write_series_csv(&out.join(format!("shift_{clearing}.csv")), "shift_kwh", &shift)?;
        }
    }
    Ok(())
}
