//! Solve a fixture at a few carbon taxes, check the plan and print the KPI table.
//!
//!     cargo run --release --example solve_fixture [scenario_dir] [tax ...]

use std::path::PathBuf;
use supplyflex::kpi::{format_table, kpi_report};
use supplyflex::model::{build_lp, validate_solution, Tolerance};
use supplyflex::scenario::{load_scenario, scenario_summary};
use supplyflex::solve::{solve, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/carolinas_week"));
    let mut taxes: Vec<f64> = args.map(|a| a.parse()).collect::<Result<_, _>>()?;
    if taxes.is_empty() {
        taxes = vec![0.0, 50.0, 250.0];
    }

    let base = load_scenario(&dir)?;
    println!("{}", serde_json::to_string_pretty(&scenario_summary(&base))?);

    let config = SolverConfig::default();
    let mut reports = Vec::new();
    for &tax in &taxes {
        let s = base.with_carbon_tax(tax)?;
        let lp = build_lp(&s)?;
        let t0 = std::time::Instant::now();
        let sol = solve(&lp, &config)?;
        let violations = validate_solution(&s, &sol, Tolerance::default())?;
        println!(
            "tax {tax:>6} $/t: {} cols, {} rows, solved in {:.1?}, objective ${:.0}, {} violations",
            lp.n_cols(),
            lp.n_rows(),
            t0.elapsed(),
            sol.objective,
            violations.len()
        );
        reports.push((format!("tax {tax}"), kpi_report(&sol, &s)));
    }
    let rows: Vec<_> = reports.iter().map(|(l, r)| (l.clone(), r)).collect();
    print!("\n{}", format_table(&rows));
    Ok(())
}
