//! Flexible supply chain vs. a battery added to the inflexible zero-tax plan.
//!
//!     cargo run --release --example bess_comparison [scenario_dir] [out_dir]

use std::path::PathBuf;
use supplyflex::bess::{compare, write_bess};
use supplyflex::scenario::load_scenario;
use supplyflex::solve::SolverConfig;

const TAXES: [f64; 8] = [0.0, 1.0, 50.0, 100.0, 250.0, 500.0, 1000.0, 2000.0];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/carolinas_week"));
    let s = load_scenario(&dir)?;
    let cmp = compare(&s, &TAXES, &SolverConfig::default())?;

    println!(
        "frozen profile: {:.2} GWh, {:.2}% renewable without storage",
        cmp.profile.energy() / 1e6,
        cmp.profile.renewable_pct()
    );
    println!("battery cost over horizon: ${:.3}/kWh", s.battery_cost_over_horizon());
    println!("{:>8} {:>14} {:>10} {:>10}", "tax $/t", "battery MWh", "flex %", "bess %");
    for r in &cmp.rows {
        println!(
            "{:>8} {:>14.1} {:>10.2} {:>10.2}",
            r.tax_per_tonne,
            r.b_max_kwh / 1e3,
            r.proposed_renewable_pct,
            r.bess_renewable_pct
        );
    }

    if let Some(out) = args.next().map(PathBuf::from) {
        std::fs::create_dir_all(&out)?;
        std::fs::write(out.join("comparison.csv"), cmp.to_csv())?;
        for (r, b) in cmp.rows.iter().zip(&cmp.batteries) {
            write_bess(b, &out, &format!("battery_tax_{}", r.tax_per_tonne))?;
        }
        println!("wrote {}", out.display());
    }
    Ok(())
}
