//! Write a scenario's LP in fixed MPS so an external solver can cross-check it.
//!
//!     cargo run --example export_mps [scenario_dir] [tax] > plan.mps

use std::io::Write;
use std::path::PathBuf;
use supplyflex::model::build_lp;
use supplyflex::scenario::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/triangle_day"));
    let tax: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.0);
    let lp = build_lp(&load_scenario(&dir)?.with_carbon_tax(tax)?)?;
    eprintln!("{} columns, {} rows", lp.n_cols(), lp.n_rows());
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    lp.write_mps(&mut out)?;
    out.flush()?;
    Ok(())
}
