//! Truck and manufacturing cost scales against carbon tax, with floor marks.
//!
//! Cells marked `*` sit on the smallest fleet (or equipment) any feasible plan
//! can have. Set SUPPLYFLEX_WORKERS to bound the thread pool.
//!
//!     cargo run --release --example sensitivity_grid [scenario_dir] [out_dir]

use std::path::PathBuf;
use supplyflex::scenario::load_scenario;
use supplyflex::solve::SolverConfig;
use supplyflex::sweep::{run_sweep, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/triangle_day"));
    let s = load_scenario(&dir)?;
    let spec = SweepSpec {
        taxes: vec![0.0, 50.0],
        truck_scales: vec![0.1, 1.0, 10.0],
        mfg_scales: vec![0.1, 1.0, 10.0],
        clearings: Vec::new(),
        workers: None,
    };
    let t0 = std::time::Instant::now();
    let result = run_sweep(&s, &spec, &SolverConfig::default())?;
    println!("{} cells in {:.1?}", result.rows.len(), t0.elapsed());
    for f in &result.floors {
        println!("{} floors: fleet {:?}, equipment {:?}", f.clearing, f.fleet, f.equipment);
    }

    println!("{:>6} {:>6} | {:>8} {:>8} | {:>9} {:>9}", "truck", "mfg", "ren% $0", "ren% $50", "fleet $0", "fleet $50");
    for pair in result.rows.chunks(2) {
        let mark = |b: bool| if b { "*" } else { " " };
        let (a, b) = (&pair[0], &pair[1]);
        println!(
            "{:>6} {:>6} | {:>8.2} {:>8.2} | {:>8.1}{} {:>8.1}{}",
            a.point.truck_scale,
            a.point.mfg_scale,
            a.renewable_pct.unwrap_or(f64::NAN),
            b.renewable_pct.unwrap_or(f64::NAN),
            a.fleet.unwrap_or(f64::NAN),
            mark(a.fleet_at_floor),
            b.fleet.unwrap_or(f64::NAN),
            mark(b.fleet_at_floor),
        );
    }
    if let Some(out) = args.next() {
        result.write(std::path::Path::new(&out))?;
    }
    Ok(())
}
