mod common;

use common::{fixture_dir, shuttles};
use std::fs;
use std::path::Path;
use std::process::Command;
use supplyflex::cli::{RunManifest, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK};
use supplyflex::scenario::save_scenario;

fn supplyflex(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_supplyflex"))
        .args(args)
        .env("SUPPLYFLEX_WORKERS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn solve_writes_outputs_and_manifest() {
    let out = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = supplyflex(&["solve", s(&fixture_dir("triangle_day")), "--tax", "50", "--out", s(out.path())]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert!(stdout.contains("ren %"), "{stdout}");
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(out.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.status, "ok");
    assert_eq!(manifest.command, "solve");
    assert_eq!(manifest.scenario_hash.len(), 64);
    for f in &manifest.outputs {
        assert!(out.path().join(f).is_file(), "{f}");
    }
    assert!(manifest.outputs.iter().any(|f| f == "solution/summary.json"));
    assert!(manifest.outputs.iter().any(|f| f == "kpi.json"));
}

#[test]
fn missing_scenario_is_an_error() {
    let out = tempfile::tempdir().unwrap();
    let (code, _, stderr) = supplyflex(&["solve", "/nonexistent/scenario", "--out", s(out.path())]);
    assert_eq!(code, EXIT_ERROR);
    assert!(!stderr.is_empty());
}

#[test]
fn unknown_backend_and_bad_config_are_errors() {
    let out = tempfile::tempdir().unwrap();
    let dir = fixture_dir("triangle_day");
    let (code, _, _) = supplyflex(&["--backend", "nope", "solve", s(&dir), "--out", s(out.path())]);
    assert_eq!(code, EXIT_ERROR);
    let cfg = out.path().join("run.toml");
    fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    let (code, _, _) = supplyflex(&["--config", s(&cfg), "solve", s(&dir), "--out", s(out.path())]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn infeasible_scenario_exits_with_two_and_names_rows() {
    let dir = tempfile::tempdir().unwrap();
    let s0 = shuttles()[0].build().with(|p| p.paths.clear()).unwrap();
    save_scenario(&s0, dir.path()).unwrap();
    let out = tempfile::tempdir().unwrap();
    let (code, _, stderr) = supplyflex(&["solve", s(dir.path()), "--out", s(out.path())]);
    assert_eq!(code, EXIT_INFEASIBLE, "{stderr}");
    assert!(stderr.contains("product"), "{stderr}");
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(out.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.status, "infeasible");
}

#[test]
fn single_zero_tax_bess_row_has_no_battery() {
    let out = tempfile::tempdir().unwrap();
    let (code, _, stderr) = supplyflex(&["bess", s(&fixture_dir("triangle_day")), "--tax", "0", "--out", s(out.path())]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    let rows = csv_rows(&out.path().join("comparison.csv"));
    assert_eq!(rows.len(), 1);
    let b_max: f64 = rows[0][1].parse().unwrap();
    let (proposed, bess): (f64, f64) = (rows[0][2].parse().unwrap(), rows[0][3].parse().unwrap());
    assert_eq!(b_max, 0.0);
    assert!((proposed - bess).abs() < 1e-9, "{proposed} vs {bess}");
}

#[test]
fn one_point_sweep_matches_solve() {
    let dir = fixture_dir("triangle_day");
    let work = tempfile::tempdir().unwrap();
    let grid = work.path().join("grid.toml");
    fs::write(&grid, "taxes = [50.0]\n").unwrap();
    let (code, _, stderr) = supplyflex(&["sweep", s(&dir), "--grid", s(&grid), "--out", s(&work.path().join("sweep"))]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    let (code, _, stderr) = supplyflex(&["solve", s(&dir), "--tax", "50", "--out", s(&work.path().join("solve"))]);
    assert_eq!(code, EXIT_OK, "{stderr}");

    let rows = csv_rows(&work.path().join("sweep/sweep.csv"));
    assert_eq!(rows.len(), 1);
    let kpi: serde_json::Value = serde_json::from_str(&fs::read_to_string(work.path().join("solve/kpi.json")).unwrap()).unwrap();
    let energy: f64 = rows[0][5].parse().unwrap();
    let pct: f64 = rows[0][6].parse().unwrap();
    assert!((energy - kpi["energy_total_kwh"].as_f64().unwrap()).abs() <= 1e-6 * energy);
    assert!((pct - kpi["renewable_pct_of_demand"].as_f64().unwrap()).abs() <= 1e-6);
}

#[test]
fn full_grid_has_one_row_per_cell() {
    let work = tempfile::tempdir().unwrap();
    let grid = work.path().join("grid.toml");
    fs::write(
        &grid,
        "taxes = [0.0, 50.0]\ntruck_scales = [0.5, 1.0, 2.0]\nmfg_scales = [0.5, 1.0, 2.0]\n",
    )
    .unwrap();
    let out = work.path().join("sweep");
    let (code, _, stderr) = supplyflex(&["sweep", s(&fixture_dir("triangle_day")), "--grid", s(&grid), "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert_eq!(csv_rows(&out.join("sweep.csv")).len(), 18);
}

#[test]
fn repeated_solves_are_byte_identical() {
    let dir = fixture_dir("triangle_day");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for out in [&a, &b] {
        let (code, _, stderr) = supplyflex(&["solve", s(&dir), "--tax", "100", "--out", s(out.path())]);
        assert_eq!(code, EXIT_OK, "{stderr}");
    }
    let mut names: Vec<_> = fs::read_dir(a.path().join("solution")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        let x = fs::read(a.path().join("solution").join(&n)).unwrap();
        let y = fs::read(b.path().join("solution").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?}");
    }
    for f in ["kpi.json", "cumulative_energy.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
