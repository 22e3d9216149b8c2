mod common;

use common::{fixture, fixture_dir, shuttles};
use std::fs;
use supplyflex::model::build_lp;
use supplyflex::scenario::{load_scenario, save_scenario, DemandClearing, ScenarioError};
use supplyflex::solve::{read_solution, solve, write_solution, SolverConfig};

fn copy_fixture(name: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture_dir(name)).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    dir
}

#[test]
fn fixtures_round_trip_through_save() {
    for name in ["triangle_day", "carolinas_week", "carolinas_two_weeks"] {
        let s = fixture(name);
        let dir = tempfile::tempdir().unwrap();
        save_scenario(&s, dir.path()).unwrap();
        assert_eq!(load_scenario(dir.path()).unwrap(), s, "{name}");
    }
}

#[test]
fn programmatic_scenario_round_trips() {
    let s = shuttles()[2].build().with_clearing(DemandClearing::Weekly).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_scenario(&s, dir.path()).unwrap();
    let back = load_scenario(dir.path()).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.q_table(), s.q_table());
}

#[test]
fn empty_tables_keep_their_headers() {
    let s = shuttles()[0].build().with(|p| p.paths.clear()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_scenario(&s, dir.path()).unwrap();
    assert_eq!(load_scenario(dir.path()).unwrap(), s);
}

#[test]
fn missing_file_is_named() {
    let dir = copy_fixture("triangle_day");
    fs::remove_file(dir.path().join("paths.csv")).unwrap();
    match load_scenario(dir.path()) {
        Err(ScenarioError::MissingFile(f)) => assert!(f.contains("paths.csv"), "{f}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_location_in_paths_is_rejected() {
    let dir = copy_fixture("triangle_day");
    let p = dir.path().join("paths.csv");
    let text = fs::read_to_string(&p).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let first = lines[1].split(',').map(String::from).collect::<Vec<_>>();
    lines[1] = std::iter::once("NOWHERE".to_string()).chain(first[1..].iter().cloned()).collect::<Vec<_>>().join(",");
    fs::write(&p, lines.join("\n") + "\n").unwrap();
    assert!(load_scenario(dir.path()).is_err());
}

#[test]
fn negative_capacity_factor_is_rejected() {
    let dir = copy_fixture("triangle_day");
    let p = dir.path().join("capacity_factors.csv");
    let text = fs::read_to_string(&p).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
    let last = cells.len() - 1;
    cells[last] = "-0.5".into();
    lines[1] = cells.join(",");
    fs::write(&p, lines.join("\n") + "\n").unwrap();
    assert!(load_scenario(dir.path()).is_err());
}

#[test]
fn unknown_params_key_is_rejected() {
    let dir = copy_fixture("triangle_day");
    let p = dir.path().join("params.toml");
    let text = fs::read_to_string(&p).unwrap();
    fs::write(&p, format!("mystery = 1\n{text}")).unwrap();
    assert!(load_scenario(dir.path()).is_err());
}

#[test]
fn solution_round_trips_through_csv() {
    let s = shuttles()[0].build();
    let sol = solve(&build_lp(&s).unwrap(), &SolverConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_solution(&sol, dir.path()).unwrap();
    let back = read_solution(&s, dir.path()).unwrap();
    assert_eq!(back.values, sol.values);
    assert_eq!(back.objective, sol.objective);
    assert_eq!(back.meta, sol.meta);
}
