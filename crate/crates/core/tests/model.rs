mod common;

use approx::assert_relative_eq;
use common::{one_city, shuttles};
use supplyflex::model::{build_lp, validate_solution, Constraint, ModelError, Sense, Tolerance, VarKind};
use supplyflex::solve::{solve, SolveError, SolverConfig};

/// Closed form for the one-city instance. All 10 t must be processed
/// (500 kWh); the kiln either runs once in the renewable step (capacity 1)
/// or at a quarter unit in every step (capacity 1/4, 375 kWh non-renewable).
/// The cost is linear in the capacity, so one of the two ends is optimal.
fn one_city_optimum(k_power: f64, k_equip: f64) -> f64 {
    let horizon_h = 4.0;
    let base = 0.001 * 500.0;
    let lumped = k_equip * horizon_h;
    let spread = k_equip * horizon_h / 4.0 + k_power * 375.0;
    base + lumped.min(spread)
}

#[test]
fn one_city_matches_closed_form() {
    for (k_power, k_equip) in [(0.0, 10.0), (1.0, 10.0), (0.01, 10.0), (0.05, 0.5)] {
        let s = one_city(k_power, k_equip);
        let sol = solve(&build_lp(&s).unwrap(), &SolverConfig::default()).unwrap();
        assert_relative_eq!(sol.objective, one_city_optimum(k_power, k_equip), max_relative = 1e-6);
        assert_relative_eq!(sol.breakdown.total(), sol.objective, max_relative = 1e-9);
        assert!(validate_solution(&s, &sol, Tolerance::default()).unwrap().is_empty());
        let processed: f64 = sol.trajectory(VarKind::ProcessStart, 0).iter().sum();
        assert_relative_eq!(processed, 1.0, max_relative = 1e-6);
    }
}

#[test]
fn one_city_without_trucks_has_no_truck_columns() {
    let lp = build_lp(&one_city(0.0, 1.0)).unwrap();
    for kind in [VarKind::FleetSize, VarKind::LoadedDispatch, VarKind::EmptyDispatch, VarKind::StationaryTrucks] {
        assert!(!lp.map.has(kind), "{kind:?}");
    }
}

#[test]
fn insufficient_raw_material_is_rejected_before_solving() {
    let s = one_city(0.0, 1.0)
        .with(|p| p.exogenous.raw_arrivals.set(0, 0, 5_000.0))
        .unwrap();
    assert!(matches!(build_lp(&s), Err(ModelError::InsufficientSupply { .. })));
}

#[test]
fn unreachable_demand_is_infeasible_with_a_hint() {
    // Product is made at A but B has no road to it.
    let s = shuttles()[0].build().with(|p| p.paths.clear()).unwrap();
    match solve(&build_lp(&s).unwrap(), &SolverConfig::default()) {
        Err(SolveError::Infeasible { hint }) => {
            assert!(hint.iter().any(|h| h.contains("[B]")), "{hint:?}");
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn fault_injection_is_caught_by_the_matching_check() {
    let s = shuttles()[0].build();
    let sol = solve(&build_lp(&s).unwrap(), &SolverConfig::default()).unwrap();
    assert!(validate_solution(&s, &sol, Tolerance::default()).unwrap().is_empty());

    let cases = [
        (VarKind::Product, 1, 2, Constraint::ProductBalance),
        (VarKind::Charge, 0, 1, Constraint::ChargeBalance),
        (VarKind::StationaryTrucks, 0, 2, Constraint::TruckBalance),
    ];
    for (kind, entity, step, expected) in cases {
        let mut bad = sol.clone();
        let c = bad.map.col(supplyflex::model::VariableKey::at(kind, entity, step)).unwrap();
        bad.values[c] += 1_000.0;
        let v = validate_solution(&s, &bad, Tolerance::default()).unwrap();
        assert!(
            v.iter().any(|x| x.constraint == expected && x.step == Some(step)),
            "{kind:?}: {v:?}"
        );
    }

    // Shrinking the fleet below the trucks in use breaks the fleet bound.
    let mut bad = sol.clone();
    let c = bad.map.col(supplyflex::model::VariableKey::fixed(VarKind::FleetSize, 0)).unwrap();
    bad.values[c] = 0.0;
    let v = validate_solution(&s, &bad, Tolerance::default()).unwrap();
    assert!(v.iter().any(|x| x.constraint == Constraint::FleetSize));
}

#[test]
fn validation_rejects_mismatched_dimensions() {
    let a = shuttles()[0].build();
    let sol = solve(&build_lp(&a).unwrap(), &SolverConfig::default()).unwrap();
    let b = one_city(0.0, 1.0);
    assert!(validate_solution(&b, &sol, Tolerance::default()).is_err());
}

#[test]
fn zero_tax_cost_scales_with_volume() {
    // Without a carbon penalty renewables never bind in cost terms, so
    // doubling every flow doubles kiln and warehouse capacity.
    let s = shuttles()[0].build();
    let doubled = s
        .with(|p| {
            p.exogenous.product_injection.scale(2.0);
            p.exogenous.raw_arrivals.scale(2.0);
            p.truck.load_kg *= 2.0;
        })
        .unwrap();
    let a = solve(&build_lp(&s).unwrap(), &SolverConfig::default()).unwrap();
    let b = solve(&build_lp(&doubled).unwrap(), &SolverConfig::default()).unwrap();
    // Trucks carry twice as much, so the fleet does not grow.
    assert_relative_eq!(b.breakdown.capex_truck, a.breakdown.capex_truck, max_relative = 1e-6);
    assert_relative_eq!(b.breakdown.capex_equipment, 2.0 * a.breakdown.capex_equipment, max_relative = 1e-6);
    assert_relative_eq!(b.breakdown.capex_warehouse, 2.0 * a.breakdown.capex_warehouse, max_relative = 1e-6);
}

#[test]
fn mps_export_lists_every_row_and_column() {
    let lp = build_lp(&shuttles()[1].build()).unwrap();
    let mut buf = Vec::new();
    lp.write_mps(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
        assert!(text.lines().any(|l| l.starts_with(section)), "{section}");
    }
    let rows = text
        .lines()
        .skip_while(|l| *l != "ROWS")
        .skip(2)
        .take_while(|l| *l != "COLUMNS")
        .count();
    assert_eq!(rows, lp.n_rows());
    let le = lp.rows.iter().filter(|r| r.sense == Sense::Le).count();
    assert_eq!(text.lines().filter(|l| l.starts_with(" L  ")).count(), le);
    let names: std::collections::BTreeSet<&str> = text
        .lines()
        .skip_while(|l| *l != "COLUMNS")
        .skip(1)
        .take_while(|l| *l != "RHS")
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert_eq!(names.len(), lp.n_cols());
}
