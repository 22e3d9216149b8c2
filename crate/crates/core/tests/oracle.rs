mod common;

use common::{fixture, shuttles};
use supplyflex::model::{build_lp, validate_solution, Tolerance, VarKind};
use supplyflex::solve::{oracle_enumerate, solve, OracleError, SolverConfig};

#[test]
fn integer_plans_are_integral_and_feasible() {
    let config = SolverConfig::default();
    for sh in shuttles() {
        let s = sh.build();
        let r = oracle_enumerate(&s, 2, &config).unwrap();
        assert!(r.feasible > 0 && r.feasible <= r.schedules);
        for kind in [VarKind::LoadedDispatch, VarKind::EmptyDispatch, VarKind::StationaryTrucks] {
            for e in 0..r.best.map.entity_count(kind) {
                for v in r.best.trajectory(kind, e) {
                    assert_eq!(v, v.round(), "{kind:?}");
                }
            }
        }
        let fleet = r.best.get_fixed(VarKind::FleetSize, 0);
        assert_eq!(fleet, fleet.round());
        assert!(validate_solution(&s, &r.best, Tolerance::default()).unwrap().is_empty());
    }
}

#[test]
fn relaxation_never_costs_more() {
    let config = SolverConfig::default();
    for sh in shuttles() {
        let s = sh.build();
        let relaxed = solve(&build_lp(&s).unwrap(), &config).unwrap();
        let integer = oracle_enumerate(&s, 2, &config).unwrap();
        assert!(
            relaxed.objective <= integer.objective * (1.0 + 1e-6),
            "{} > {}",
            relaxed.objective,
            integer.objective
        );
    }
}

#[test]
fn larger_fleet_bound_cannot_raise_the_optimum() {
    let config = SolverConfig::default();
    let s = shuttles()[0].build();
    let two = oracle_enumerate(&s, 2, &config).unwrap();
    let one = oracle_enumerate(&s, 1, &config).unwrap();
    assert!(two.objective <= one.objective * (1.0 + 1e-9));
}

#[test]
fn network_instances_are_refused() {
    let s = fixture("triangle_day");
    assert!(matches!(
        oracle_enumerate(&s, 2, &SolverConfig::default()),
        Err(OracleError::TooLarge(_))
    ));
}
