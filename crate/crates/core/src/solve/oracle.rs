//! Brute-force integer oracle for tiny instances.
//!
//! Every integer truck schedule (dispatches, parked trucks, fleet size) up to
//! a fleet bound is enumerated; for each one the truck columns are fixed and
//! the remaining continuous LP is solved. The best objective is the integer
//! optimum the relaxed LP bounds from below.

use super::{backend, PlanSolution, RawOutcome, SolveError, SolveStatus, SolverConfig, SolverMeta};
use crate::model::{build_lp, ModelError, VarKind, VariableKey};
use crate::scenario::Scenario;
use rayon::prelude::*;

/// Hard cap on the number of schedules whose residual LP is solved.
pub const ORACLE_MAX_SCHEDULES: usize = 200_000;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error("no integer schedule is feasible")]
    Infeasible,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub objective: f64,
    /// Best plan found; its truck columns are integral.
    pub best: PlanSolution,
    /// Schedules whose residual LP was solved.
    pub schedules: usize,
    /// Schedules with a feasible residual LP.
    pub feasible: usize,
}

/// Integer truck decisions: per-step dispatch counts and the parked trucks
/// before step 0 (equal to the parked trucks after the last step).
#[derive(Debug, Clone)]
struct Schedule {
    loaded: Vec<Vec<u32>>,
    empty: Vec<Vec<u32>>,
    parked_start: Vec<i64>,
    fleet: u32,
}

struct Enumerator<'a> {
    s: &'a Scenario,
    max_fleet: u32,
    loaded: Vec<Vec<u32>>,
    empty: Vec<Vec<u32>>,
    cum: Vec<i64>,
    min_cum: Vec<i64>,
    out: Vec<Schedule>,
    overflow: bool,
}

impl Enumerator<'_> {
    fn in_transit(&self, t: usize) -> i64 {
        let mut n = 0;
        for (k, p) in self.s.paths.iter().enumerate() {
            for lag in 0..p.travel_steps {
                if lag <= t {
                    n += i64::from(self.loaded[k][t - lag] + self.empty[k][t - lag]);
                }
            }
        }
        n
    }

    /// Enumerates the dispatches of step `t`, path by path.
    fn step(&mut self, t: usize) {
        if self.overflow {
            return;
        }
        let n = self.s.n_steps();
        if t == n {
            self.finish();
            return;
        }
        self.path(t, 0);
    }

    fn path(&mut self, t: usize, k: usize) {
        if self.overflow {
            return;
        }
        if k == self.s.paths.len() {
            self.close_step(t);
            return;
        }
        let used: u32 = (0..k).map(|j| self.loaded[j][t] + self.empty[j][t]).sum();
        let room = self.max_fleet - used;
        for a in 0..=room {
            for b in 0..=(room - a) {
                self.loaded[k][t] = a;
                self.empty[k][t] = b;
                self.path(t, k + 1);
            }
        }
        self.loaded[k][t] = 0;
        self.empty[k][t] = 0;
    }

    /// Applies the step's arrivals and departures to the running net
    /// position of each location and prunes on the fleet bound.
    fn close_step(&mut self, t: usize) {
        let s = self.s;
        let saved = (self.cum.clone(), self.min_cum.clone());
        for (k, p) in s.paths.iter().enumerate() {
            self.cum[p.origin] -= i64::from(self.loaded[k][t] + self.empty[k][t]);
            // Arrivals from departures inside the horizon so far; wrapped
            // arrivals are settled in `finish`.
            if t >= p.travel_steps {
                let d = t - p.travel_steps;
                self.cum[p.dest] += i64::from(self.loaded[k][d] + self.empty[k][d]);
            }
        }
        for i in 0..s.n_locations() {
            self.min_cum[i] = self.min_cum[i].min(self.cum[i]);
        }
        let occupied: i64 = (0..s.n_locations()).map(|i| self.cum[i] - self.min_cum[i]).sum::<i64>() + self.in_transit(t);
        if occupied <= i64::from(self.max_fleet) {
            self.step(t + 1);
        }
        (self.cum, self.min_cum) = saved;
    }

    /// Settles the cyclic wrap: replays the horizon with wrapped arrivals and
    /// emits every starting distribution of parked trucks within the bound.
    fn finish(&mut self) {
        let s = self.s;
        let h = &s.horizon;
        let n = s.n_steps();
        let n_loc = s.n_locations();
        let mut net = vec![vec![0i64; n]; n_loc];
        let mut running = vec![0i64; n_loc];
        let mut transit = vec![0i64; n];
        for t in 0..n {
            for (k, p) in s.paths.iter().enumerate() {
                let dep = i64::from(self.loaded[k][t] + self.empty[k][t]);
                running[p.origin] -= dep;
                let d = h.lag(t, p.travel_steps);
                running[p.dest] += i64::from(self.loaded[k][d] + self.empty[k][d]);
                for lag in 0..p.travel_steps {
                    let d = h.lag(t, lag);
                    transit[t] += i64::from(self.loaded[k][d] + self.empty[k][d]);
                }
            }
            for i in 0..n_loc {
                net[i][t] = running[i];
            }
        }
        if running.iter().any(|&r| r != 0) {
            return;
        }
        let base: Vec<i64> = net.iter().map(|row| (-row.iter().copied().min().unwrap_or(0)).max(0)).collect();
        let peak = (0..n)
            .map(|t| (0..n_loc).map(|i| base[i] + net[i][t]).sum::<i64>() + transit[t])
            .max()
            .unwrap_or(0);
        if peak > i64::from(self.max_fleet) {
            return;
        }
        let spare = i64::from(self.max_fleet) - peak;
        let mut extra = vec![0i64; n_loc];
        self.spread(&base, peak, spare, 0, &mut extra);
    }

    fn spread(&mut self, base: &[i64], peak: i64, spare: i64, i: usize, extra: &mut Vec<i64>) {
        if i == base.len() {
            if self.out.len() >= ORACLE_MAX_SCHEDULES {
                self.overflow = true;
                return;
            }
            let added: i64 = extra.iter().sum();
            self.out.push(Schedule {
                loaded: self.loaded.clone(),
                empty: self.empty.clone(),
                parked_start: base.iter().zip(extra.iter()).map(|(b, e)| b + e).collect(),
                fleet: (peak + added) as u32,
            });
            return;
        }
        let used: i64 = extra[..i].iter().sum();
        for e in 0..=(spare - used) {
            extra[i] = e;
            self.spread(base, peak, spare, i + 1, extra);
        }
        extra[i] = 0;
    }
}

/// Exhaustive integer optimum over truck schedules with at most `max_fleet`
/// trucks. Limited to 2 locations, 8 steps and a fleet of 3.
pub fn oracle_enumerate(s: &Scenario, max_fleet: u32, config: &SolverConfig) -> Result<OracleResult, OracleError> {
    if s.n_locations() > 2 || s.n_steps() > 8 || max_fleet > 3 {
        return Err(OracleError::TooLarge(format!(
            "{} locations, {} steps, fleet {max_fleet} (limit 2, 8, 3)",
            s.n_locations(),
            s.n_steps()
        )));
    }
    let lp = build_lp(s)?;
    let n = s.n_steps();
    let n_paths = s.paths.len();
    let mut en = Enumerator {
        s,
        max_fleet,
        loaded: vec![vec![0; n]; n_paths],
        empty: vec![vec![0; n]; n_paths],
        cum: vec![0; s.n_locations()],
        min_cum: vec![0; s.n_locations()],
        out: Vec::new(),
        overflow: false,
    };
    if n_paths == 0 {
        en.out.push(Schedule {
            loaded: Vec::new(),
            empty: Vec::new(),
            parked_start: Vec::new(),
            fleet: 0,
        });
    } else {
        en.step(0);
    }
    if en.overflow {
        return Err(OracleError::TooLarge(format!("more than {ORACLE_MAX_SCHEDULES} schedules")));
    }
    let schedules = en.out;
    let be = backend(&config.backend)?;
    let map = &lp.map;
    let h = &s.horizon;

    let results: Vec<Result<Option<Vec<f64>>, SolveError>> = schedules
        .par_iter()
        .map(|sch| {
            let mut lower = lp.lower.clone();
            let mut upper = lp.upper.clone();
            let mut fix = |key: VariableKey, v: f64| {
                if let Some(c) = map.col(key) {
                    lower[c] = v;
                    upper[c] = v;
                }
            };
            if n_paths > 0 {
                fix(VariableKey::fixed(VarKind::FleetSize, 0), f64::from(sch.fleet));
                let mut parked = sch.parked_start.clone();
                for t in 0..n {
                    for (k, p) in s.paths.iter().enumerate() {
                        fix(VariableKey::at(VarKind::LoadedDispatch, k, t), f64::from(sch.loaded[k][t]));
                        fix(VariableKey::at(VarKind::EmptyDispatch, k, t), f64::from(sch.empty[k][t]));
                        parked[p.origin] -= i64::from(sch.loaded[k][t] + sch.empty[k][t]);
                        let d = h.lag(t, p.travel_steps);
                        parked[p.dest] += i64::from(sch.loaded[k][d] + sch.empty[k][d]);
                    }
                    for (i, &y) in parked.iter().enumerate() {
                        fix(VariableKey::at(VarKind::StationaryTrucks, i, t), y as f64);
                    }
                }
            }
            match be.solve_raw(&lp.objective, &lower, &upper, &lp.rows, config)? {
                RawOutcome::Optimal(x) => Ok(Some(x)),
                RawOutcome::Infeasible => Ok(None),
                RawOutcome::Unbounded => Err(SolveError::Unbounded),
                RawOutcome::TimeLimit => Err(SolveError::TimeLimit),
            }
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible = 0;
    for r in results {
        if let Some(x) = r? {
            feasible += 1;
            let obj = lp.objective_value(&x);
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, x));
            }
        }
    }
    let (objective, x) = best.ok_or(OracleError::Infeasible)?;
    let sol = PlanSolution {
        map: lp.map.clone(),
        objective,
        breakdown: super::breakdown_from_lp(&lp, &x),
        status: SolveStatus::Optimal,
        meta: SolverMeta {
            backend: format!("{}+enumeration", be.name()),
            k_power: lp.k_power,
            n_cols: lp.n_cols(),
            n_rows: lp.n_rows(),
            max_violation: lp.max_violation(&x),
        },
        values: x,
    };
    Ok(OracleResult {
        objective,
        best: sol,
        schedules: schedules.len(),
        feasible,
    })
}
