//! Command-line front end: `solve`, `bess` and `sweep` subcommands.
//!
//! Each command writes its outputs plus one `manifest.json` into `--out`.
//! Exit codes: 0 ok, 1 error, 2 infeasible.

use crate::bess::{compare, write_bess};
use crate::kpi::{format_table, kpi_report, write_series_csv};
use crate::model::build_lp;
use crate::scenario::{load_scenario, DemandClearing, Scenario};
use crate::solve::{solve, write_solution, SolveError, SolverConfig, SolverMeta};
use crate::sweep::{run_sweep, workers_from_env, CellStatus, SweepSpec};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "supplyflex", version, about = "Demand flexibility of an electrified supply chain")]
pub struct Cli {
    /// TOML file overriding solver settings and worker count.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// LP backend (microlp, or highs when built with that feature).
    #[arg(long, global = true)]
    pub backend: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario at one carbon tax.
    Solve(SolveArgs),
    /// Compare the flexible plan with a battery on the frozen zero-tax plan.
    Bess(BessArgs),
    /// Run a tax / cost-scale grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub scenario_dir: PathBuf,
    /// Carbon tax, $/t CO2.
    #[arg(long, default_value_t = 0.0)]
    pub tax: f64,
    /// Override the scenario's demand clearing (per-step, weekly, monthly).
    #[arg(long)]
    pub clearing: Option<DemandClearing>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BessArgs {
    pub scenario_dir: PathBuf,
    /// Comma-separated carbon taxes, $/t CO2.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 50.0, 100.0, 250.0, 500.0, 1000.0, 2000.0])]
    pub tax: Vec<f64>,
    #[arg(long)]
    pub clearing: Option<DemandClearing>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub scenario_dir: PathBuf,
    /// TOML grid spec (taxes, truck_scales, mfg_scales, clearings, workers).
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Contents of the `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub backend: Option<String>,
    pub feasibility_tol: Option<f64>,
    pub optimality_tol: Option<f64>,
    pub time_limit_secs: Option<f64>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            backend: self.backend.clone().unwrap_or(d.backend),
            feasibility_tol: self.feasibility_tol.unwrap_or(d.feasibility_tol),
            optimality_tol: self.optimality_tol.unwrap_or(d.optimality_tol),
            time_limit: self.time_limit_secs.map(Duration::from_secs_f64),
        }
    }
}

/// Settings actually used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub solver: SolverConfig,
    pub workers: Option<usize>,
    pub args: Vec<(String, String)>,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub scenario_dir: String,
    /// SHA-256 over the scenario directory's files (see [`scenario_hash`]).
    pub scenario_hash: String,
    pub config: ConfigSnapshot,
    pub solver: Option<SolverMeta>,
    pub status: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    /// Files written, relative to the output directory, sorted.
    pub outputs: Vec<String>,
}

/// Hash of every regular file directly inside `dir`, visited in name order.
/// Carriage returns are dropped so checkouts on any platform agree.
pub fn scenario_hash(dir: &Path) -> std::io::Result<String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut bytes = fs::read(&f)?;
        bytes.retain(|&b| b != b'\r');
        h.update(name.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// A failed stage, reported on stderr.
struct Failure {
    stage: &'static str,
    message: String,
    code: i32,
}

fn fail(stage: &'static str) -> impl Fn(&dyn Display) -> Failure {
    move |e| Failure {
        stage,
        message: e.to_string(),
        code: EXIT_ERROR,
    }
}

fn solve_failure(e: SolveError) -> Failure {
    match e {
        SolveError::Infeasible { hint } => {
            let mut message = "scenario is infeasible".to_string();
            if !hint.is_empty() {
                message.push_str("; rows that cannot hold together:");
                for h in &hint {
                    message.push_str("\n  ");
                    message.push_str(h);
                }
            }
            Failure {
                stage: "solve",
                message,
                code: EXIT_INFEASIBLE,
            }
        }
        other => fail("solve")(&other),
    }
}

struct Run {
    command: &'static str,
    scenario_dir: PathBuf,
    out: PathBuf,
    solver: SolverConfig,
    workers: Option<usize>,
    args: Vec<(String, String)>,
    started: u64,
    outputs: Vec<String>,
    meta: Option<SolverMeta>,
}

impl Run {
    fn record(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    fn write_manifest(&mut self, status: &str) -> Result<(), Failure> {
        let hash = scenario_hash(&self.scenario_dir).map_err(|e| fail("manifest")(&e))?;
        self.outputs.sort();
        self.outputs.dedup();
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            scenario_dir: self.scenario_dir.display().to_string(),
            scenario_hash: hash,
            config: ConfigSnapshot {
                solver: self.solver.clone(),
                workers: self.workers,
                args: self.args.clone(),
            },
            solver: self.meta.clone(),
            status: status.into(),
            started_unix_s: self.started,
            finished_unix_s: now(),
            outputs: self.outputs.clone(),
        };
        fs::create_dir_all(&self.out).map_err(|e| fail("manifest")(&e))?;
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| fail("manifest")(&e))?;
        fs::write(self.out.join(MANIFEST_FILE), json + "\n").map_err(|e| fail("manifest")(&e))
    }
}

fn load(dir: &Path, clearing: Option<DemandClearing>) -> Result<Scenario, Failure> {
    let s = load_scenario(dir).map_err(|e| fail("load")(&e))?;
    match clearing {
        Some(c) => s.with_clearing(c).map_err(|e| fail("configure")(&e)),
        None => Ok(s),
    }
}

fn io_err(e: std::io::Error) -> Failure {
    fail("write")(&e)
}

fn solve_inner(run: &mut Run, a: &SolveArgs) -> Result<(), Failure> {
    let s = load(&a.scenario_dir, a.clearing)?
        .with_carbon_tax(a.tax)
        .map_err(|e| fail("configure")(&e))?;
    let lp = build_lp(&s).map_err(|e| fail("build")(&e))?;
    let sol = solve(&lp, &run.solver).map_err(solve_failure)?;
    run.meta = Some(sol.meta.clone());

    write_solution(&sol, &run.out.join("solution")).map_err(io_err)?;
    for kind in sol.map.kinds() {
        run.record(format!("solution/{}.csv", kind.file_stem()));
    }
    run.record("solution/summary.json");
    let report = kpi_report(&sol, &s);
    let json = serde_json::to_string_pretty(&report).map_err(|e| fail("write")(&e))?;
    fs::write(run.out.join("kpi.json"), json + "\n").map_err(io_err)?;
    let table = format_table(&[(format!("tax {}", a.tax), &report)]);
    fs::write(run.out.join("kpi.txt"), &table).map_err(io_err)?;
    write_series_csv(&run.out.join("cumulative_energy.csv"), "cumulative_kwh", &report.cumulative_energy_kwh)
        .map_err(io_err)?;
    run.outputs.extend(["kpi.json", "kpi.txt", "cumulative_energy.csv"].map(String::from));
    print!("{table}");
    Ok(())
}

fn bess_inner(run: &mut Run, a: &BessArgs) -> Result<(), Failure> {
    let s = load(&a.scenario_dir, a.clearing)?;
    let cmp = compare(&s, &a.tax, &run.solver).map_err(|e| match e {
        crate::bess::BessError::Solve(e) => solve_failure(e),
        other => fail("bess")(&other),
    })?;
    fs::create_dir_all(&run.out).map_err(io_err)?;
    fs::write(run.out.join("comparison.csv"), cmp.to_csv()).map_err(io_err)?;
    run.record("comparison.csv");
    for (i, b) in cmp.batteries.iter().enumerate() {
        let stem = format!("battery_{i:02}");
        write_bess(b, &run.out.join("battery"), &stem).map_err(io_err)?;
        run.record(format!("battery/{stem}.csv"));
        run.record(format!("battery/{stem}.json"));
    }
    print!("{}", cmp.to_csv());
    Ok(())
}

fn sweep_inner(run: &mut Run, a: &SweepArgs) -> Result<(), Failure> {
    let s = load(&a.scenario_dir, None)?;
    let text = fs::read_to_string(&a.grid).map_err(|e| fail("grid")(&e))?;
    let mut spec = SweepSpec::from_toml(&text).map_err(|e| fail("grid")(&e))?;
    if spec.workers.is_none() {
        spec.workers = run.workers;
    }
    run.workers = spec.resolved_workers();
    let result = run_sweep(&s, &spec, &run.solver).map_err(|e| fail("sweep")(&e))?;
    result.write(&run.out).map_err(io_err)?;
    run.outputs.extend(["sweep.csv", "sweep.json"].map(String::from));
    for r in result.failed() {
        eprintln!(
            "warning: cell tax={} truck={} mfg={} {}: {}",
            r.point.tax,
            r.point.truck_scale,
            r.point.mfg_scale,
            r.point.clearing,
            r.message.as_deref().unwrap_or("no detail")
        );
    }
    print!("{}", result.to_csv());
    if result.rows.iter().all(|r| r.status == CellStatus::Infeasible) {
        return Err(Failure {
            stage: "sweep",
            message: "every grid cell is infeasible".into(),
            code: EXIT_INFEASIBLE,
        });
    }
    Ok(())
}

fn read_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| fail("config")(&e))?;
    toml::from_str(&text).map_err(|e| fail("config")(&e))
}

/// Runs one parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let config = match read_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(f) => return report(f),
    };
    let mut solver = config.solver();
    if let Some(b) = &cli.backend {
        solver.backend = b.clone();
    }
    let workers = config.workers.or_else(workers_from_env);
    let (command, scenario_dir, out, args) = match &cli.command {
        Command::Solve(a) => (
            "solve",
            &a.scenario_dir,
            &a.out,
            vec![
                ("tax".to_string(), a.tax.to_string()),
                ("clearing".to_string(), a.clearing.map(|c| c.to_string()).unwrap_or_default()),
            ],
        ),
        Command::Bess(a) => (
            "bess",
            &a.scenario_dir,
            &a.out,
            vec![
                ("tax".to_string(), a.tax.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
                ("clearing".to_string(), a.clearing.map(|c| c.to_string()).unwrap_or_default()),
            ],
        ),
        Command::Sweep(a) => (
            "sweep",
            &a.scenario_dir,
            &a.out,
            vec![("grid".to_string(), a.grid.display().to_string())],
        ),
    };
    let mut run = Run {
        command,
        scenario_dir: scenario_dir.clone(),
        out: out.clone(),
        solver,
        workers,
        args,
        started: now(),
        outputs: Vec::new(),
        meta: None,
    };
    let result = match &cli.command {
        Command::Solve(a) => solve_inner(&mut run, a),
        Command::Bess(a) => bess_inner(&mut run, a),
        Command::Sweep(a) => sweep_inner(&mut run, a),
    };
    let status = match &result {
        Ok(()) => "ok",
        Err(f) if f.code == EXIT_INFEASIBLE => "infeasible",
        Err(_) => "error",
    };
    // A load failure has no scenario to hash; skip the manifest then.
    let manifest = if result.as_ref().err().map(|f| f.stage) == Some("load") {
        Ok(())
    } else {
        run.write_manifest(status)
    };
    match (result, manifest) {
        (Ok(()), Ok(())) => EXIT_OK,
        (Err(f), _) | (Ok(()), Err(f)) => report(f),
    }
}

fn report(f: Failure) -> i32 {
    eprintln!("error [{}]: {}", f.stage, f.message);
    f.code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_line_endings_and_tracks_content() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        fs::write(a.path().join("x.csv"), "a,b\n1,2\n").unwrap();
        fs::write(b.path().join("x.csv"), "a,b\r\n1,2\r\n").unwrap();
        let ha = scenario_hash(a.path()).unwrap();
        assert_eq!(ha, scenario_hash(b.path()).unwrap());
        assert_eq!(ha.len(), 64);
        fs::write(b.path().join("x.csv"), "a,b\n1,3\n").unwrap();
        assert_ne!(ha, scenario_hash(b.path()).unwrap());
    }

    #[test]
    fn config_file_overrides_defaults() {
        let c: RunConfig = toml::from_str("backend = \"microlp\"\nfeasibility_tol = 1e-7\nworkers = 2").unwrap();
        let s = c.solver();
        assert_eq!(s.feasibility_tol, 1e-7);
        assert_eq!(s.optimality_tol, SolverConfig::default().optimality_tol);
        assert!(toml::from_str::<RunConfig>("nope = 1").is_err());
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["supplyflex", "bess", "dir", "--tax", "0,50", "--out", "o"]).unwrap();
        match cli.command {
            Command::Bess(a) => assert_eq!(a.tax, vec![0.0, 50.0]),
            _ => panic!("wrong command"),
        }
        let cli = Cli::try_parse_from(["supplyflex", "solve", "d", "--clearing", "monthly", "--out", "o"]).unwrap();
        match cli.command {
            Command::Solve(a) => assert_eq!(a.clearing, Some(DemandClearing::Monthly)),
            _ => panic!("wrong command"),
        }
        assert!(Cli::try_parse_from(["supplyflex", "solve", "d", "--clearing", "daily", "--out", "o"]).is_err());
    }
}
