use std::path::PathBuf;

use nalgebra::Vector3;
use serde::Serialize;

use super::config::{InitialState, Precision, Resolved, RunConfig};
use super::probes::ProbeRecorder;
use super::turbine_file::parse_turbine_file;
use super::vtk::write_vtk;
use crate::lattice::UnitSystem;
use crate::perf::{lbm_kernel_cost, measure_mlups, roofline_entry, PhaseShare, RooflineEntry};
use crate::solver::{memory_estimate, Solver, SolverSetup, TurbineInstance};
use crate::{Error, Real, Result};

/// Summary written to `report.json` after a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub units: UnitSystem,
    pub global_dims: [usize; 3],
    pub block_dims: [usize; 3],
    pub blocks: usize,
    pub workers: usize,
    /// Largest minus smallest per-worker block weight.
    pub load_imbalance: f64,
    pub steps: u64,
    pub physical_time_s: f64,
    pub wall_seconds: f64,
    pub mlups: f64,
    pub phases: Vec<PhaseShare>,
    pub roofline: Vec<RooflineEntry>,
    pub turbines: Vec<TurbineSummary>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TurbineSummary {
    pub name: String,
    pub points: usize,
    /// Sum of the point loads on the turbine in the last step (N).
    pub force_n: [f64; 3],
}

/// Reads every turbine file of the configuration and places the turbines.
pub fn load_turbines(cfg: &RunConfig) -> Result<Vec<TurbineInstance>> {
    cfg.turbines
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let def = parse_turbine_file(&t.file)?;
            let name = t.name.clone().unwrap_or_else(|| format!("turbine{}", k + 1));
            def.instantiate(&name, t.position_m)
        })
        .collect()
}

/// Solver set up and initialised from a configuration.
pub fn build_solver<T: Real>(cfg: &RunConfig) -> Result<Solver<T>> {
    let r = cfg.resolve()?;
    let mut setup = SolverSetup::new(r.global_dims, r.collision, r.units);
    setup.block_dims = r.block_dims;
    setup.boundary = r.boundary;
    setup.workers = cfg.run.workers;
    setup.curve = cfg.run.curve;
    setup.turbine_weight = cfg.run.turbine_weight;
    setup.turbines = load_turbines(cfg)?;
    setup.body_force = r.units.force_density_to_lattice(cfg.flow.body_force_n_per_m3);
    let mut solver = Solver::new(setup)?;
    let u0 = match cfg.flow.initial {
        InitialState::Wind => r.units.velocity_to_lattice(cfg.flow.wind_m_per_s),
        InitialState::Rest => [0.0; 3],
    };
    solver.initialize(|_| (1.0, u0))?;
    Ok(solver)
}

/// Roofline rows for every `[[machine]]` entry of the configuration.
pub fn roofline_report(cfg: &RunConfig) -> Result<Vec<RooflineEntry>> {
    cfg.machines
        .iter()
        .map(|m| {
            let op = m.operator.unwrap_or(cfg.collision.operator);
            let bytes = m.precision_bytes.unwrap_or(cfg.run.precision.bytes());
            let cost = lbm_kernel_cost(op, bytes)?;
            Ok(roofline_entry(&m.spec()?, &cost, m.measured_mlups))
        })
        .collect()
}

/// `MemAvailable` from `/proc/meminfo`, if readable.
pub fn available_memory() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = text.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Fails early when the lattice fields cannot fit in memory.
pub fn check_memory(r: &Resolved, precision: Precision) -> Result<()> {
    let need = memory_estimate(r.global_dims, r.block_dims, precision.bytes());
    if let Some(have) = available_memory() {
        if need > have {
            return Err(Error::Config(format!(
                "domain {:?} needs about {:.1} GB for the lattice fields but only {:.1} GB are available",
                r.global_dims,
                need as f64 / 1e9,
                have as f64 / 1e9
            )));
        }
    }
    Ok(())
}

/// Runs a configuration to completion and writes probes, fields and the
/// report into the output directory.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunReport> {
    let r = cfg.resolve()?;
    check_memory(&r, cfg.run.precision)?;
    match cfg.run.precision {
        Precision::Double => run_with::<f64>(cfg, &r),
        Precision::Single => run_with::<f32>(cfg, &r),
    }
}

fn run_with<T: Real>(cfg: &RunConfig, r: &Resolved) -> Result<RunReport> {
    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if !cfg.run.deterministic {
        log::info!("all reductions are ordered; deterministic = false has no effect");
    }
    let mut solver = build_solver::<T>(cfg)?;
    log::info!(
        "{:?} cells in {} blocks on {} workers, tau = {:.6}, dt = {:.3e} s",
        r.global_dims,
        solver.grid().len(),
        solver.workers(),
        r.units.tau,
        r.units.dt
    );
    let mut outputs = Vec::new();
    let config_path = dir.join("resolved_config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(|e| Error::io(&config_path, e))?;
    outputs.push(config_path);

    let mut recorder = ProbeRecorder::new(cfg.probes.clone(), dir, cfg.output.average_start);
    let total = cfg.run.steps;
    let chunk = if cfg.output.cadence == 0 { total } else { cfg.output.cadence };
    let mut done = 0;
    while done < total {
        let n = chunk.min(total - done);
        solver.run(n)?;
        done += n;
        if n == chunk || done == total {
            outputs.extend(recorder.record(&mut solver)?);
            if cfg.output.vtk {
                let path = dir.join(format!("fields_{done:08}.vtk"));
                write_vtk(&solver, &path)?;
                outputs.push(path);
            }
            log::info!("step {done}/{total}");
        }
    }
    outputs.extend(recorder.write_averages()?);

    let timer = solver.timer();
    let mlups = if total > 0 { measure_mlups(timer)? } else { 0.0 };
    let mut turbines = Vec::new();
    for (k, t) in solver.turbines().iter().enumerate() {
        let force = solver
            .loads()
            .iter()
            .filter(|l| l.turbine == k)
            .fold(Vector3::zeros(), |acc: Vector3<f64>, l| acc + l.force);
        turbines.push(TurbineSummary { name: t.name.clone(), points: t.topology.snapshot().len(), force_n: force.into() });
    }
    let mut report = RunReport {
        config: cfg.clone(),
        units: r.units,
        global_dims: r.global_dims,
        block_dims: r.block_dims,
        blocks: solver.grid().len(),
        workers: solver.workers(),
        load_imbalance: solver.assignment().imbalance(),
        steps: total,
        physical_time_s: solver.physical_time(),
        wall_seconds: timer.wall_seconds(),
        mlups,
        phases: timer.breakdown(),
        roofline: roofline_report(cfg)?,
        turbines,
        outputs,
    };
    let report_path = dir.join("report.json");
    report.outputs.push(report_path.clone());
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Measurement(e.to_string()))?;
    std::fs::write(&report_path, json).map_err(|e| Error::io(&report_path, e))?;
    Ok(report)
}
