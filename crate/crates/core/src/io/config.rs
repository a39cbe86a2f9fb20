use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::probes::ProbeSpec;
use crate::domain::{Curve, OuterBoundary};
use crate::lattice::{
    lattice_units_from_physical, lattice_units_with_tau, CollisionConfig, CollisionOperator, UnitSystem,
    HIGHER_ORDER_RATE_COUNT,
};
use crate::perf::MachineSpec;
use crate::{Error, Result};

/// Complete run description. Only `domain` (with a size) is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub collision: CollisionSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, rename = "turbine", skip_serializing_if = "Vec::is_empty")]
    pub turbines: Vec<TurbineEntry>,
    #[serde(default, rename = "probe", skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeSpec>,
    #[serde(default, rename = "machine", skip_serializing_if = "Vec::is_empty")]
    pub machines: Vec<MachineEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    Periodic,
    InflowOutflow,
    ChannelWalls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Domain size in cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_cells: Option<[usize; 3]>,
    /// Domain size in rotor diameters; converted with `cells_per_diameter`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_diameters: Option<[f64; 3]>,
    /// Reference length D (m).
    #[serde(default = "default_diameter")]
    pub diameter_m: f64,
    #[serde(default = "default_cells_per_diameter")]
    pub cells_per_diameter: usize,
    /// Block size in cells; defaults to the whole domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_cells: Option<[usize; 3]>,
    #[serde(default)]
    pub boundary: BoundaryKind,
}

fn default_diameter() -> f64 {
    1.0
}
fn default_cells_per_diameter() -> usize {
    32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Uniform flow at the wind velocity.
    #[default]
    Wind,
    Rest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(default = "default_mach")]
    pub mach: f64,
    /// Wind velocity (m/s); its magnitude is the reference velocity.
    #[serde(default = "default_wind")]
    pub wind_m_per_s: [f64; 3],
    #[serde(default = "default_density")]
    pub density_kg_per_m3: f64,
    #[serde(default = "default_viscosity")]
    pub viscosity_m2_per_s: f64,
    /// Prescribed relaxation time; the viscosity then follows from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default)]
    pub initial: InitialState,
    /// Uniform body force density (N/m³), e.g. to drive channel flow.
    #[serde(default)]
    pub body_force_n_per_m3: [f64; 3],
}

fn default_mach() -> f64 {
    0.05
}
fn default_wind() -> [f64; 3] {
    [10.0, 0.0, 0.0]
}
fn default_density() -> f64 {
    1.225
}
fn default_viscosity() -> f64 {
    1.5e-5
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            mach: default_mach(),
            wind_m_per_s: default_wind(),
            density_kg_per_m3: default_density(),
            viscosity_m2_per_s: default_viscosity(),
            tau: None,
            initial: InitialState::Wind,
            body_force_n_per_m3: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionSection {
    #[serde(default = "default_operator")]
    pub operator: CollisionOperator,
    /// Cumulant rates above second order: none (all 1), one value for all,
    /// or one per group.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub higher_order_rates: Vec<f64>,
}

fn default_operator() -> CollisionOperator {
    CollisionOperator::Cumulant
}

impl Default for CollisionSection {
    fn default() -> Self {
        Self { operator: default_operator(), higher_order_rates: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Double,
    Single,
}

impl Precision {
    pub fn bytes(&self) -> usize {
        match self {
            Self::Double => 8,
            Self::Single => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Ordered reductions. Every reduction in this solver is ordered, so
    /// both settings give bit-identical results.
    #[serde(default = "default_true")]
    pub deterministic: bool,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub curve: Curve,
    #[serde(default = "default_turbine_weight")]
    pub turbine_weight: f64,
}

fn default_steps() -> u64 {
    100
}
fn default_workers() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_turbine_weight() -> f64 {
    0.02
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            workers: default_workers(),
            deterministic: true,
            precision: Precision::Double,
            curve: Curve::Morton,
            turbine_weight: default_turbine_weight(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub directory: PathBuf,
    /// Steps between probe/field outputs; 0 writes once at the end.
    #[serde(default)]
    pub cadence: u64,
    #[serde(default)]
    pub vtk: bool,
    /// First step of the running probe average; none disables averaging.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_start: Option<u64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_output_dir(), cadence: 0, vtk: false, average_start: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbineEntry {
    pub file: PathBuf,
    /// World translation applied to the whole turbine (m).
    #[serde(default)]
    pub position_m: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEntry {
    pub name: String,
    pub bandwidth_gb_per_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_tflop_per_s: Option<f64>,
    /// Externally measured throughput to compare against the estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_mlups: Option<f64>,
    /// Bytes per value for the cost model; defaults to the run precision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bytes: Option<usize>,
    /// Operator for the cost model; defaults to the run's operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<CollisionOperator>,
}

impl MachineEntry {
    pub fn spec(&self) -> Result<MachineSpec> {
        MachineSpec::new(
            &self.name,
            self.bandwidth_gb_per_s * 1e9,
            self.peak_tflop_per_s.map(|p| p * 1e12),
        )
    }
}

/// Quantities derived from a validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub global_dims: [usize; 3],
    pub block_dims: [usize; 3],
    pub units: UnitSystem,
    pub collision: CollisionConfig,
    pub boundary: OuterBoundary,
}

/// Reads, validates and resolves a configuration file. Relative paths inside
/// it are taken relative to the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.materialize(base_dir)?;
    cfg.resolve()?;
    Ok(cfg)
}

impl RunConfig {
    /// Configuration with every default filled in; serializing it and
    /// parsing it back yields the same run.
    fn materialize(&mut self, base_dir: &Path) -> Result<()> {
        let d = &mut self.domain;
        if d.cells_per_diameter == 0 {
            return Err(Error::Config("domain.cells_per_diameter must be positive".into()));
        }
        let from_diameters = match d.size_diameters {
            Some(s) => {
                let mut cells = [0usize; 3];
                for a in 0..3 {
                    let v = s[a] * d.cells_per_diameter as f64;
                    if !(v >= 1.0) || (v - v.round()).abs() > 1e-9 {
                        return Err(Error::Config(format!(
                            "domain.size_diameters[{a}] = {} does not give a whole number of cells",
                            s[a]
                        )));
                    }
                    cells[a] = v.round() as usize;
                }
                Some(cells)
            }
            None => None,
        };
        d.size_cells = match (d.size_cells, from_diameters) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!(
                    "domain.size_cells {a:?} disagrees with domain.size_diameters ({b:?} cells)"
                )))
            }
            (Some(a), _) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => {
                return Err(Error::Config("domain.size_cells or domain.size_diameters is required".into()))
            }
        };
        if d.block_cells.is_none() {
            d.block_cells = d.size_cells;
        }
        if self.collision.operator == CollisionOperator::Cumulant && self.collision.higher_order_rates.len() <= 1 {
            let r = self.collision.higher_order_rates.first().copied().unwrap_or(1.0);
            self.collision.higher_order_rates = vec![r; HIGHER_ORDER_RATE_COUNT];
        }
        let absolute = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        self.output.directory = absolute(&self.output.directory);
        for t in &mut self.turbines {
            t.file = absolute(&t.file);
        }
        for (k, t) in self.turbines.iter_mut().enumerate() {
            if t.name.is_none() {
                t.name = Some(format!("turbine{}", k + 1));
            }
        }
        Ok(())
    }

    /// Validates the whole configuration and derives lattice quantities.
    pub fn resolve(&self) -> Result<Resolved> {
        let d = &self.domain;
        let global_dims = d
            .size_cells
            .ok_or_else(|| Error::Config("domain.size_cells or domain.size_diameters is required".into()))?;
        if global_dims.contains(&0) {
            return Err(Error::Config("domain.size_cells must be positive".into()));
        }
        let block_dims = d.block_cells.unwrap_or(global_dims);
        for a in 0..3 {
            if block_dims[a] == 0 || global_dims[a] % block_dims[a] != 0 {
                return Err(Error::Config(format!(
                    "domain.block_cells {block_dims:?} must divide domain.size_cells {global_dims:?}"
                )));
            }
        }
        let f = &self.flow;
        let speed = f.wind_m_per_s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::Config("flow.wind_m_per_s must be a non-zero velocity".into()));
        }
        if !(f.density_kg_per_m3 > 0.0) {
            return Err(Error::Config("flow.density_kg_per_m3 must be positive".into()));
        }
        if !(d.diameter_m > 0.0) {
            return Err(Error::Config("domain.diameter_m must be positive".into()));
        }
        let units = match f.tau {
            Some(tau) => lattice_units_with_tau(d.diameter_m, d.cells_per_diameter, speed, f.mach, tau),
            None => lattice_units_from_physical(d.diameter_m, d.cells_per_diameter, speed, f.mach, f.viscosity_m2_per_s),
        }
        .map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Config(format!("flow: {m}")),
            other => other,
        })?
        .with_density(f.density_kg_per_m3);
        let collision = CollisionConfig::new(self.collision.operator, units.omega())
            .and_then(|c| match self.collision.operator {
                CollisionOperator::Cumulant => c.with_higher_order_rates(&self.collision.higher_order_rates),
                CollisionOperator::Bgk if self.collision.higher_order_rates.is_empty() => Ok(c),
                CollisionOperator::Bgk => Err(Error::Config(
                    "collision.higher_order_rates only applies to the cumulant operator".into(),
                )),
            })
            .map_err(|e| Error::Config(format!("collision: {e}")))?;
        let boundary = match d.boundary {
            BoundaryKind::Periodic => OuterBoundary::Periodic,
            BoundaryKind::InflowOutflow => OuterBoundary::VelocityInflowOutflow {
                u_in: units.velocity_to_lattice(f.wind_m_per_s),
            },
            BoundaryKind::ChannelWalls => OuterBoundary::ChannelWalls,
        };
        boundary.validate()?;
        let r = &self.run;
        if r.workers == 0 {
            return Err(Error::Config("run.workers must be at least 1".into()));
        }
        if !(r.turbine_weight >= 0.0 && r.turbine_weight.is_finite()) {
            return Err(Error::Config("run.turbine_weight must be non-negative".into()));
        }
        let extent = global_dims.map(|n| n as f64 * units.dx);
        let turbine_names: Vec<String> = self.turbines.iter().filter_map(|t| t.name.clone()).collect();
        for p in &self.probes {
            p.validate(extent, &turbine_names)?;
        }
        let mut names = std::collections::HashSet::new();
        for p in &self.probes {
            if !names.insert(p.name()) {
                return Err(Error::Config(format!("probe name '{}' is used twice", p.name())));
            }
        }
        for m in &self.machines {
            m.spec()?;
            if let Some(b) = m.precision_bytes {
                if b != 4 && b != 8 {
                    return Err(Error::Config(format!("machine '{}': precision_bytes must be 4 or 8", m.name)));
                }
            }
        }
        Ok(Resolved { global_dims, block_dims, units, collision, boundary })
    }

    /// Fully resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
