use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::actuator::section_axes;
use crate::solver::Solver;
use crate::turbine::{Discretization, PointKind};
use crate::{Error, Real, Result};

/// A sampled quantity written to CSV at every output tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// Streamwise velocity along a line parallel to x.
    AxialLine {
        name: String,
        y_m: f64,
        z_m: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_start_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_end_m: Option<f64>,
        resolution: usize,
    },
    /// Streamwise velocity along a line parallel to y.
    RadialProfile {
        name: String,
        x_m: f64,
        z_m: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_start_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_end_m: Option<f64>,
        resolution: usize,
    },
    /// Sectional normal and tangential loads of one blade.
    BladeLoads {
        name: String,
        turbine: String,
        component: String,
    },
}

pub const AXIAL_LINE_HEADER: [&str; 2] = ["x_m", "u_axial_m_per_s"];
pub const RADIAL_PROFILE_HEADER: [&str; 2] = ["y_m", "u_axial_m_per_s"];
pub const BLADE_LOADS_HEADER: [&str; 3] = ["r_over_R", "f_normal_N_per_m", "f_tangential_N_per_m"];

impl ProbeSpec {
    pub fn name(&self) -> &str {
        match self {
            Self::AxialLine { name, .. } | Self::RadialProfile { name, .. } | Self::BladeLoads { name, .. } => name,
        }
    }

    pub fn header(&self) -> &'static [&'static str] {
        match self {
            Self::AxialLine { .. } => &AXIAL_LINE_HEADER,
            Self::RadialProfile { .. } => &RADIAL_PROFILE_HEADER,
            Self::BladeLoads { .. } => &BLADE_LOADS_HEADER,
        }
    }

    /// Checks names, resolutions and that line probes stay inside a domain
    /// of the given physical extent.
    pub fn validate(&self, extent: [f64; 3], turbine_names: &[String]) -> Result<()> {
        let name = self.name();
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(Error::Config(format!("probe name '{name}' is not a valid file stem")));
        }
        let inside = |v: f64, axis: usize, what: &str| {
            if v >= 0.0 && v <= extent[axis] {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "probe '{name}': {what} = {v} lies outside the domain [0, {}]",
                    extent[axis]
                )))
            }
        };
        match self {
            Self::AxialLine { y_m, z_m, resolution, .. } | Self::RadialProfile { x_m: y_m, z_m, resolution, .. } => {
                if *resolution == 0 {
                    return Err(Error::Config(format!("probe '{name}': resolution must be positive")));
                }
                let (line_axis, other) = match self {
                    Self::AxialLine { .. } => (0, 1),
                    _ => (1, 0),
                };
                inside(*y_m, other, "offset")?;
                inside(*z_m, 2, "z_m")?;
                let (a, b) = self.line_range(extent).expect("line probe");
                inside(a, line_axis, "start")?;
                inside(b, line_axis, "end")?;
                if b < a {
                    return Err(Error::Config(format!("probe '{name}': end lies before start")));
                }
                Ok(())
            }
            Self::BladeLoads { turbine, .. } => {
                if turbine_names.iter().any(|t| t == turbine) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("probe '{name}': unknown turbine '{turbine}'")))
                }
            }
        }
    }

    fn line_range(&self, extent: [f64; 3]) -> Option<(f64, f64)> {
        match self {
            Self::AxialLine { x_start_m, x_end_m, .. } => Some((x_start_m.unwrap_or(0.0), x_end_m.unwrap_or(extent[0]))),
            Self::RadialProfile { y_start_m, y_end_m, .. } => {
                Some((y_start_m.unwrap_or(0.0), y_end_m.unwrap_or(extent[1])))
            }
            Self::BladeLoads { .. } => None,
        }
    }

    /// Sample positions (m) of a line probe: evenly spaced, end points
    /// included.
    pub fn positions(&self, extent: [f64; 3]) -> Vec<[f64; 3]> {
        let (a, b) = match self.line_range(extent) {
            Some(r) => r,
            None => return Vec::new(),
        };
        let (n, fixed) = match self {
            Self::AxialLine { resolution, y_m, z_m, .. } => (*resolution, [*y_m, *z_m]),
            Self::RadialProfile { resolution, x_m, z_m, .. } => (*resolution, [*x_m, *z_m]),
            Self::BladeLoads { .. } => unreachable!(),
        };
        (0..n)
            .map(|k| {
                let s = if n == 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (n - 1) as f64 };
                match self {
                    Self::AxialLine { .. } => [s, fixed[0], fixed[1]],
                    _ => [fixed[0], s, fixed[1]],
                }
            })
            .collect()
    }
}

/// Rows of one probe sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
}

impl ProbeTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(self.header).map_err(|e| csv_error(path, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_value(*v))).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = r.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            rows.push(row);
        }
        Ok((header, rows))
    }
}

/// Shortest representation that parses back to the same value.
fn format_value(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Samples one probe at the solver's current state.
pub fn sample_probe<T: Real>(solver: &mut Solver<T>, probe: &ProbeSpec) -> Result<ProbeTable> {
    let dims = solver.grid().global_dims();
    let dx = solver.units().dx;
    let extent = dims.map(|n| n as f64 * dx);
    match probe {
        ProbeSpec::AxialLine { .. } | ProbeSpec::RadialProfile { .. } => {
            let axis = if matches!(probe, ProbeSpec::AxialLine { .. }) { 0 } else { 1 };
            let mut rows = Vec::new();
            for x in probe.positions(extent) {
                let (_, u) = solver.sample_physical(x)?;
                rows.push(vec![x[axis], u[0]]);
            }
            Ok(ProbeTable { header: probe.header(), rows })
        }
        ProbeSpec::BladeLoads { turbine, component, name } => {
            let t = solver
                .turbines()
                .iter()
                .position(|i| &i.name == turbine)
                .ok_or_else(|| Error::Config(format!("probe '{name}': unknown turbine '{turbine}'")))?;
            let rows = blade_loads(solver, t, component)
                .map_err(|e| Error::Config(format!("probe '{name}': {e}")))?;
            Ok(ProbeTable { header: probe.header(), rows })
        }
    }
}

/// Sectional loads per unit span of a line component from the latest
/// coupling step: `r/R`, load along the section normal (chord × span) and
/// along the chord axis.
/// `r` is the distance of the element from the line start and `R` the
/// distance of the outer element edge.
fn blade_loads<T: Real>(solver: &Solver<T>, turbine: usize, component: &str) -> Result<Vec<Vec<f64>>> {
    let root = solver.turbines()[turbine].topology.root();
    let mut found = None;
    let mut id = 0;
    root.visit(&mut |c| {
        if c.name == component {
            found = Some((id, c));
        }
        id += 1;
    });
    let (id, comp) = found.ok_or_else(|| Error::Config(format!("unknown component '{component}'")))?;
    let spec = match &comp.discretization {
        Discretization::Line(spec) => spec,
        _ => return Err(Error::Config(format!("component '{component}' is not a line"))),
    };
    let radii: Vec<f64> = spec.points.iter().map(|p| p.offset.norm()).collect();
    let tip = spec
        .points
        .iter()
        .zip(&radii)
        .map(|(p, r)| r + 0.5 * p.length)
        .fold(0.0, f64::max);
    if !(tip > 0.0) {
        return Err(Error::Degenerate(format!("line '{component}' has zero extent")));
    }
    let mut rows = Vec::new();
    for load in solver.loads().iter().filter(|l| l.turbine == turbine && l.point.component == id) {
        let PointKind::BladeElement { length, .. } = load.point.kind else { continue };
        let (chord, normal, _) = section_axes(&load.point.transform.t);
        let f: Vector3<f64> = load.force;
        rows.push(vec![radii[load.point.index] / tip, f.dot(&normal) / length, f.dot(&chord) / length]);
    }
    Ok(rows)
}

/// Writes per-tick probe files and keeps a running average.
#[derive(Debug)]
pub struct ProbeRecorder {
    probes: Vec<ProbeSpec>,
    directory: PathBuf,
    average_start: Option<u64>,
    sums: Vec<Option<ProbeTable>>,
    count: u64,
}

impl ProbeRecorder {
    pub fn new(probes: Vec<ProbeSpec>, directory: &Path, average_start: Option<u64>) -> Self {
        let n = probes.len();
        Self { probes, directory: directory.to_path_buf(), average_start, sums: vec![None; n], count: 0 }
    }

    pub fn file_name(name: &str, step: u64) -> String {
        format!("{name}_{step:08}.csv")
    }

    /// Samples every probe at the solver's current step and writes one file
    /// per probe. Returns the written paths.
    pub fn record<T: Real>(&mut self, solver: &mut Solver<T>) -> Result<Vec<PathBuf>> {
        let step = solver.steps_done();
        let averaging = self.average_start.is_some_and(|s| step >= s);
        let mut written = Vec::new();
        for k in 0..self.probes.len() {
            let table = sample_probe(solver, &self.probes[k])?;
            let path = self.directory.join(Self::file_name(self.probes[k].name(), step));
            table.write_csv(&path)?;
            written.push(path);
            if averaging {
                match &mut self.sums[k] {
                    Some(sum) if shape_matches(sum, &table) => {
                        for (s, r) in sum.rows.iter_mut().zip(&table.rows) {
                            for (a, b) in s.iter_mut().zip(r) {
                                *a += b;
                            }
                        }
                    }
                    Some(_) => {
                        return Err(Error::Measurement(format!(
                            "probe '{}' changed shape during averaging",
                            self.probes[k].name()
                        )))
                    }
                    slot => *slot = Some(table),
                }
            }
        }
        if averaging {
            self.count += 1;
        }
        Ok(written)
    }

    /// Writes `<name>_mean.csv` for every probe that was averaged.
    pub fn write_averages(&self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if self.count == 0 {
            return Ok(written);
        }
        let n = self.count as f64;
        for (probe, sum) in self.probes.iter().zip(&self.sums) {
            if let Some(sum) = sum {
                let mean = ProbeTable {
                    header: sum.header,
                    rows: sum.rows.iter().map(|r| r.iter().map(|v| v / n).collect()).collect(),
                };
                let path = self.directory.join(format!("{}_mean.csv", probe.name()));
                mean.write_csv(&path)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

fn shape_matches(a: &ProbeTable, b: &ProbeTable) -> bool {
    a.rows.len() == b.rows.len() && a.rows.iter().zip(&b.rows).all(|(x, y)| x.len() == y.len())
}
