//! Turbine description files.
//!
//! A turbine file lists polar tables and a flat set of components linked by
//! `parent` names. Exactly one component has no parent; it becomes the root
//! of the tree. Angles are in degrees, lengths in metres.
//!
//! ```toml
//! [[polar]]
//! id = "flat"
//! rows = [[-10, -1.1, 0.02], [0, 0, 0.01], [10, 1.1, 0.02]]
//!
//! [[component]]
//! name = "tower"
//!
//! [[component]]
//! name = "hub"
//! parent = "tower"
//! position_m = [0, 0, 3]
//! rotation_rate_rad_s = 10
//! rotation_axis = [1, 0, 0]
//!
//! [[component]]
//! name = "blade1"
//! parent = "hub"
//! orientation = [{ axis = [0, 0, 1], angle_deg = 90 }]
//! line = { uniform = { points = 20, root_m = 0.2, tip_m = 2.25, chord_m = 0.15, polar = "flat" } }
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::actuator::{PolarTable, TipLoss};
use crate::solver::TurbineInstance;
use crate::turbine::{build_topology, rotation_matrix, Component, DiskSpec, LineSpec, Transform};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbineFile {
    #[serde(default)]
    pub tip_loss: TipLoss,
    #[serde(default, rename = "polar")]
    pub polars: Vec<PolarEntry>,
    #[serde(rename = "component")]
    pub components: Vec<ComponentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarEntry {
    pub id: String,
    /// CSV with header `alpha_deg,cl,cd`, relative to the turbine file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<std::path::PathBuf>,
    /// Inline `[alpha_deg, cl, cd]` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rotation {
    pub axis: [f64; 3],
    pub angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    /// Offset from the parent frame, in parent coordinates.
    #[serde(default)]
    pub position_m: [f64; 3],
    /// Rotations relative to the parent, composed left to right.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orientation: Vec<Rotation>,
    #[serde(default)]
    pub rotation_rate_rad_s: f64,
    #[serde(default = "default_axis")]
    pub rotation_axis: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<LineEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk: Option<DiskEntry>,
}

fn default_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

/// Blade line along local +z, chord along local +x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEntry {
    #[serde(default)]
    pub pitch_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stations: Vec<Station>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformLine {
    pub points: usize,
    pub root_m: f64,
    pub tip_m: f64,
    pub chord_m: f64,
    #[serde(default)]
    pub twist_deg: f64,
    pub polar: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Station {
    pub r_m: f64,
    pub chord_m: f64,
    #[serde(default)]
    pub twist_deg: f64,
    pub polar: String,
}

/// Actuator disk in the local y-z plane, axis local +x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskEntry {
    pub radius_m: f64,
    pub rings: usize,
    pub sectors: usize,
    /// One value, or one per ring.
    pub thrust_coefficients: Vec<f64>,
}

/// A parsed turbine: component tree, polar tables and tip-loss model.
#[derive(Debug, Clone)]
pub struct TurbineDefinition {
    pub root: Component,
    pub polars: Vec<PolarTable>,
    pub tip_loss: TipLoss,
}

impl TurbineDefinition {
    /// Places the turbine with its root translated by `offset` (m).
    pub fn instantiate(&self, name: &str, offset: [f64; 3]) -> Result<TurbineInstance> {
        let ids: Vec<String> = self.polars.iter().map(|p| p.id().to_string()).collect();
        let mut topology = build_topology(self.root.clone(), &ids)?;
        topology.translate(offset);
        let mut t = TurbineInstance::new(name, topology, self.polars.clone())?;
        t.tip_loss = self.tip_loss;
        Ok(t)
    }
}

pub fn parse_turbine_file(path: &Path) -> Result<TurbineDefinition> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_turbine_str(&text, path.parent().unwrap_or(Path::new(".")))
        .map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
}

pub fn parse_turbine_str(text: &str, base_dir: &Path) -> Result<TurbineDefinition> {
    let file: TurbineFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.build(base_dir)
}

impl TurbineFile {
    pub fn build(&self, base_dir: &Path) -> Result<TurbineDefinition> {
        let polars = self.load_polars(base_dir)?;
        let mut by_name: HashMap<&str, &ComponentEntry> = HashMap::new();
        for c in &self.components {
            if by_name.insert(&c.name, c).is_some() {
                return Err(Error::Config(format!("duplicate component name '{}'", c.name)));
            }
        }
        let roots: Vec<&str> = self.components.iter().filter(|c| c.parent.is_none()).map(|c| c.name.as_str()).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] if self.components.is_empty() => return Err(Error::Config("no components".into())),
            [] => return Err(Error::Config("every component has a parent; the tree has a cycle".into())),
            many => return Err(Error::Config(format!("several root components: {}", many.join(", ")))),
        };
        // children keep file order
        let mut children: BTreeMap<&str, Vec<&ComponentEntry>> = BTreeMap::new();
        for c in &self.components {
            if let Some(p) = &c.parent {
                if !by_name.contains_key(p.as_str()) {
                    return Err(Error::Config(format!("component '{}': unknown parent '{p}'", c.name)));
                }
                children.entry(p.as_str()).or_default().push(c);
            }
        }
        let mut reached = 0;
        let tree = build_component(by_name[root], &children, &mut reached)?;
        if reached != self.components.len() {
            return Err(Error::Config("components form a cycle detached from the root".into()));
        }
        Ok(TurbineDefinition { root: tree, polars, tip_loss: self.tip_loss })
    }

    fn load_polars(&self, base_dir: &Path) -> Result<Vec<PolarTable>> {
        let mut seen = std::collections::HashSet::new();
        self.polars
            .iter()
            .map(|p| {
                if !seen.insert(p.id.as_str()) {
                    return Err(Error::Config(format!("duplicate polar id '{}'", p.id)));
                }
                match (&p.file, &p.rows) {
                    (Some(f), None) => {
                        let path = if f.is_absolute() { f.clone() } else { base_dir.join(f) };
                        PolarTable::from_csv_path(&p.id, &path)
                    }
                    (None, Some(rows)) => PolarTable::from_degrees(&p.id, rows),
                    _ => Err(Error::Config(format!("polar '{}' needs exactly one of file or rows", p.id))),
                }
            })
            .collect()
    }
}

fn build_component(
    entry: &ComponentEntry,
    children: &BTreeMap<&str, Vec<&ComponentEntry>>,
    reached: &mut usize,
) -> Result<Component> {
    *reached += 1;
    let ctx = |e: Error| match e {
        Error::Config(m) | Error::InvalidArgument(m) => Error::Config(format!("component '{}': {m}", entry.name)),
        other => other,
    };
    let mut t = Matrix3::identity();
    for r in &entry.orientation {
        t *= rotation_matrix(Vector3::from(r.axis), r.angle_deg.to_radians()).map_err(ctx)?;
    }
    let mut c = Component::new(&entry.name, Transform::new(Vector3::from(entry.position_m), t));
    if entry.rotation_rate_rad_s != 0.0 {
        c = c.with_rotation(entry.rotation_rate_rad_s, entry.rotation_axis).map_err(ctx)?;
    }
    match (&entry.line, &entry.disk) {
        (Some(_), Some(_)) => return Err(ctx(Error::Config("a component carries either a line or a disk".into()))),
        (Some(l), None) => c = c.with_line(line_spec(l).map_err(ctx)?),
        (None, Some(d)) => {
            let spec = DiskSpec {
                radius: d.radius_m,
                rings: d.rings,
                sectors: d.sectors,
                thrust_coefficients: d.thrust_coefficients.clone(),
            };
            spec.validate().map_err(ctx)?;
            c = c.with_disk(spec);
        }
        (None, None) => {}
    }
    if let Some(kids) = children.get(entry.name.as_str()) {
        for k in kids {
            c = c.with_child(build_component(k, children, reached)?);
        }
    }
    Ok(c)
}

fn line_spec(l: &LineEntry) -> Result<LineSpec> {
    let spec = match (&l.uniform, l.stations.is_empty()) {
        (Some(u), true) => LineSpec::uniform(u.points, u.root_m, u.tip_m, u.chord_m, u.twist_deg.to_radians(), &u.polar)?,
        (None, false) => {
            let st: Vec<(f64, f64, f64, String)> = l
                .stations
                .iter()
                .map(|s| (s.r_m, s.chord_m, s.twist_deg.to_radians(), s.polar.clone()))
                .collect();
            LineSpec::from_stations(&st)?
        }
        _ => return Err(Error::Config("a line needs exactly one of uniform or stations".into())),
    };
    Ok(spec.with_pitch(l.pitch_deg.to_radians()))
}
