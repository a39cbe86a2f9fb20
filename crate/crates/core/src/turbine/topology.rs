use std::collections::HashSet;

use nalgebra::Vector3;

use super::component::{Component, Discretization, FixPoint};
use super::transform::Transform;
use crate::{Error, Result};

/// What an actuator point represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointKind {
    BladeElement {
        chord: f64,
        length: f64,
        /// Twist plus pitch (rad).
        twist: f64,
        /// Index into the polar list given to [`build_topology`].
        polar: usize,
    },
    DiskSample {
        ring: usize,
        area: f64,
        thrust_coefficient: f64,
    },
}

/// World state of one actuator point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint {
    /// Pre-order index of the owning component.
    pub component: usize,
    /// Index of the point within its component.
    pub index: usize,
    /// World frame of the point. For blade elements the columns are the
    /// chordwise, (minus) normal and spanwise directions; for disk samples
    /// the first column is the rotor axis.
    pub transform: Transform,
    pub velocity: Vector3<f64>,
    pub kind: PointKind,
}

impl WorldPoint {
    pub fn position(&self) -> Vector3<f64> {
        self.transform.p
    }
}

/// Component tree with its current world snapshot.
#[derive(Debug, Clone)]
pub struct TurbineTopology {
    root: Component,
    base: FixPoint,
    polars: Vec<String>,
    time: f64,
    snapshot: Vec<WorldPoint>,
}

/// Validates a component tree against the known polar ids and computes the
/// initial world snapshot.
pub fn build_topology(root: Component, polar_ids: &[String]) -> Result<TurbineTopology> {
    let mut names = HashSet::new();
    let mut problem = None;
    root.visit(&mut |c| {
        if problem.is_some() {
            return;
        }
        if !names.insert(c.name.clone()) {
            problem = Some(Error::Config(format!("duplicate component name '{}'", c.name)));
            return;
        }
        if c.relative.orthonormality_error() > 1e-10 || (c.relative.t.determinant() - 1.0).abs() > 1e-10 {
            problem = Some(Error::Config(format!(
                "component '{}': relative orientation is not a rotation",
                c.name
            )));
            return;
        }
        let check = match &c.discretization {
            Discretization::Line(spec) => spec.validate().and_then(|_| {
                match spec.points.iter().find(|p| !polar_ids.contains(&p.polar)) {
                    Some(p) => Err(Error::Config(format!(
                        "component '{}' references unknown polar '{}'",
                        c.name, p.polar
                    ))),
                    None => Ok(()),
                }
            }),
            Discretization::Disk(spec) => spec.validate(),
            Discretization::None => Ok(()),
        };
        if let Err(e) = check {
            problem = Some(e);
        }
    });
    if let Some(e) = problem {
        return Err(e);
    }
    let mut topo = TurbineTopology {
        root,
        base: FixPoint::world(),
        polars: polar_ids.to_vec(),
        time: 0.0,
        snapshot: Vec::new(),
    };
    topo.root.update_discretization_tree(&topo.base, 0.0);
    topo.rebuild_snapshot();
    Ok(topo)
}

impl TurbineTopology {
    pub fn root(&self) -> &Component {
        &self.root
    }

    pub fn polar_ids(&self) -> &[String] {
        &self.polars
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn snapshot(&self) -> &[WorldPoint] {
        &self.snapshot
    }

    /// Moves the whole turbine by a world translation.
    pub fn translate(&mut self, offset: [f64; 3]) {
        self.base.transform.p += Vector3::from(offset);
        self.root.update_discretization_tree(&self.base, 0.0);
        self.rebuild_snapshot();
    }

    /// Advances every rotation by `dt` seconds and regenerates the snapshot.
    pub fn update(&mut self, dt: f64) -> Result<()> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be non-negative, got {dt}")));
        }
        self.root.update_discretization_tree(&self.base, dt);
        self.time += dt;
        self.rebuild_snapshot();
        Ok(())
    }

    fn rebuild_snapshot(&mut self) {
        let mut out = Vec::with_capacity(self.snapshot.len());
        let polars = &self.polars;
        let mut id = 0;
        self.root.visit(&mut |c| {
            let frame = c.frame();
            match &c.discretization {
                Discretization::Line(spec) => {
                    for (k, (pt, t)) in spec.points.iter().zip(c.line_points()).enumerate() {
                        out.push(WorldPoint {
                            component: id,
                            index: k,
                            transform: *t,
                            velocity: frame.point_velocity(&t.p),
                            kind: PointKind::BladeElement {
                                chord: pt.chord,
                                length: pt.length,
                                twist: pt.twist + spec.pitch,
                                polar: polars.iter().position(|p| *p == pt.polar).unwrap_or(0),
                            },
                        });
                    }
                }
                Discretization::Disk(spec) => {
                    for (k, (ring, offset)) in spec.sample_offsets().into_iter().enumerate() {
                        let p = frame.transform.apply(&offset);
                        out.push(WorldPoint {
                            component: id,
                            index: k,
                            transform: Transform::new(p, frame.transform.t),
                            velocity: frame.point_velocity(&p),
                            kind: PointKind::DiskSample {
                                ring,
                                area: spec.sample_area(ring),
                                thrust_coefficient: spec.thrust_coefficient(ring),
                            },
                        });
                    }
                }
                Discretization::None => {}
            }
            id += 1;
        });
        self.snapshot = out;
    }
}

/// World velocities of all actuator points from the frame-chain rates.
pub fn point_velocities(topology: &TurbineTopology) -> Vec<Vector3<f64>> {
    topology.snapshot.iter().map(|p| p.velocity).collect()
}

/// `(p_after − p_before) / dt` per point.
pub fn finite_difference_velocities(
    before: &[WorldPoint],
    after: &[WorldPoint],
    dt: f64,
) -> Result<Vec<Vector3<f64>>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if before.len() != after.len() {
        return Err(Error::InvalidArgument("snapshots differ in point count".into()));
    }
    Ok(before.iter().zip(after).map(|(a, b)| (b.transform.p - a.transform.p) / dt).collect())
}
