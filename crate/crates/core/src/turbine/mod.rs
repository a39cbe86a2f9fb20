//! Turbine geometry as a tree of components, each placed relative to its
//! parent, with line and disk discretizations.

mod component;
pub mod examples;
mod topology;
mod transform;

pub use component::{
    update_disk, update_line, Component, Discretization, DiskSpec, FixPoint, LinePoint, LineSpec,
};
pub use topology::{
    build_topology, finite_difference_velocities, point_velocities, PointKind, TurbineTopology,
    WorldPoint,
};
pub use transform::{
    keep_orthonormal, orthonormality_error, reorthonormalize, rotation_matrix, Transform,
    REORTHONORMALIZE_THRESHOLD,
};
