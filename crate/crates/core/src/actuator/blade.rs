use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::turbine::DiskSpec;
use crate::{Error, Result};

/// Relative projected velocity below which a section sees no flow (m/s).
pub const DEGENERATE_SPEED: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TipLoss {
    #[default]
    None,
}

/// Sectional inflow of a blade element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionFlow {
    /// Angle of attack (rad).
    pub alpha: f64,
    /// Magnitude of the in-plane relative velocity (m/s).
    pub u_rel: f64,
    pub e_lift: Vector3<f64>,
    pub e_drag: Vector3<f64>,
}

/// Chordwise, normal and spanwise unit vectors of an element frame whose
/// columns are (chord, ·, span); normal = chord × span.
pub fn section_axes(frame: &Matrix3<f64>) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let chord: Vector3<f64> = frame.column(0).into();
    let span: Vector3<f64> = frame.column(2).into();
    (chord, chord.cross(&span), span)
}

/// Relative velocity `u − v_point` projected onto the chord/normal plane.
/// Returns `None` when the projection vanishes.
pub fn angle_of_attack(
    frame: &Matrix3<f64>,
    twist: f64,
    point_velocity: &Vector3<f64>,
    u: &Vector3<f64>,
) -> Option<SectionFlow> {
    let (chord, normal, span) = section_axes(frame);
    let w = u - point_velocity;
    let wp = w - span * w.dot(&span);
    let u_rel = wp.norm();
    if !(u_rel >= DEGENERATE_SPEED) {
        return None;
    }
    let (a, b) = (wp.dot(&chord), wp.dot(&normal));
    let e_drag = wp / u_rel;
    let e_lift = (normal * a - chord * b) / u_rel;
    Some(SectionFlow { alpha: b.atan2(a) - twist, u_rel, e_lift, e_drag })
}

/// Sectional load on the blade, `½ ρ u² w l (C_L e_L + C_D e_D)`. The fluid
/// receives the opposite force.
#[allow(clippy::too_many_arguments)]
pub fn blade_element_force(
    rho: f64,
    u_rel: f64,
    chord: f64,
    length: f64,
    cl: f64,
    cd: f64,
    e_lift: &Vector3<f64>,
    e_drag: &Vector3<f64>,
) -> Vector3<f64> {
    0.5 * rho * u_rel * u_rel * chord * length * (e_lift * cl + e_drag * cd)
}

/// Axial induction factor of an ideal disk, `(1 − √(1 − C_T)) / 2`.
pub fn induction_factor(thrust_coefficient: f64) -> f64 {
    0.5 * (1.0 - (1.0 - thrust_coefficient).sqrt())
}

/// Free-stream speed inferred from the disk-averaged axial velocity,
/// `u_disk / (1 − a)`.
pub fn freestream_from_disk_velocity(u_disk: f64, thrust_coefficient: f64) -> f64 {
    u_disk / (1.0 - induction_factor(thrust_coefficient))
}

/// Area-weighted mean thrust coefficient.
pub fn mean_thrust_coefficient(spec: &DiskSpec) -> f64 {
    let area: f64 = (0..spec.rings).map(|k| spec.sample_area(k)).sum();
    (0..spec.rings)
        .map(|k| spec.thrust_coefficient(k) * spec.sample_area(k))
        .sum::<f64>()
        / area
}

/// Rotor load of every disk sample (ring-major), each `½ ρ u∞|u∞| C_T A_s`
/// along `axis`. The total is `½ ρ u∞² C_T π R²` for a uniform disk. The
/// fluid receives the opposite force, which opposes the flow.
pub fn actuator_disk_forces(spec: &DiskSpec, rho: f64, u_inf: f64, axis: &Vector3<f64>) -> Result<Vec<Vector3<f64>>> {
    spec.validate()?;
    if !(rho > 0.0) || !u_inf.is_finite() {
        return Err(Error::InvalidArgument(format!("disk needs rho > 0 and finite u, got {rho}, {u_inf}")));
    }
    let axis = axis.normalize();
    let mut out = Vec::with_capacity(spec.rings * spec.sectors);
    for ring in 0..spec.rings {
        let f = 0.5 * rho * u_inf * u_inf.abs() * spec.thrust_coefficient(ring) * spec.sample_area(ring);
        out.extend(std::iter::repeat_n(axis * f, spec.sectors));
    }
    Ok(out)
}
