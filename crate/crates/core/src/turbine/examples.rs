//! Reference horizontal- and vertical-axis rotor layouts.

use std::f64::consts::{FRAC_PI_2, TAU};

use super::component::{Component, LineSpec};
use super::transform::{rotation_matrix, Transform};
use crate::Result;
use nalgebra::Vector3;

#[derive(Debug, Clone)]
pub struct RotorParams {
    /// Tower base in world coordinates (m).
    pub base: [f64; 3],
    pub tower_height: f64,
    /// Rotor radius (m).
    pub radius: f64,
    /// Inner end of the blades (m).
    pub hub_radius: f64,
    pub blades: usize,
    pub n_points: usize,
    pub chord: f64,
    pub twist: f64,
    pub pitch: f64,
    /// Rotor speed (rad/s).
    pub omega: f64,
    pub polar: String,
}

impl Default for RotorParams {
    fn default() -> Self {
        Self {
            base: [0.0; 3],
            tower_height: 3.0,
            radius: 2.25,
            hub_radius: 0.2,
            blades: 3,
            n_points: 20,
            chord: 0.15,
            twist: 0.0,
            pitch: 0.0,
            omega: 0.0,
            polar: "p".to_string(),
        }
    }
}

/// Tower, nacelle, hub spinning about world +x, and radial blades. The hub
/// centre sits at `base + (0, 0, tower_height)`.
pub fn hawt(p: &RotorParams) -> Result<Component> {
    let mut hub = Component::new("hub", Transform::identity()).with_rotation(p.omega, [1.0, 0.0, 0.0])?;
    for k in 0..p.blades {
        let azimuth = TAU * k as f64 / p.blades as f64;
        // chord along the rotor plane, span radial
        let t = rotation_matrix(Vector3::x(), azimuth)? * rotation_matrix(Vector3::z(), FRAC_PI_2)?;
        let line = LineSpec::uniform(p.n_points, p.hub_radius, p.radius, p.chord, p.twist, &p.polar)?
            .with_pitch(p.pitch);
        hub = hub.with_child(
            Component::new(&format!("blade{}", k + 1), Transform::new(Vector3::zeros(), t)).with_line(line),
        );
    }
    let nacelle = Component::new("nacelle", Transform::from_translation([0.0, 0.0, p.tower_height])).with_child(hub);
    Ok(Component::new("tower", Transform::from_translation(p.base)).with_child(nacelle))
}

/// Tower, hub spinning about world +z, and vertical blades at `radius` that
/// extend `radius` above and below the hub height.
pub fn vawt(p: &RotorParams) -> Result<Component> {
    let mut hub = Component::new("hub", Transform::from_translation([0.0, 0.0, p.tower_height]))
        .with_rotation(p.omega, [0.0, 0.0, 1.0])?;
    for k in 0..p.blades {
        let azimuth = TAU * k as f64 / p.blades as f64;
        let t = rotation_matrix(Vector3::z(), azimuth - FRAC_PI_2)?;
        let offset = Vector3::new(p.radius * azimuth.cos(), p.radius * azimuth.sin(), -p.radius);
        let line = LineSpec::uniform(p.n_points, 0.0, 2.0 * p.radius, p.chord, p.twist, &p.polar)?
            .with_pitch(p.pitch);
        hub = hub.with_child(Component::new(&format!("blade{}", k + 1), Transform::new(offset, t)).with_line(line));
    }
    Ok(Component::new("tower", Transform::from_translation(p.base)).with_child(hub))
}
