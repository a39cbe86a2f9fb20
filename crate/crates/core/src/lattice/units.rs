use serde::Serialize;

use super::stencil::CS2;
use crate::{Error, Result};

/// Largest admissible lattice velocity magnitude (about Mach 0.4).
pub const MAX_LATTICE_VELOCITY: f64 = 0.23;

/// Conversion between SI and lattice units.
///
/// Lattice units take `dx`, `dt` and the reference density `rho_phys` as the
/// units of length, time and mass density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSystem {
    /// Metres per cell.
    pub dx: f64,
    /// Seconds per step.
    pub dt: f64,
    pub u_ref_phys: f64,
    pub mach: f64,
    /// Lattice velocity corresponding to `u_ref_phys`.
    pub u_lat: f64,
    pub nu_phys: f64,
    pub nu_lat: f64,
    pub tau: f64,
    /// Reference density in kg/m^3, the density unit.
    pub rho_phys: f64,
}

pub fn lattice_units_from_physical(
    diameter: f64,
    cells_per_diameter: usize,
    u_ref_phys: f64,
    mach: f64,
    nu_phys: f64,
) -> Result<UnitSystem> {
    let (dx, dt, u_lat) = scales(diameter, cells_per_diameter, u_ref_phys, mach)?;
    if !(nu_phys > 0.0 && nu_phys.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "viscosity must be positive, got {nu_phys}"
        )));
    }
    let nu_lat = nu_phys * dt / (dx * dx);
    let tau = nu_lat / CS2 + 0.5;
    finish(dx, dt, u_ref_phys, mach, u_lat, nu_phys, nu_lat, tau)
}

/// Same scaling as [`lattice_units_from_physical`] but with the relaxation
/// time prescribed; the physical viscosity follows from it.
pub fn lattice_units_with_tau(
    diameter: f64,
    cells_per_diameter: usize,
    u_ref_phys: f64,
    mach: f64,
    tau: f64,
) -> Result<UnitSystem> {
    let (dx, dt, u_lat) = scales(diameter, cells_per_diameter, u_ref_phys, mach)?;
    let nu_lat = CS2 * (tau - 0.5);
    let nu_phys = nu_lat * dx * dx / dt;
    finish(dx, dt, u_ref_phys, mach, u_lat, nu_phys, nu_lat, tau)
}

fn scales(
    diameter: f64,
    cells_per_diameter: usize,
    u_ref_phys: f64,
    mach: f64,
) -> Result<(f64, f64, f64)> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
        }
    };
    positive("diameter", diameter)?;
    positive("reference velocity", u_ref_phys)?;
    positive("mach", mach)?;
    if cells_per_diameter == 0 {
        return Err(Error::InvalidArgument("cells_per_diameter must be positive".into()));
    }
    let dx = diameter / cells_per_diameter as f64;
    let u_lat = mach * CS2.sqrt();
    if u_lat > MAX_LATTICE_VELOCITY {
        return Err(Error::Unstable(format!(
            "mach {mach} gives lattice velocity {u_lat:.4} above the limit {MAX_LATTICE_VELOCITY}; \
             use a lower Mach number"
        )));
    }
    let dt = dx * u_lat / u_ref_phys;
    Ok((dx, dt, u_lat))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    dx: f64,
    dt: f64,
    u_ref_phys: f64,
    mach: f64,
    u_lat: f64,
    nu_phys: f64,
    nu_lat: f64,
    tau: f64,
) -> Result<UnitSystem> {
    if !(tau > 0.5) {
        return Err(Error::Unstable(format!(
            "relaxation time tau = {tau} must exceed 0.5; increase the Mach number or \
             use a finer resolution (more cells per diameter)"
        )));
    }
    if tau >= 2.0 {
        return Err(Error::Unstable(format!(
            "relaxation time tau = {tau} must stay below 2; lower the Mach number or \
             coarsen the resolution"
        )));
    }
    Ok(UnitSystem {
        dx,
        dt,
        u_ref_phys,
        mach,
        u_lat,
        nu_phys,
        nu_lat,
        tau,
        rho_phys: 1.225,
    })
}

impl UnitSystem {
    pub fn with_density(mut self, rho_phys: f64) -> Self {
        self.rho_phys = rho_phys;
        self
    }

    pub fn omega(&self) -> f64 {
        1.0 / self.tau
    }

    /// m/s per lattice velocity unit.
    pub fn velocity_scale(&self) -> f64 {
        self.dx / self.dt
    }

    pub fn velocity_to_lattice(&self, u: [f64; 3]) -> [f64; 3] {
        u.map(|c| c * self.dt / self.dx)
    }

    pub fn velocity_to_physical(&self, u: [f64; 3]) -> [f64; 3] {
        u.map(|c| c * self.dx / self.dt)
    }

    /// Point force in N to the lattice force it contributes when spread over
    /// unit-volume cells: `F dt^2 / (rho_ref dx^4)`.
    pub fn force_to_lattice(&self, f: [f64; 3]) -> [f64; 3] {
        let s = self.dt * self.dt / (self.rho_phys * self.dx.powi(4));
        f.map(|c| c * s)
    }

    /// Lattice force density to N/m^3.
    pub fn force_density_to_physical(&self, f: [f64; 3]) -> [f64; 3] {
        let s = self.rho_phys * self.dx / (self.dt * self.dt);
        f.map(|c| c * s)
    }

    /// N/m^3 to lattice force density.
    pub fn force_density_to_lattice(&self, f: [f64; 3]) -> [f64; 3] {
        let s = self.dt * self.dt / (self.rho_phys * self.dx);
        f.map(|c| c * s)
    }

    /// Lattice momentum (per unit-volume cell) to kg m/s.
    pub fn momentum_to_physical(&self, p: f64) -> f64 {
        p * self.rho_phys * self.dx.powi(4) / self.dt
    }
}
