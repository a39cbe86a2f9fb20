use std::fmt::Write as _;
use std::path::Path;

use crate::solver::Solver;
use crate::{Error, Real, Result};

/// Writes density (kg/m³), velocity (m/s) and body-force density (N/m³) as
/// a legacy ASCII VTK structured-points file. Points sit at cell centres.
/// The title line records the step, spacing and periodic axes.
pub fn write_vtk<T: Real>(solver: &Solver<T>, path: &Path) -> Result<()> {
    let text = vtk_string(solver);
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn vtk_string<T: Real>(solver: &Solver<T>) -> String {
    let units = solver.units();
    let dims = solver.grid().global_dims();
    let periodic = solver.grid().periodicity();
    let axes: String = ["x", "y", "z"].iter().zip(periodic).filter(|(_, p)| *p).map(|(a, _)| *a).collect();
    let axes = if axes.is_empty() { "none".to_string() } else { axes };
    let macros = solver.gather_macro();
    let forces = solver.gather_force();
    let n = macros.len();

    let mut s = String::with_capacity(n * 120);
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "lbwind step={} dx={:e} periodic={axes}", solver.steps_done(), units.dx);
    s.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let h = 0.5 * units.dx;
    let _ = writeln!(s, "ORIGIN {h:e} {h:e} {h:e}");
    let _ = writeln!(s, "SPACING {0:e} {0:e} {0:e}", units.dx);
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("SCALARS density double 1\nLOOKUP_TABLE default\n");
    for m in &macros {
        let _ = writeln!(s, "{:e}", m[0] * units.rho_phys);
    }
    s.push_str("VECTORS velocity double\n");
    for m in &macros {
        let u = units.velocity_to_physical([m[1], m[2], m[3]]);
        let _ = writeln!(s, "{:e} {:e} {:e}", u[0], u[1], u[2]);
    }
    s.push_str("VECTORS force double\n");
    for f in &forces {
        let f = units.force_density_to_physical(*f);
        let _ = writeln!(s, "{:e} {:e} {:e}", f[0], f[1], f[2]);
    }
    s
}
