//! Block-structured D3Q27 lattice-Boltzmann flow solver with actuator line and
//! actuator disk wind-turbine coupling, plus roofline/MLUPS instrumentation.
//!
//! Module map:
//!
//! * [`lattice`] - stencil, equilibria, BGK and cumulant collision with Guo
//!   forcing, pull streaming, unit conversion.
//! * [`domain`] - block decomposition, halo exchange, space-filling-curve
//!   load balancing, outer boundaries.
//! * [`turbine`] - component tree, line/disk discretizations, kinematics.
//! * [`actuator`] - sampling, blade-element forces, Roma-kernel spreading,
//!   polars, actuator-point exchange.
//! * [`perf`] - kernel cost model, lightspeed, MLUPS timing.
//! * [`solver`] - the time loop tying blocks, exchange and turbines together.
//! * [`io`] - configuration, run driver, probe/VTK output.

pub mod actuator;
pub mod domain;
pub mod error;
pub mod io;
pub mod lattice;
pub mod perf;
pub mod real;
pub mod solver;
pub mod turbine;

pub use error::{Error, Result};
pub use real::Real;
