//! Configuration files, turbine descriptions, probes, field output and the
//! run driver used by the command-line tool.

pub mod config;
pub mod probes;
pub mod run;
pub mod turbine_file;
pub mod vtk;

pub use config::{parse_config, parse_config_str, BoundaryKind, Precision, Resolved, RunConfig};
pub use probes::{sample_probe, ProbeRecorder, ProbeSpec, ProbeTable};
pub use run::{build_solver, check_memory, load_turbines, roofline_report, run_simulation, RunReport};
pub use turbine_file::{parse_turbine_file, parse_turbine_str, TurbineDefinition};
pub use vtk::{vtk_string, write_vtk};
