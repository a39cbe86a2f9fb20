//! D3Q27 lattice-Boltzmann core.

mod collision;
mod cumulant;
mod equilibrium;
mod field;
mod kernel;
mod stencil;
mod stream;
mod units;

pub use collision::{
    collide, collide_unchecked, guo_source, macroscopic_moments, CollisionConfig,
    CollisionOperator, MacroState, HIGHER_ORDER_RATE_COUNT,
};
pub use cumulant::{central_moments, cumulants_from_central};
pub use equilibrium::{equilibrium_for, equilibrium_pdf, equilibrium_product};
pub use field::{Field, ForceField, MacroField, PdfField, FORCE_COMPONENTS, MACRO_COMPONENTS};
pub use kernel::{stream_collide_block, KernelFault};
pub use stream::stream;
pub use units::{lattice_units_from_physical, lattice_units_with_tau, UnitSystem, MAX_LATTICE_VELOCITY};

pub use stencil::{
    direction_index, CS2, OPPOSITE, Q, VELOCITIES, VELOCITIES_F64, WEIGHTS,
};
