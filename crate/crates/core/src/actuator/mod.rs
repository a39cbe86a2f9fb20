//! Coupling between actuator points and the flow: sampling, sectional
//! forces, kernel spreading and the point exchange between blocks.

mod blade;
mod exchange;
mod kernel;
mod polar;

pub use blade::{
    actuator_disk_forces, angle_of_attack, blade_element_force, freestream_from_disk_velocity,
    induction_factor, mean_thrust_coefficient, section_axes, SectionFlow, TipLoss, DEGENERATE_SPEED,
};
pub use exchange::{
    mark_and_exchange_points, pack_records, point_owner, support_blocks, unpack_records,
    ExchangeRecord, EXCHANGE_RECORD_BYTES,
};
pub use kernel::{
    lattice_coordinate, roma_delta_weight, roma_support, sample_trilinear, spread_point,
    world_coordinate,
};
pub use polar::{lookup_polar, PolarTable};
