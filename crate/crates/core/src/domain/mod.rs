//! Block-structured decomposition, halo exchange and load balancing.

mod balance;
mod boundary;
mod grid;
mod halo;
mod workers;

pub use balance::{balance_blocks_weighted_sfc, curve_order, hilbert_index, morton_index, Assignment, Curve};
pub use boundary::{apply_outer_boundary, OuterBoundary};
pub use grid::{decompose_domain, neighbor_offsets, offset_slot, BlockDescriptor, BlockGrid, NEIGHBOR_COUNT};
pub use halo::{exchange_halos, pack_halo, unpack_halo, HaloMessage, HALO_HEADER_BYTES};
pub use workers::WorkerPool;
