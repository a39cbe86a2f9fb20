//! Ghost-layer exchange between blocks.
//!
//! Every neighbour relation produces one [`HaloMessage`]. The wire layout is
//! little-endian throughout:
//!
//! | bytes | field |
//! |-------|-------|
//! | 0..4  | source block id, `u32` |
//! | 4..7  | offset from source to receiver, three `i8` in x, y, z order |
//! | 7     | bytes per real (4 or 8) |
//! | 8..12 | number of reals in the body, `u32` |
//! | 12..  | body |
//!
//! The body lists the source's boundary slab cell by cell, z slowest and x
//! fastest, with all components of a cell contiguous.

use std::ops::Range;

use rayon::prelude::*;

use super::grid::{neighbor_offsets, BlockGrid};
use crate::lattice::Field;
use crate::{Error, Real, Result};

pub const HALO_HEADER_BYTES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct HaloMessage {
    pub source: u32,
    /// Direction from the sending block to the receiving block.
    pub offset: [i8; 3],
    pub precision_bytes: u8,
    pub count: u32,
    pub body: Vec<u8>,
}

impl HaloMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HALO_HEADER_BYTES + self.body.len());
        out.extend_from_slice(&self.source.to_le_bytes());
        out.extend(self.offset.iter().map(|o| *o as u8));
        out.push(self.precision_bytes);
        out.extend_from_slice(&self.count.to_le_bytes());
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HALO_HEADER_BYTES {
            return Err(Error::Protocol(format!(
                "halo message of {} bytes is shorter than its header",
                bytes.len()
            )));
        }
        let source = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
        let offset = [bytes[4] as i8, bytes[5] as i8, bytes[6] as i8];
        let precision_bytes = bytes[7];
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let body = bytes[HALO_HEADER_BYTES..].to_vec();
        if body.len() != count as usize * precision_bytes as usize {
            return Err(Error::Protocol(format!(
                "halo body has {} bytes, header announces {count} reals of {precision_bytes} bytes",
                body.len()
            )));
        }
        Ok(Self { source, offset, precision_bytes, count, body })
    }
}

fn source_range(n: usize, o: i32) -> Range<isize> {
    match o {
        1 => n as isize - 1..n as isize,
        -1 => 0..1,
        _ => 0..n as isize,
    }
}

fn ghost_range(n: usize, d: i32) -> Range<isize> {
    match d {
        1 => n as isize..n as isize + 1,
        -1 => -1..0,
        _ => 0..n as isize,
    }
}

/// Number of cells in the slab exchanged along `offset`.
pub fn halo_cells(dims: [usize; 3], offset: [i32; 3]) -> usize {
    (0..3)
        .map(|a| if offset[a] == 0 { dims[a] } else { 1 })
        .product()
}

/// Serializes the interior slab of `field` that faces `offset`.
pub fn pack_halo<T: Real, const N: usize>(
    field: &Field<T, N>,
    source: usize,
    offset: [i32; 3],
) -> HaloMessage {
    let dims = field.dims();
    let [rx, ry, rz] = [0, 1, 2].map(|a| source_range(dims[a], offset[a]));
    let cells = halo_cells(dims, offset);
    let mut body = Vec::with_capacity(cells * N * T::BYTES);
    for z in rz {
        for y in ry.clone() {
            for x in rx.clone() {
                for &v in field.cell(x, y, z) {
                    v.write_le(&mut body);
                }
            }
        }
    }
    HaloMessage {
        source: source as u32,
        offset: offset.map(|o| o as i8),
        precision_bytes: T::BYTES as u8,
        count: (cells * N) as u32,
        body,
    }
}

/// Writes a received slab into the ghost cells of `field` that face the
/// sender.
pub fn unpack_halo<T: Real, const N: usize>(field: &mut Field<T, N>, msg: &HaloMessage) -> Result<()> {
    let dims = field.dims();
    let dir = msg.offset.map(|o| -(o as i32));
    if dir.iter().any(|d| d.abs() > 1) || dir == [0, 0, 0] {
        return Err(Error::Protocol(format!("invalid halo offset {:?}", msg.offset)));
    }
    if msg.precision_bytes as usize != T::BYTES {
        return Err(Error::Protocol(format!(
            "halo precision {} bytes, field stores {} bytes",
            msg.precision_bytes,
            T::BYTES
        )));
    }
    let expected = halo_cells(dims, dir) * N;
    if msg.count as usize != expected || msg.body.len() != expected * T::BYTES {
        return Err(Error::Protocol(format!(
            "halo from block {} carries {} reals, expected {expected}",
            msg.source, msg.count
        )));
    }
    let [rx, ry, rz] = [0, 1, 2].map(|a| ghost_range(dims[a], dir[a]));
    let mut chunks = msg.body.chunks_exact(T::BYTES);
    for z in rz {
        for y in ry.clone() {
            for x in rx.clone() {
                for v in field.cell_mut(x, y, z) {
                    *v = T::read_le(chunks.next().unwrap());
                }
            }
        }
    }
    Ok(())
}

/// Fills every ghost cell with the matching interior cell of the neighbour
/// block (periodic wrap included). Ghost cells across a non-periodic domain
/// face are left untouched.
///
/// All slabs are packed before any is unpacked, so the result does not
/// depend on scheduling.
pub fn exchange_halos<T: Real, const N: usize>(grid: &BlockGrid, fields: &mut [Field<T, N>]) -> Result<()> {
    if fields.len() != grid.len() {
        return Err(Error::Protocol(format!(
            "{} fields for {} blocks",
            fields.len(),
            grid.len()
        )));
    }
    let offsets = neighbor_offsets();
    // inbox[r][slot]: bytes for the ghost region of block r in direction offsets[slot]
    let inbox: Vec<Vec<Option<Vec<u8>>>> = (0..grid.len())
        .into_par_iter()
        .map(|r| {
            offsets
                .iter()
                .enumerate()
                .map(|(slot, o)| {
                    grid.block(r).neighbors[slot].map(|s| {
                        pack_halo(&fields[s], s, o.map(|v| -v)).to_bytes()
                    })
                })
                .collect()
        })
        .collect();
    fields
        .par_iter_mut()
        .zip(inbox.par_iter())
        .try_for_each(|(field, messages)| {
            for bytes in messages.iter().flatten() {
                unpack_halo(field, &HaloMessage::from_bytes(bytes)?)?;
            }
            Ok(())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::grid::decompose_domain;
    use crate::lattice::{MacroField, PdfField};

    fn global_value(g: [usize; 3], c: usize) -> f64 {
        (g[0] * 1_000_000 + g[1] * 1000 + g[2]) as f64 + c as f64 * 0.125
    }

    fn split_field(grid: &BlockGrid) -> Vec<MacroField<f64>> {
        grid.blocks()
            .iter()
            .map(|b| {
                let mut f = MacroField::<f64>::new(grid.block_dims());
                f.fill_interior_with(|x, y, z| {
                    let g = [b.origin[0] + x, b.origin[1] + y, b.origin[2] + z];
                    std::array::from_fn(|c| global_value(g, c))
                });
                f
            })
            .collect()
    }

    #[test]
    fn every_ghost_matches_wrapped_global_cell() {
        let grid = decompose_domain([8, 6, 4], [4, 3, 2], [true; 3]).unwrap();
        let mut fields = split_field(&grid);
        exchange_halos(&grid, &mut fields).unwrap();
        let dims = grid.block_dims().map(|d| d as isize);
        for (b, f) in grid.blocks().iter().zip(&fields) {
            for z in -1..=dims[2] {
                for y in -1..=dims[1] {
                    for x in -1..=dims[0] {
                        let g = [x, y, z]
                            .iter()
                            .enumerate()
                            .map(|(a, &v)| b.origin[a] as i64 + v as i64)
                            .collect::<Vec<_>>();
                        let w = grid.wrap_cell([g[0], g[1], g[2]]).unwrap();
                        for c in 0..4 {
                            assert_eq!(f.get(x, y, z, c), global_value(w, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_block_matches_periodic_fill() {
        let grid = decompose_domain([5, 4, 3], [5, 4, 3], [true; 3]).unwrap();
        let mut fields = split_field(&grid);
        let mut reference = fields[0].clone();
        reference.fill_periodic_ghosts();
        exchange_halos(&grid, &mut fields).unwrap();
        assert_eq!(fields[0], reference);
        assert_eq!(fields[0].get(-1, 0, 0, 0), fields[0].get(4, 0, 0, 0));
    }

    #[test]
    fn constant_field_gives_constant_ghosts() {
        let grid = decompose_domain([8, 4, 4], [4, 4, 4], [true; 3]).unwrap();
        let mut fields: Vec<PdfField<f32>> = (0..2)
            .map(|_| {
                let mut f = PdfField::<f32>::new([4, 4, 4]);
                f.fill_interior_with(|_, _, _| [0.25; 27]);
                f
            })
            .collect();
        exchange_halos(&grid, &mut fields).unwrap();
        assert!(fields.iter().all(|f| f.data().iter().all(|v| *v == 0.25)));
    }

    #[test]
    fn exchange_is_idempotent() {
        let grid = decompose_domain([6, 6, 6], [3, 3, 3], [true, false, true]).unwrap();
        let mut fields = split_field(&grid);
        exchange_halos(&grid, &mut fields).unwrap();
        let once = fields.clone();
        exchange_halos(&grid, &mut fields).unwrap();
        assert_eq!(once, fields);
    }

    #[test]
    fn non_periodic_face_ghosts_untouched() {
        let grid = decompose_domain([4, 4, 4], [4, 4, 4], [false, true, true]).unwrap();
        let mut fields = split_field(&grid);
        fields[0].set(-1, 0, 0, 0, -7.0);
        exchange_halos(&grid, &mut fields).unwrap();
        assert_eq!(fields[0].get(-1, 0, 0, 0), -7.0);
        assert_eq!(fields[0].get(0, -1, 0, 0), global_value([0, 3, 0], 0));
    }

    #[test]
    fn message_round_trip_and_framing_errors() {
        let grid = decompose_domain([4, 4, 4], [4, 4, 4], [true; 3]).unwrap();
        let fields = split_field(&grid);
        let msg = pack_halo(&fields[0], 0, [1, 0, -1]);
        assert_eq!(msg.count as usize, 4 * 4);
        let bytes = msg.to_bytes();
        assert_eq!(bytes.len(), HALO_HEADER_BYTES + 16 * 8);
        assert_eq!(&bytes[4..8], &[1u8, 0, 255, 8]);
        assert_eq!(HaloMessage::from_bytes(&bytes).unwrap(), msg);
        assert!(matches!(
            HaloMessage::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Protocol(_))
        ));
        let mut target = fields[0].clone();
        let mut short = msg.clone();
        short.count -= 4;
        short.body.truncate(short.body.len() - 32);
        assert!(matches!(unpack_halo(&mut target, &short), Err(Error::Protocol(_))));
        let mut single = MacroField::<f32>::new([4, 4, 4]);
        assert!(matches!(unpack_halo(&mut single, &msg), Err(Error::Protocol(_))));
    }
}
