//! Hand-over of actuator points to every block their kernel support
//! touches.
//!
//! One [`ExchangeRecord`] is 56 bytes, little-endian:
//!
//! | bytes  | field |
//! |--------|-------|
//! | 0..4   | point id, `u32` |
//! | 4..8   | owning (sending) block id, `u32` |
//! | 8..32  | position in global lattice coordinates, three `f64` |
//! | 32..56 | lattice force to deposit on the fluid, three `f64` |
//!
//! A buffer is a plain concatenation of records.

use super::kernel::roma_support;
use crate::domain::BlockGrid;
use crate::{Error, Result};

pub const EXCHANGE_RECORD_BYTES: usize = 56;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeRecord {
    pub id: u32,
    pub source: u32,
    pub position: [f64; 3],
    pub force: [f64; 3],
}

impl ExchangeRecord {
    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.id.to_le_bytes());
        out.extend_from_slice(&self.source.to_le_bytes());
        for v in self.position.iter().chain(&self.force) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    pub fn read(bytes: &[u8]) -> Self {
        let f = |k: usize| f64::from_le_bytes(bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap());
        Self {
            id: u32::from_le_bytes(bytes[0..4].try_into().unwrap()),
            source: u32::from_le_bytes(bytes[4..8].try_into().unwrap()),
            position: [f(0), f(1), f(2)],
            force: [f(3), f(4), f(5)],
        }
    }
}

pub fn pack_records(records: &[ExchangeRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(records.len() * EXCHANGE_RECORD_BYTES);
    for r in records {
        r.write(&mut out);
    }
    out
}

pub fn unpack_records(bytes: &[u8]) -> Result<Vec<ExchangeRecord>> {
    if bytes.len() % EXCHANGE_RECORD_BYTES != 0 {
        return Err(Error::Protocol(format!(
            "point buffer of {} bytes is not a whole number of {EXCHANGE_RECORD_BYTES}-byte records",
            bytes.len()
        )));
    }
    Ok(bytes.chunks_exact(EXCHANGE_RECORD_BYTES).map(ExchangeRecord::read).collect())
}

/// Wraps a global lattice coordinate into the domain and returns the block
/// owning the cell `floor(x)`.
pub fn point_owner(grid: &BlockGrid, x: [f64; 3]) -> Result<(usize, [f64; 3])> {
    let dims = grid.global_dims();
    let periodic = grid.periodicity();
    let mut wrapped = x;
    let mut cell = [0usize; 3];
    for a in 0..3 {
        let n = dims[a] as f64;
        if !x[a].is_finite() {
            return Err(Error::Ownership(format!("actuator point at {x:?} is not finite")));
        }
        if periodic[a] {
            wrapped[a] = x[a].rem_euclid(n);
            if wrapped[a] >= n {
                wrapped[a] = 0.0;
            }
        } else if !(x[a] >= -0.5 && x[a] <= n - 0.5) {
            return Err(Error::Ownership(format!(
                "actuator point at lattice coordinate {x:?} lies outside the domain"
            )));
        }
        cell[a] = (wrapped[a].floor().max(0.0) as usize).min(dims[a] - 1);
    }
    Ok((grid.locate(cell).0, wrapped))
}

/// Blocks whose interior intersects the 3×3×3 spreading support of `x`
/// (which contains the 2×2×2 sampling cube), ascending.
pub fn support_blocks(grid: &BlockGrid, x: [f64; 3]) -> Vec<usize> {
    let s: [i64; 3] = std::array::from_fn(|a| roma_support(x[a]).0);
    let mut out = Vec::new();
    for dz in 0..3 {
        for dy in 0..3 {
            for dx in 0..3 {
                if let Some(c) = grid.wrap_cell([s[0] + dx, s[1] + dy, s[2] + dz]) {
                    out.push(grid.locate(c).0);
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Sends each point from its owner to every other block its support
/// touches. `points[k].source` must be the owner. Returns, per block, the
/// points it must deposit, sorted by id.
pub fn mark_and_exchange_points(points: &[ExchangeRecord], grid: &BlockGrid) -> Result<Vec<Vec<ExchangeRecord>>> {
    let n = grid.len();
    let mut local: Vec<Vec<ExchangeRecord>> = vec![Vec::new(); n];
    // outgoing buffers keyed by (source, destination)
    let mut outgoing: std::collections::BTreeMap<(usize, usize), Vec<ExchangeRecord>> = Default::default();
    for p in points {
        let src = p.source as usize;
        if src >= n {
            return Err(Error::Ownership(format!("point {} claims unknown block {src}", p.id)));
        }
        for b in support_blocks(grid, p.position) {
            if b == src {
                local[b].push(*p);
            } else {
                outgoing.entry((src, b)).or_default().push(*p);
            }
        }
    }
    for ((_, dst), records) in outgoing {
        let bytes = pack_records(&records);
        local[dst].extend(unpack_records(&bytes)?);
    }
    for list in &mut local {
        list.sort_by_key(|r| r.id);
    }
    Ok(local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::decompose_domain;

    fn rec(id: u32, source: u32, position: [f64; 3]) -> ExchangeRecord {
        ExchangeRecord { id, source, position, force: [1.0, -2.5, f64::MIN_POSITIVE] }
    }

    #[test]
    fn record_round_trip_is_exact() {
        let r = vec![rec(7, 3, [0.1, 1e300, -0.0]), rec(u32::MAX, 0, [f64::EPSILON, 2.0, 3.0])];
        let bytes = pack_records(&r);
        assert_eq!(bytes.len(), 2 * EXCHANGE_RECORD_BYTES);
        assert_eq!(unpack_records(&bytes).unwrap(), r);
        assert!(matches!(unpack_records(&bytes[..55]), Err(Error::Protocol(_))));
    }

    #[test]
    fn interior_point_is_not_marked() {
        let grid = decompose_domain([16, 16, 16], [8, 8, 8], [true; 3]).unwrap();
        assert_eq!(support_blocks(&grid, [5.5, 2.0, 3.7]), vec![0]);
        let lists = mark_and_exchange_points(&[rec(0, 0, [5.5, 2.0, 3.7])], &grid).unwrap();
        assert_eq!(lists.iter().map(Vec::len).sum::<usize>(), 1);
    }

    #[test]
    fn point_near_face_goes_to_that_neighbor_only() {
        let grid = decompose_domain([16, 16, 16], [8, 8, 8], [true; 3]).unwrap();
        let x = [7.0, 3.0, 4.0];
        let (owner, _) = point_owner(&grid, x).unwrap();
        assert_eq!(owner, 0);
        let lists = mark_and_exchange_points(&[rec(4, 0, x)], &grid).unwrap();
        let holders: Vec<usize> = (0..grid.len()).filter(|b| !lists[*b].is_empty()).collect();
        assert_eq!(holders, vec![0, grid.neighbor(0, [1, 0, 0]).unwrap()]);
    }

    #[test]
    fn owner_wraps_periodic_coordinates() {
        let grid = decompose_domain([8, 8, 8], [4, 4, 4], [true, true, false]).unwrap();
        let (b, w) = point_owner(&grid, [-0.25, 8.5, 1.0]).unwrap();
        assert_eq!(w, [7.75, 0.5, 1.0]);
        assert_eq!(b, grid.locate([7, 0, 1]).0);
        assert!(point_owner(&grid, [1.0, 1.0, 7.6]).is_err());
        // support crossing the periodic seam reaches the far block
        assert!(support_blocks(&grid, [0.0, 1.0, 1.0]).contains(&grid.locate([7, 1, 1]).0));
    }
}
