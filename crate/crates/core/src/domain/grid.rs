use serde::Serialize;

use crate::{Error, Result};

/// Number of face, edge and corner neighbours of a block.
pub const NEIGHBOR_COUNT: usize = 26;

/// The 26 neighbour offsets in a fixed order: z slowest, x fastest, skipping
/// `(0, 0, 0)`.
pub const fn neighbor_offsets() -> [[i32; 3]; NEIGHBOR_COUNT] {
    let mut out = [[0; 3]; NEIGHBOR_COUNT];
    let mut n = 0;
    let mut dz = -1;
    while dz <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dx = -1;
            while dx <= 1 {
                if !(dx == 0 && dy == 0 && dz == 0) {
                    out[n] = [dx, dy, dz];
                    n += 1;
                }
                dx += 1;
            }
            dy += 1;
        }
        dz += 1;
    }
    out
}

/// Position of `offset` in [`neighbor_offsets`].
pub fn offset_slot(offset: [i32; 3]) -> usize {
    let raw = ((offset[2] + 1) * 9 + (offset[1] + 1) * 3 + (offset[0] + 1)) as usize;
    if raw > 13 {
        raw - 1
    } else {
        raw
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDescriptor {
    /// Linear id, `bx + nbx * (by + nby * bz)`.
    pub id: usize,
    pub block_index: [usize; 3],
    /// Global cell coordinate of the first interior cell.
    pub origin: [usize; 3],
    pub owner: usize,
    pub weight: f64,
    /// Neighbour block id per entry of [`neighbor_offsets`]; `None` across a
    /// non-periodic domain face.
    pub neighbors: [Option<usize>; NEIGHBOR_COUNT],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockGrid {
    global_dims: [usize; 3],
    block_dims: [usize; 3],
    block_counts: [usize; 3],
    periodicity: [bool; 3],
    blocks: Vec<BlockDescriptor>,
}

impl BlockGrid {
    pub fn global_dims(&self) -> [usize; 3] {
        self.global_dims
    }

    pub fn block_dims(&self) -> [usize; 3] {
        self.block_dims
    }

    pub fn block_counts(&self) -> [usize; 3] {
        self.block_counts
    }

    pub fn periodicity(&self) -> [bool; 3] {
        self.periodicity
    }

    pub fn blocks(&self) -> &[BlockDescriptor] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> &BlockDescriptor {
        &self.blocks[id]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn total_cells(&self) -> usize {
        self.global_dims.iter().product()
    }

    pub fn block_id(&self, index: [usize; 3]) -> usize {
        index[0] + self.block_counts[0] * (index[1] + self.block_counts[1] * index[2])
    }

    pub fn neighbor(&self, id: usize, offset: [i32; 3]) -> Option<usize> {
        self.blocks[id].neighbors[offset_slot(offset)]
    }

    /// Block owning a global cell plus the cell's local coordinates.
    pub fn locate(&self, cell: [usize; 3]) -> (usize, [usize; 3]) {
        let index: [usize; 3] = std::array::from_fn(|a| cell[a] / self.block_dims[a]);
        let local: [usize; 3] = std::array::from_fn(|a| cell[a] % self.block_dims[a]);
        (self.block_id(index), local)
    }

    /// Wraps a possibly out-of-range global cell coordinate on periodic axes.
    /// Returns `None` if the cell lies outside a non-periodic axis.
    pub fn wrap_cell(&self, cell: [i64; 3]) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for a in 0..3 {
            let n = self.global_dims[a] as i64;
            let v = cell[a];
            if (0..n).contains(&v) {
                out[a] = v as usize;
            } else if self.periodicity[a] {
                out[a] = v.rem_euclid(n) as usize;
            } else {
                return None;
            }
        }
        Some(out)
    }

    pub fn set_owners(&mut self, owners: &[usize]) {
        assert_eq!(owners.len(), self.blocks.len());
        for (b, &o) in self.blocks.iter_mut().zip(owners) {
            b.owner = o;
        }
    }

    pub fn set_weights(&mut self, weights: &[f64]) {
        assert_eq!(weights.len(), self.blocks.len());
        for (b, &w) in self.blocks.iter_mut().zip(weights) {
            b.weight = w;
        }
    }

    /// Whether global cell `cell` lies inside block `id`'s interior.
    pub fn contains(&self, id: usize, cell: [usize; 3]) -> bool {
        let b = &self.blocks[id];
        (0..3).all(|a| cell[a] >= b.origin[a] && cell[a] < b.origin[a] + self.block_dims[a])
    }
}

/// Splits `global_dims` into equally sized blocks of `block_dims` cells and
/// resolves the 26-neighbourhood of every block.
pub fn decompose_domain(
    global_dims: [usize; 3],
    block_dims: [usize; 3],
    periodicity: [bool; 3],
) -> Result<BlockGrid> {
    for a in 0..3 {
        if global_dims[a] == 0 || block_dims[a] == 0 {
            return Err(Error::Config(format!(
                "domain and block dimensions must be positive (axis {a})"
            )));
        }
        if global_dims[a] % block_dims[a] != 0 {
            return Err(Error::Config(format!(
                "block size {} does not divide domain size {} along axis {a}",
                block_dims[a], global_dims[a]
            )));
        }
    }
    let counts: [usize; 3] = std::array::from_fn(|a| global_dims[a] / block_dims[a]);
    let offsets = neighbor_offsets();
    let mut blocks = Vec::with_capacity(counts.iter().product());
    for bz in 0..counts[2] {
        for by in 0..counts[1] {
            for bx in 0..counts[0] {
                let index = [bx, by, bz];
                let mut neighbors = [None; NEIGHBOR_COUNT];
                for (slot, off) in offsets.iter().enumerate() {
                    let mut n = [0usize; 3];
                    let mut valid = true;
                    for a in 0..3 {
                        let v = index[a] as i64 + off[a] as i64;
                        let c = counts[a] as i64;
                        if (0..c).contains(&v) {
                            n[a] = v as usize;
                        } else if periodicity[a] {
                            n[a] = v.rem_euclid(c) as usize;
                        } else {
                            valid = false;
                        }
                    }
                    if valid {
                        neighbors[slot] = Some(n[0] + counts[0] * (n[1] + counts[1] * n[2]));
                    }
                }
                blocks.push(BlockDescriptor {
                    id: blocks.len(),
                    block_index: index,
                    origin: std::array::from_fn(|a| index[a] * block_dims[a]),
                    owner: 0,
                    weight: 1.0,
                    neighbors,
                });
            }
        }
    }
    Ok(BlockGrid {
        global_dims,
        block_dims,
        block_counts: counts,
        periodicity,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_slots_match_the_table() {
        for (slot, off) in neighbor_offsets().iter().enumerate() {
            assert_eq!(offset_slot(*off), slot);
        }
    }

    #[test]
    fn two_blocks_along_x_see_each_other_twice() {
        let g = decompose_domain([64, 32, 32], [32, 32, 32], [true; 3]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.neighbor(0, [1, 0, 0]), Some(1));
        assert_eq!(g.neighbor(0, [-1, 0, 0]), Some(1));
        assert_eq!(g.neighbor(1, [1, 0, 0]), Some(0));
        assert_eq!(g.neighbor(1, [-1, 0, 0]), Some(0));
        assert_eq!(g.neighbor(0, [0, 1, 0]), Some(0));
    }

    #[test]
    fn single_block_is_its_own_neighbor() {
        let g = decompose_domain([16, 16, 16], [16, 16, 16], [true; 3]).unwrap();
        assert!(g.block(0).neighbors.iter().all(|n| *n == Some(0)));
    }

    #[test]
    fn four_blocks_resolve_all_slots_by_brute_force() {
        let g = decompose_domain([64, 64, 32], [32, 32, 32], [true; 3]).unwrap();
        assert_eq!(g.len(), 4);
        for b in g.blocks() {
            for (slot, off) in neighbor_offsets().iter().enumerate() {
                // the neighbour is whichever block contains the cell just past
                // the block corner in direction `off`
                let probe: [i64; 3] = std::array::from_fn(|a| {
                    let o = b.origin[a] as i64;
                    match off[a] {
                        -1 => o - 1,
                        0 => o,
                        _ => o + 32,
                    }
                });
                let cell = g.wrap_cell(probe).unwrap();
                let (expected, _) = g.locate(cell);
                assert_eq!(b.neighbors[slot], Some(expected));
            }
        }
    }

    #[test]
    fn neighbor_relation_is_symmetric() {
        for periodic in [[true; 3], [false, true, true], [false; 3]] {
            let g = decompose_domain([12, 8, 6], [4, 4, 3], periodic).unwrap();
            for b in g.blocks() {
                for off in neighbor_offsets() {
                    if let Some(n) = g.neighbor(b.id, off) {
                        let back = [-off[0], -off[1], -off[2]];
                        assert_eq!(g.neighbor(n, back), Some(b.id));
                    }
                }
            }
        }
    }

    #[test]
    fn non_periodic_faces_have_no_neighbor() {
        let g = decompose_domain([8, 4, 4], [4, 4, 4], [false, true, true]).unwrap();
        assert_eq!(g.neighbor(0, [-1, 0, 0]), None);
        assert_eq!(g.neighbor(0, [1, 0, 0]), Some(1));
        assert_eq!(g.neighbor(1, [1, 1, 0]), None);
    }

    #[test]
    fn non_divisible_dims_are_rejected() {
        assert!(matches!(
            decompose_domain([10, 8, 8], [4, 8, 8], [true; 3]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn every_cell_has_one_owner() {
        let g = decompose_domain([6, 4, 4], [3, 2, 4], [true; 3]).unwrap();
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..6 {
                    let owners = g.blocks().iter().filter(|b| g.contains(b.id, [x, y, z])).count();
                    assert_eq!(owners, 1);
                }
            }
        }
    }
}
