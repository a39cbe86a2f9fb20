use serde::{Deserialize, Serialize};

use super::grid::BlockGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    #[default]
    Morton,
    Hilbert,
}

/// Bit-interleaved Z-order key (x in the lowest bit of each triple).
pub fn morton_index(index: [usize; 3]) -> u64 {
    let mut key = 0u64;
    for bit in 0..21 {
        for a in 0..3 {
            key |= (((index[a] >> bit) & 1) as u64) << (3 * bit + a);
        }
    }
    key
}

/// Position along a 3D Hilbert curve on a `2^bits` cube (Skilling's
/// transpose construction).
pub fn hilbert_index(index: [usize; 3], bits: u32) -> u64 {
    let mut x = index.map(|v| v as u32);
    if bits == 0 {
        return 0;
    }
    let m = 1u32 << (bits - 1);
    let mut q = m;
    while q > 1 {
        let p = q - 1;
        for i in 0..3 {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..3 {
        x[i] ^= x[i - 1];
    }
    let mut t = 0;
    q = m;
    while q > 1 {
        if x[2] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for v in x.iter_mut() {
        *v ^= t;
    }
    let mut key = 0u64;
    for b in (0..bits).rev() {
        for v in x {
            key = (key << 1) | ((v >> b) & 1) as u64;
        }
    }
    key
}

/// Block ids sorted along the chosen curve.
pub fn curve_order(grid: &BlockGrid, curve: Curve) -> Vec<usize> {
    let counts = grid.block_counts();
    let largest = *counts.iter().max().unwrap_or(&1);
    let bits = usize::BITS - (largest.max(1) - 1).leading_zeros();
    let mut keyed: Vec<(u64, usize)> = grid
        .blocks()
        .iter()
        .map(|b| {
            let key = match curve {
                Curve::Morton => morton_index(b.block_index),
                Curve::Hilbert => hilbert_index(b.block_index, bits.max(1)),
            };
            (key, b.id)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, id)| id).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    /// Worker per block id.
    pub owners: Vec<usize>,
    /// Summed block weight per worker.
    pub loads: Vec<f64>,
    /// Block ids in curve order.
    pub order: Vec<usize>,
}

impl Assignment {
    pub fn blocks_of(&self, worker: usize) -> Vec<usize> {
        self.order
            .iter()
            .copied()
            .filter(|&b| self.owners[b] == worker)
            .collect()
    }

    pub fn imbalance(&self) -> f64 {
        let max = self.loads.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.loads.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }
}

/// Orders blocks along a space-filling curve and cuts the sequence into
/// `n_workers` contiguous segments whose weight sums differ by at most the
/// largest single block weight.
pub fn balance_blocks_weighted_sfc(
    grid: &BlockGrid,
    n_workers: usize,
    curve: Curve,
) -> Result<Assignment> {
    if n_workers == 0 {
        return Err(Error::InvalidArgument("at least one worker is required".into()));
    }
    if n_workers > grid.len() {
        log::warn!(
            "{n_workers} workers for {} blocks: some workers stay idle",
            grid.len()
        );
    }
    let order = curve_order(grid, curve);
    let weights: Vec<f64> = order.iter().map(|&b| grid.block(b).weight).collect();
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument(format!("block weight {w} is not positive")));
    }
    let cuts = contiguous_partition(&weights, n_workers);
    let mut owners = vec![0; grid.len()];
    let mut loads = vec![0.0; n_workers];
    for w in 0..n_workers {
        for k in cuts[w]..cuts[w + 1] {
            owners[order[k]] = w;
            loads[w] += weights[k];
        }
    }
    Ok(Assignment { owners, loads, order })
}

/// Cut positions `c_0 = 0 <= c_1 <= .. <= c_n = len` such that the segment
/// sums differ by at most `max(weights)`.
///
/// Tries candidate minimum loads (segment sums just below the mean, and zero
/// when empty segments are allowed) from the largest down and returns the
/// first partition with every load inside `[lo, lo + max]`.
fn contiguous_partition(weights: &[f64], n: usize) -> Vec<usize> {
    let len = weights.len();
    let mut prefix = vec![0.0; len + 1];
    for (k, w) in weights.iter().enumerate() {
        prefix[k + 1] = prefix[k] + w;
    }
    let total = prefix[len];
    let wmax = weights.iter().cloned().fold(0.0, f64::max);
    let mean = total / n as f64;
    let eps = 1e-9 * total.max(1.0);

    let mut candidates = vec![0.0];
    for start in 0..len {
        for end in start + 1..=len {
            let s = prefix[end] - prefix[start];
            if s > mean + eps {
                break;
            }
            if s >= mean - wmax - eps {
                candidates.push(s);
            }
        }
    }
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    candidates.dedup_by(|a, b| (*a - *b).abs() <= eps);

    for lo in candidates {
        if let Some(cuts) = partition_within(&prefix, n, lo - eps, lo + wmax + eps) {
            return cuts;
        }
    }
    // Not expected to happen; fall back to proportional rounding.
    log::warn!("no contiguous partition within the balance bound was found");
    let mut cuts = vec![0];
    for j in 1..n {
        let target = mean * j as f64;
        let k = prefix.partition_point(|p| *p <= target).saturating_sub(1);
        cuts.push(k.max(*cuts.last().unwrap()));
    }
    cuts.push(len);
    cuts
}

/// Feasibility search: can the sequence be cut into `n` segments whose sums
/// all lie in `[lo, hi]`?
fn partition_within(prefix: &[f64], n: usize, lo: f64, hi: f64) -> Option<Vec<usize>> {
    let len = prefix.len() - 1;
    // parent[j][k]: start of segment j (1-based) ending at k, if reachable
    let mut parent = vec![vec![usize::MAX; len + 1]; n + 1];
    let mut reach = vec![false; len + 1];
    reach[0] = true;
    for j in 1..=n {
        // last reachable index <= k
        let mut last = vec![usize::MAX; len + 1];
        let mut seen = usize::MAX;
        for k in 0..=len {
            if reach[k] {
                seen = k;
            }
            last[k] = seen;
        }
        let mut next = vec![false; len + 1];
        for k in 0..=len {
            // predecessors k' <= k with prefix[k'] in [prefix[k]-hi, prefix[k]-lo]
            let upper_val = prefix[k] - lo;
            let lower_val = prefix[k] - hi;
            let hi_idx = prefix[..=k].partition_point(|p| *p <= upper_val);
            if hi_idx == 0 {
                continue;
            }
            let cand = last[hi_idx - 1];
            if cand != usize::MAX && prefix[cand] >= lower_val {
                next[k] = true;
                parent[j][k] = cand;
            }
        }
        reach = next;
    }
    if !reach[len] {
        return None;
    }
    let mut cuts = vec![len];
    let mut k = len;
    for j in (1..=n).rev() {
        k = parent[j][k];
        cuts.push(k);
    }
    cuts.reverse();
    Some(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::grid::decompose_domain;
    use proptest::prelude::*;

    fn grid_with_weights(counts: [usize; 3], weights: &[f64]) -> BlockGrid {
        let mut g = decompose_domain(counts.map(|c| c * 4), [4, 4, 4], [true; 3]).unwrap();
        g.set_weights(weights);
        g
    }

    /// Smallest max-min spread over all contiguous splits.
    fn brute_force_spread(weights: &[f64], n: usize) -> f64 {
        fn rec(w: &[f64], n: usize, loads: &mut Vec<f64>, best: &mut f64) {
            if n == 1 {
                loads.push(w.iter().sum());
                let max = loads.iter().cloned().fold(f64::MIN, f64::max);
                let min = loads.iter().cloned().fold(f64::MAX, f64::min);
                *best = best.min(max - min);
                loads.pop();
                return;
            }
            for cut in 0..=w.len() {
                loads.push(w[..cut].iter().sum());
                rec(&w[cut..], n - 1, loads, best);
                loads.pop();
            }
        }
        let mut best = f64::MAX;
        rec(weights, n, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn equal_weights_split_evenly() {
        let g = grid_with_weights([2, 2, 2], &[1.0; 8]);
        let a = balance_blocks_weighted_sfc(&g, 4, Curve::Morton).unwrap();
        assert_eq!(a.loads, vec![2.0; 4]);
    }

    #[test]
    fn one_heavy_block_of_four() {
        let weights = [1.0, 1.0, 3.0, 1.0];
        let g = grid_with_weights([4, 1, 1], &weights);
        let a = balance_blocks_weighted_sfc(&g, 2, Curve::Morton).unwrap();
        let ordered: Vec<f64> = a.order.iter().map(|&b| weights[b]).collect();
        let best = brute_force_spread(&ordered, 2);
        assert!(a.imbalance() <= 3.0);
        assert!((a.imbalance() - best).abs() < 1e-12, "{} vs {best}", a.imbalance());
    }

    #[test]
    fn single_worker_takes_everything() {
        let g = grid_with_weights([2, 2, 1], &[1.0, 2.0, 3.0, 4.0]);
        let a = balance_blocks_weighted_sfc(&g, 1, Curve::Hilbert).unwrap();
        assert!(a.owners.iter().all(|&o| o == 0));
        assert_eq!(a.loads, vec![10.0]);
    }

    #[test]
    fn more_workers_than_blocks_is_allowed() {
        let g = grid_with_weights([2, 1, 1], &[1.0, 1.5]);
        let a = balance_blocks_weighted_sfc(&g, 4, Curve::Morton).unwrap();
        assert_eq!(a.loads.len(), 4);
        assert!(a.imbalance() <= 1.5);
        assert!(balance_blocks_weighted_sfc(&g, 0, Curve::Morton).is_err());
    }

    #[test]
    fn hilbert_curve_steps_between_face_neighbors() {
        for bits in 1..=3u32 {
            let n = 1usize << bits;
            let mut cells = Vec::new();
            for z in 0..n {
                for y in 0..n {
                    for x in 0..n {
                        cells.push((hilbert_index([x, y, z], bits), [x, y, z]));
                    }
                }
            }
            cells.sort();
            for (k, (key, _)) in cells.iter().enumerate() {
                assert_eq!(*key, k as u64);
            }
            for pair in cells.windows(2) {
                let d: usize = (0..3).map(|a| pair[0].1[a].abs_diff(pair[1].1[a])).sum();
                assert_eq!(d, 1);
            }
        }
    }

    #[test]
    fn morton_interleaves_bits() {
        assert_eq!(morton_index([1, 0, 0]), 1);
        assert_eq!(morton_index([0, 1, 0]), 2);
        assert_eq!(morton_index([0, 0, 1]), 4);
        assert_eq!(morton_index([2, 0, 0]), 8);
    }

    proptest! {
        #[test]
        fn balance_bound_holds(
            weights in prop::collection::vec(0.1f64..10.0, 1..40),
            n in 1usize..9,
            hilbert in any::<bool>(),
        ) {
            let len = weights.len();
            let mut g = decompose_domain([len * 2, 2, 2], [2, 2, 2], [true; 3]).unwrap();
            g.set_weights(&weights);
            let curve = if hilbert { Curve::Hilbert } else { Curve::Morton };
            let a = balance_blocks_weighted_sfc(&g, n, curve).unwrap();
            let wmax = weights.iter().cloned().fold(0.0, f64::max);
            prop_assert!(a.imbalance() <= wmax + 1e-9);
            let total: f64 = weights.iter().sum();
            prop_assert!((a.loads.iter().sum::<f64>() - total).abs() < 1e-9);
            // contiguity along the curve
            let seq: Vec<usize> = a.order.iter().map(|&b| a.owners[b]).collect();
            prop_assert!(seq.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
