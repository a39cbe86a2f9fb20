use crate::lattice::{Field, ForceField};
use crate::{Error, Real, Result};

/// Three-point discrete delta of Roma, Peskin and Berger; `r` in cells.
pub fn roma_delta_weight(r: f64) -> f64 {
    let a = r.abs();
    if a <= 0.5 {
        (1.0 + (1.0 - 3.0 * a * a).sqrt()) / 3.0
    } else if a <= 1.5 {
        let b = 1.0 - a;
        (5.0 - 3.0 * a - (1.0 - 3.0 * b * b).max(0.0).sqrt()) / 6.0
    } else {
        0.0
    }
}

/// First cell of the 1D spreading support of lattice coordinate `x` and the
/// weights of that cell and the next two.
pub fn roma_support(x: f64) -> (i64, [f64; 3]) {
    let j0 = (x - 1.5).floor() as i64 + 1;
    (j0, std::array::from_fn(|k| roma_delta_weight(x - (j0 + k as i64) as f64)))
}

/// Lattice coordinate of a world coordinate: cell `i` has its centre at
/// `(i + 1/2) dx`, so cell centres sit at integer lattice coordinates.
pub fn lattice_coordinate(x_world: f64, dx: f64) -> f64 {
    x_world / dx - 0.5
}

pub fn world_coordinate(x_lattice: f64, dx: f64) -> f64 {
    (x_lattice + 0.5) * dx
}

/// Trilinear interpolation of a block field at block-local lattice
/// coordinates. The 2×2×2 cube of cell centres around the point must lie in
/// the interior or the ghost layer.
pub fn sample_trilinear<T: Real, const N: usize>(field: &Field<T, N>, local: [f64; 3]) -> Result<[f64; N]> {
    let dims = field.dims();
    let mut i0 = [0isize; 3];
    let mut s = [0.0; 3];
    for a in 0..3 {
        let fl = local[a].floor();
        if !(fl >= -1.0 && fl <= dims[a] as f64 - 1.0) {
            return Err(Error::Ownership(format!(
                "sampling at local coordinate {local:?} needs cells outside block {dims:?} and its ghosts"
            )));
        }
        i0[a] = fl as isize;
        s[a] = local[a] - fl;
    }
    let mut out = [0.0; N];
    for dz in 0..2 {
        let wz = if dz == 0 { 1.0 - s[2] } else { s[2] };
        for dy in 0..2 {
            let wy = if dy == 0 { 1.0 - s[1] } else { s[1] };
            for dx in 0..2 {
                let wx = if dx == 0 { 1.0 - s[0] } else { s[0] };
                let w = wx * wy * wz;
                if w == 0.0 {
                    continue;
                }
                let c = field.cell(i0[0] + dx, i0[1] + dy, i0[2] + dz);
                for (o, v) in out.iter_mut().zip(c) {
                    *o += w * v.to_f64();
                }
            }
        }
    }
    Ok(out)
}

/// Adds `force` spread with the Roma kernel around global lattice coordinate
/// `x` to the interior cells of a block whose first interior cell has global
/// index `origin`. Support cells are wrapped on periodic axes and dropped
/// outside non-periodic ones. The linear index of every written cell is
/// appended to `touched`.
pub fn spread_point<T: Real>(
    field: &mut ForceField<T>,
    origin: [usize; 3],
    global_dims: [usize; 3],
    periodicity: [bool; 3],
    x: [f64; 3],
    force: [f64; 3],
    touched: &mut Vec<usize>,
) {
    let dims = field.dims();
    let supports: [(i64, [f64; 3]); 3] = std::array::from_fn(|a| roma_support(x[a]));
    // local index per axis and support slot, None when outside this block
    let local: [[Option<isize>; 3]; 3] = std::array::from_fn(|a| {
        std::array::from_fn(|k| {
            let mut j = supports[a].0 + k as i64;
            let n = global_dims[a] as i64;
            if periodicity[a] {
                j = j.rem_euclid(n);
            } else if !(0..n).contains(&j) {
                return None;
            }
            let l = j - origin[a] as i64;
            (0..dims[a] as i64).contains(&l).then_some(l as isize)
        })
    });
    for kz in 0..3 {
        let Some(z) = local[2][kz] else { continue };
        for ky in 0..3 {
            let Some(y) = local[1][ky] else { continue };
            let wyz = supports[1].1[ky] * supports[2].1[kz];
            for kx in 0..3 {
                let Some(xl) = local[0][kx] else { continue };
                let w = supports[0].1[kx] * wyz;
                if w == 0.0 {
                    continue;
                }
                touched.push(field.cell_index(xl, y, z));
                let cell = field.cell_mut(xl, y, z);
                for c in 0..3 {
                    cell[c] = T::from_f64(cell[c].to_f64() + w * force[c]);
                }
            }
        }
    }
}
