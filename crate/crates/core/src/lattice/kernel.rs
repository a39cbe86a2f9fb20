use super::collision::{collide_unchecked, CollisionConfig};
use super::field::{ForceField, MacroField, PdfField};
use super::stencil::{Q, VELOCITIES};
use crate::Real;

/// First interior cell whose post-collision state is not finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelFault {
    pub cell: [usize; 3],
}

/// Fused pull-stream and collide over one block.
///
/// For every interior cell the populations are gathered from `src` at
/// `x - c_i` (ghost layer must be filled), collided with the cell force and
/// written to `dst`. The pre-collision density and force-shifted velocity are
/// written to `macro_out`. Equivalent to [`super::stream`] followed by
/// [`super::collide`] per cell.
pub fn stream_collide_block<T: Real>(
    src: &PdfField<T>,
    dst: &mut PdfField<T>,
    force: &ForceField<T>,
    macro_out: &mut MacroField<T>,
    cfg: &CollisionConfig,
) -> Result<(), KernelFault> {
    let dims = src.dims();
    debug_assert_eq!(dims, dst.dims());
    let [px, py, _] = src.padded_dims();
    let offsets: [isize; Q] = std::array::from_fn(|i| {
        let c = VELOCITIES[i];
        -(c[0] as isize + c[1] as isize * px as isize + c[2] as isize * (px * py) as isize)
    });
    let src_data = src.data();
    let force_data = force.data();
    let mut fault = None;
    for z in 0..dims[2] as isize {
        for y in 0..dims[1] as isize {
            let row = src.cell_index(0, y, z);
            for x in 0..dims[0] {
                let cell = row + x;
                let mut f = [0.0; Q];
                for i in 0..Q {
                    let from = (cell as isize + offsets[i]) as usize;
                    f[i] = src_data[from * Q + i].to_f64();
                }
                let fc = &force_data[cell * 3..cell * 3 + 3];
                let fv = [fc[0].to_f64(), fc[1].to_f64(), fc[2].to_f64()];
                let (out, state) = collide_unchecked(&f, fv, cfg, 1.0);
                let d = &mut dst.data_mut()[cell * Q..(cell + 1) * Q];
                for i in 0..Q {
                    d[i] = T::from_f64(out[i]);
                }
                let m = &mut macro_out.data_mut()[cell * 4..cell * 4 + 4];
                m[0] = T::from_f64(state.rho);
                m[1] = T::from_f64(state.u[0]);
                m[2] = T::from_f64(state.u[1]);
                m[3] = T::from_f64(state.u[2]);
                let finite = state.rho.is_finite()
                    && state.u.iter().all(|v| v.is_finite())
                    && out.iter().all(|v| v.is_finite());
                if !finite && fault.is_none() {
                    fault = Some(KernelFault {
                        cell: [x, y as usize, z as usize],
                    });
                }
            }
        }
    }
    match fault {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
