use super::field::PdfField;
use super::stencil::{Q, VELOCITIES};
use crate::Real;

/// Pull streaming into a new field: `f_i(x) <- f_i(x - c_i)` for every
/// interior cell. The source ghost layer must already hold neighbour data.
/// The force field is carried over unchanged; the destination ghost layer is
/// left zeroed.
pub fn stream<T: Real>(src: &PdfField<T>) -> PdfField<T> {
    let mut dst = PdfField::new(src.dims());
    let [nx, ny, nz] = src.dims();
    for z in 0..nz as isize {
        for y in 0..ny as isize {
            for x in 0..nx as isize {
                let cell = dst.cell_index(x, y, z);
                for i in 0..Q {
                    let c = VELOCITIES[i];
                    let from =
                        src.cell_index(x - c[0] as isize, y - c[1] as isize, z - c[2] as isize);
                    dst.data_mut()[cell * Q + i] = src.data()[from * Q + i];
                }
            }
        }
    }
    dst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::stencil::direction_index;

    #[test]
    fn value_moves_one_cell_along_its_velocity() {
        let mut f = PdfField::<f64>::new([4, 4, 4]);
        let east = direction_index(1, 0, 0);
        f.set(0, 0, 0, east, 1.0);
        let out = stream(&f);
        assert_eq!(out.get(1, 0, 0, east), 1.0);
        assert_eq!(out.get(0, 0, 0, east), 0.0);
    }

    #[test]
    fn periodic_wrap_on_a_single_block() {
        let mut f = PdfField::<f64>::new([4, 3, 3]);
        let east = direction_index(1, 0, 0);
        f.set(3, 1, 1, east, 2.5);
        f.fill_periodic_ghosts();
        let out = stream(&f);
        assert_eq!(out.get(0, 1, 1, east), 2.5);
    }

    #[test]
    fn total_mass_is_conserved_on_a_periodic_block() {
        let mut f = PdfField::<f64>::new([5, 4, 3]);
        let mut state = 12345u64;
        for z in 0..3 {
            for y in 0..4 {
                for x in 0..5 {
                    for i in 0..Q {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        f.set(x, y, z, i, (state >> 11) as f64 / (1u64 << 53) as f64);
                    }
                }
            }
        }
        let before = f.interior_sum();
        f.fill_periodic_ghosts();
        let after = stream(&f).interior_sum();
        assert!(((after - before) / before).abs() < 1e-12);
    }
}
