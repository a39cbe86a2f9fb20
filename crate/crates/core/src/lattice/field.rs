use crate::Real;

/// Number of values per cell in a macroscopic field: `rho, ux, uy, uz`.
pub const MACRO_COMPONENTS: usize = 4;
/// Number of values per cell in a force field.
pub const FORCE_COMPONENTS: usize = 3;

/// Cell-centred block field with a one-cell ghost layer and `N` values per
/// cell.
///
/// Layout: cells are stored x-fastest over the padded extent
/// `(nx+2) x (ny+2) x (nz+2)`, with the `N` components of a cell contiguous.
/// Interior coordinates run over `0..n`; ghost cells sit at `-1` and `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T, const N: usize> {
    dims: [usize; 3],
    padded: [usize; 3],
    data: Vec<T>,
}

pub type PdfField<T> = Field<T, 27>;
pub type MacroField<T> = Field<T, MACRO_COMPONENTS>;
pub type ForceField<T> = Field<T, FORCE_COMPONENTS>;

impl<T: Real, const N: usize> Field<T, N> {
    pub const GHOST_WIDTH: usize = 1;

    pub fn new(dims: [usize; 3]) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "field dims must be positive");
        let padded = [dims[0] + 2, dims[1] + 2, dims[2] + 2];
        Self {
            dims,
            padded,
            data: vec![T::default(); padded[0] * padded[1] * padded[2] * N],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn padded_dims(&self) -> [usize; 3] {
        self.padded
    }

    pub fn components(&self) -> usize {
        N
    }

    /// Linear cell index of padded coordinates; `x, y, z` range over
    /// `-1..=n`.
    #[inline(always)]
    pub fn cell_index(&self, x: isize, y: isize, z: isize) -> usize {
        debug_assert!(x >= -1 && y >= -1 && z >= -1);
        ((z + 1) as usize * self.padded[1] + (y + 1) as usize) * self.padded[0] + (x + 1) as usize
    }

    #[inline(always)]
    pub fn get(&self, x: isize, y: isize, z: isize, comp: usize) -> T {
        self.data[self.cell_index(x, y, z) * N + comp]
    }

    #[inline(always)]
    pub fn set(&mut self, x: isize, y: isize, z: isize, comp: usize, v: T) {
        let c = self.cell_index(x, y, z);
        self.data[c * N + comp] = v;
    }

    pub fn cell(&self, x: isize, y: isize, z: isize) -> &[T] {
        let c = self.cell_index(x, y, z);
        &self.data[c * N..(c + 1) * N]
    }

    pub fn cell_mut(&mut self, x: isize, y: isize, z: isize) -> &mut [T] {
        let c = self.cell_index(x, y, z);
        &mut self.data[c * N..(c + 1) * N]
    }

    pub fn cell_f64(&self, x: isize, y: isize, z: isize) -> [f64; N] {
        let s = self.cell(x, y, z);
        std::array::from_fn(|k| s[k].to_f64())
    }

    pub fn set_cell_f64(&mut self, x: isize, y: isize, z: isize, v: &[f64; N]) {
        let s = self.cell_mut(x, y, z);
        for k in 0..N {
            s[k] = T::from_f64(v[k]);
        }
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn fill(&mut self, v: T) {
        self.data.fill(v);
    }

    /// Calls `f(x, y, z)` for every interior cell and stores the result.
    pub fn fill_interior_with(&mut self, mut f: impl FnMut(usize, usize, usize) -> [f64; N]) {
        let [nx, ny, nz] = self.dims;
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let v = f(x, y, z);
                    self.set_cell_f64(x as isize, y as isize, z as isize, &v);
                }
            }
        }
    }

    /// Sum of every value over interior cells.
    pub fn interior_sum(&self) -> f64 {
        let mut acc = 0.0;
        let [nx, ny, nz] = self.dims;
        for z in 0..nz as isize {
            for y in 0..ny as isize {
                let start = self.cell_index(0, y, z) * N;
                acc += self.data[start..start + nx * N]
                    .iter()
                    .map(|v| v.to_f64())
                    .sum::<f64>();
            }
        }
        acc
    }

    /// Ghost layer filled as if this block were the whole, fully periodic
    /// domain.
    pub fn fill_periodic_ghosts(&mut self) {
        let [nx, ny, nz] = self.dims.map(|d| d as isize);
        let wrap = |v: isize, n: isize| v.rem_euclid(n);
        for z in -1..=nz {
            for y in -1..=ny {
                for x in -1..=nx {
                    let ghost = x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz;
                    if !ghost {
                        continue;
                    }
                    let src = self.cell_index(wrap(x, nx), wrap(y, ny), wrap(z, nz));
                    let dst = self.cell_index(x, y, z);
                    self.data.copy_within(src * N..(src + 1) * N, dst * N);
                }
            }
        }
    }

    /// Largest absolute element-wise difference over interior cells.
    pub fn max_interior_difference(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims);
        let [nx, ny, nz] = self.dims;
        let mut worst: f64 = 0.0;
        for z in 0..nz as isize {
            for y in 0..ny as isize {
                let s = self.cell_index(0, y, z) * N;
                for k in s..s + nx * N {
                    worst = worst.max((self.data[k].to_f64() - other.data[k].to_f64()).abs());
                }
            }
        }
        worst
    }
}
