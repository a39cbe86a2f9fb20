use super::grid::BlockGrid;
use crate::lattice::{
    equilibrium_for, CollisionOperator, PdfField, MAX_LATTICE_VELOCITY, OPPOSITE, Q, VELOCITIES,
};
use crate::{Error, Real, Result};

/// Treatment of the outer domain faces. Velocities are in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OuterBoundary {
    /// Fully periodic; handled entirely by the halo exchange.
    #[default]
    Periodic,
    /// Equilibrium inflow at rho = 1 on the -x face, zero-gradient outflow on
    /// the +x face; y and z stay periodic.
    VelocityInflowOutflow { u_in: [f64; 3] },
    /// Resting no-slip walls halfway between the first interior cell and the
    /// ghost cell on both y faces (bounce-back); x and z stay periodic.
    ChannelWalls,
}

impl OuterBoundary {
    pub fn periodicity(&self) -> [bool; 3] {
        match self {
            Self::Periodic => [true; 3],
            Self::VelocityInflowOutflow { .. } => [false, true, true],
            Self::ChannelWalls => [true, false, true],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::VelocityInflowOutflow { u_in } = self {
            let mag = u_in.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !mag.is_finite() || mag > MAX_LATTICE_VELOCITY {
                return Err(Error::Config(format!(
                    "inflow velocity {mag:.4} (lattice units) exceeds the limit {MAX_LATTICE_VELOCITY}"
                )));
            }
        }
        Ok(())
    }
}

/// Overwrites the ghost cells of `block` that lie on a non-periodic outer
/// face. Must run after the halo exchange of the same step; `field` holds
/// post-collision populations.
pub fn apply_outer_boundary<T: Real>(
    grid: &BlockGrid,
    block: usize,
    field: &mut PdfField<T>,
    spec: &OuterBoundary,
    op: CollisionOperator,
) -> Result<()> {
    spec.validate()?;
    if spec.periodicity() != grid.periodicity() {
        return Err(Error::Config(format!(
            "boundary {spec:?} needs periodicity {:?}, grid has {:?}",
            spec.periodicity(),
            grid.periodicity()
        )));
    }
    let index = grid.block(block).block_index;
    let counts = grid.block_counts();
    let [nx, ny, nz] = field.dims().map(|d| d as isize);
    match *spec {
        OuterBoundary::Periodic => {}
        OuterBoundary::VelocityInflowOutflow { u_in } => {
            if index[0] == 0 {
                let feq = equilibrium_for(op, 1.0, u_in)?;
                for z in -1..=nz {
                    for y in -1..=ny {
                        field.set_cell_f64(-1, y, z, &feq);
                    }
                }
            }
            if index[0] + 1 == counts[0] {
                for z in -1..=nz {
                    for y in -1..=ny {
                        let inner = field.cell_f64(nx - 1, y, z);
                        field.set_cell_f64(nx, y, z, &inner);
                    }
                }
            }
        }
        OuterBoundary::ChannelWalls => {
            if index[1] == 0 {
                bounce_back_plane(field, -1, 1, [nx, nz]);
            }
            if index[1] + 1 == counts[1] {
                bounce_back_plane(field, ny, -1, [nx, nz]);
            }
        }
    }
    Ok(())
}

/// Fills the ghost plane `y = gy` so that pulling across the wall returns the
/// reflected population of the adjacent fluid cell.
fn bounce_back_plane<T: Real>(field: &mut PdfField<T>, gy: isize, inward: i32, [nx, nz]: [isize; 2]) {
    for z in -1..=nz {
        for x in -1..=nx {
            for i in 0..Q {
                let c = VELOCITIES[i];
                if c[1] != inward {
                    continue;
                }
                let sx = x + c[0] as isize;
                let sz = z + c[2] as isize;
                if sx < -1 || sx > nx || sz < -1 || sz > nz {
                    continue;
                }
                let v = field.get(sx, gy + inward as isize, sz, OPPOSITE[i]);
                field.set(x, gy, z, i, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{decompose_domain, exchange_halos};
    use crate::lattice::{stream_collide_block, CollisionConfig, ForceField, MacroField};

    fn run(
        grid: &BlockGrid,
        spec: OuterBoundary,
        cfg: &CollisionConfig,
        init: [f64; 27],
        steps: usize,
    ) -> Vec<PdfField<f64>> {
        let dims = grid.block_dims();
        let mut fields: Vec<PdfField<f64>> = (0..grid.len())
            .map(|_| {
                let mut f = PdfField::new(dims);
                f.fill_interior_with(|_, _, _| init);
                f
            })
            .collect();
        let force = ForceField::<f64>::new(dims);
        let mut macro_out = MacroField::<f64>::new(dims);
        for _ in 0..steps {
            exchange_halos(grid, &mut fields).unwrap();
            for (b, f) in fields.iter_mut().enumerate() {
                apply_outer_boundary(grid, b, f, &spec, cfg.operator()).unwrap();
                let mut dst = PdfField::new(dims);
                stream_collide_block(f, &mut dst, &force, &mut macro_out, cfg).unwrap();
                *f = dst;
            }
        }
        fields
    }

    #[test]
    fn zero_inflow_keeps_fluid_at_rest() {
        let spec = OuterBoundary::VelocityInflowOutflow { u_in: [0.0; 3] };
        let grid = decompose_domain([8, 4, 4], [4, 4, 4], spec.periodicity()).unwrap();
        let cfg = CollisionConfig::bgk(1.2).unwrap();
        let rest = equilibrium_for(CollisionOperator::Bgk, 1.0, [0.0; 3]).unwrap();
        let fields = run(&grid, spec, &cfg, rest, 20);
        let mut reference = PdfField::<f64>::new([4, 4, 4]);
        reference.fill_interior_with(|_, _, _| rest);
        for f in &fields {
            assert!(f.max_interior_difference(&reference) < 1e-15);
        }
    }

    #[test]
    fn uniform_inflow_stays_uniform() {
        let u_in = [0.04, 0.01, 0.0];
        let spec = OuterBoundary::VelocityInflowOutflow { u_in };
        let grid = decompose_domain([12, 4, 4], [4, 4, 4], spec.periodicity()).unwrap();
        for cfg in [CollisionConfig::bgk(1.5).unwrap(), CollisionConfig::cumulant(1.5).unwrap()] {
            let feq = equilibrium_for(cfg.operator(), 1.0, u_in).unwrap();
            let fields = run(&grid, spec, &cfg, feq, 200);
            let mut reference = PdfField::<f64>::new([4, 4, 4]);
            reference.fill_interior_with(|_, _, _| feq);
            for f in &fields {
                assert!(f.max_interior_difference(&reference) < 1e-10);
            }
        }
    }

    #[test]
    fn periodic_spec_leaves_exchange_result() {
        let grid = decompose_domain([4, 4, 4], [4, 4, 4], [true; 3]).unwrap();
        let mut f = PdfField::<f64>::new([4, 4, 4]);
        f.fill_interior_with(|x, y, z| std::array::from_fn(|i| (x + 3 * y + 7 * z + i) as f64));
        let mut fields = vec![f];
        exchange_halos(&grid, &mut fields).unwrap();
        let before = fields[0].clone();
        apply_outer_boundary(&grid, 0, &mut fields[0], &OuterBoundary::Periodic, CollisionOperator::Bgk)
            .unwrap();
        assert_eq!(before, fields[0]);
    }

    #[test]
    fn walls_reflect_populations() {
        let spec = OuterBoundary::ChannelWalls;
        let grid = decompose_domain([3, 3, 3], [3, 3, 3], spec.periodicity()).unwrap();
        let mut f = PdfField::<f64>::new([3, 3, 3]);
        f.fill_interior_with(|x, y, z| std::array::from_fn(|i| (100 * i + 9 * z + 3 * y + x) as f64));
        let mut fields = vec![f];
        exchange_halos(&grid, &mut fields).unwrap();
        apply_outer_boundary(&grid, 0, &mut fields[0], &spec, CollisionOperator::Bgk).unwrap();
        let up = crate::lattice::direction_index(1, 1, 0);
        // population moving +x+y out of ghost (0,-1,1) lands on (1,0,1) and
        // must equal that cell's population moving -x-y
        assert_eq!(fields[0].get(0, -1, 1, up), fields[0].get(1, 0, 1, OPPOSITE[up]));
    }

    #[test]
    fn excessive_inflow_rejected() {
        let spec = OuterBoundary::VelocityInflowOutflow { u_in: [0.3, 0.0, 0.0] };
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
    }
}
