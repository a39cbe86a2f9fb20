//! Coupled time loop over a decomposed lattice.
//!
//! Each step runs, in order:
//!
//! 1. turbine coupling: sample density and velocity at every actuator point
//!    from the previous step's macroscopic output, compute the sectional or
//!    disk loads, hand the points to every block their kernel touches and
//!    spread the reaction forces;
//! 2. halo exchange of the populations and outer boundaries;
//! 3. fused streaming and collision with the Guo source, which also writes
//!    the new macroscopic fields;
//! 4. turbine kinematics advanced by one time step.
//!
//! The stored populations are post-collision values.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::actuator::{
    actuator_disk_forces, angle_of_attack, blade_element_force, freestream_from_disk_velocity,
    lattice_coordinate, mark_and_exchange_points, mean_thrust_coefficient, point_owner,
    sample_trilinear, spread_point, support_blocks, ExchangeRecord, PolarTable, TipLoss,
};
use crate::domain::{
    apply_outer_boundary, balance_blocks_weighted_sfc, decompose_domain, exchange_halos, Assignment,
    BlockGrid, Curve, OuterBoundary, WorkerPool,
};
use crate::lattice::{
    equilibrium_for, macroscopic_moments, stream_collide_block, CollisionConfig, ForceField, MacroField,
    PdfField, UnitSystem, Q, VELOCITIES_F64,
};
use crate::perf::{Phase, RunTimer};
use crate::turbine::{Discretization, DiskSpec, PointKind, TurbineTopology, WorldPoint};
use crate::{Error, Real, Result};

/// A turbine placed in the domain together with the polars its blade
/// elements reference (same order as the topology's polar ids).
#[derive(Debug, Clone)]
pub struct TurbineInstance {
    pub name: String,
    pub topology: TurbineTopology,
    pub polars: Vec<PolarTable>,
    pub tip_loss: TipLoss,
}

impl TurbineInstance {
    pub fn new(name: &str, topology: TurbineTopology, polars: Vec<PolarTable>) -> Result<Self> {
        let ids: Vec<&str> = polars.iter().map(|p| p.id()).collect();
        if ids != topology.polar_ids().iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Config(format!(
                "turbine '{name}': polar tables do not match the topology's polar ids"
            )));
        }
        Ok(Self { name: name.to_string(), topology, polars, tip_loss: TipLoss::None })
    }
}

#[derive(Debug, Clone)]
pub struct SolverSetup {
    pub global_dims: [usize; 3],
    pub block_dims: [usize; 3],
    pub boundary: OuterBoundary,
    pub collision: CollisionConfig,
    pub units: UnitSystem,
    pub workers: usize,
    pub curve: Curve,
    /// Extra balance weight per actuator point touching a block.
    pub turbine_weight: f64,
    pub turbines: Vec<TurbineInstance>,
    /// Uniform body force density in lattice units.
    pub body_force: [f64; 3],
}

impl SolverSetup {
    /// Single block, one worker, periodic, no turbines.
    pub fn new(global_dims: [usize; 3], collision: CollisionConfig, units: UnitSystem) -> Self {
        Self {
            global_dims,
            block_dims: global_dims,
            boundary: OuterBoundary::Periodic,
            collision,
            units,
            workers: 1,
            curve: Curve::Morton,
            turbine_weight: 0.02,
            turbines: Vec::new(),
            body_force: [0.0; 3],
        }
    }
}

/// Load on one actuator point from the most recent coupling step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    pub turbine: usize,
    pub point: WorldPoint,
    /// Sampled density (kg/m³).
    pub rho: f64,
    /// Sampled velocity (m/s).
    pub u: Vector3<f64>,
    /// Angle of attack (rad) for blade elements with inflow.
    pub alpha: Option<f64>,
    /// Force on the turbine (N); the fluid receives the opposite.
    pub force: Vector3<f64>,
}

pub struct Solver<T: Real> {
    grid: BlockGrid,
    assignment: Assignment,
    pool: WorkerPool,
    boundary: OuterBoundary,
    collision: CollisionConfig,
    units: UnitSystem,
    body_force: [f64; 3],
    turbines: Vec<TurbineInstance>,
    disks: Vec<Vec<Option<DiskSpec>>>,
    pdf: Vec<PdfField<T>>,
    scratch: Vec<PdfField<T>>,
    force: Vec<ForceField<T>>,
    macros: Vec<MacroField<T>>,
    dirty: Vec<Vec<usize>>,
    macro_ghosts_valid: bool,
    step: u64,
    timer: RunTimer,
    loads: Vec<PointLoad>,
    deposited: [f64; 3],
}

impl<T: Real> Solver<T> {
    pub fn new(setup: SolverSetup) -> Result<Self> {
        setup.collision.validate()?;
        setup.boundary.validate()?;
        let mut grid = decompose_domain(setup.global_dims, setup.block_dims, setup.boundary.periodicity())?;
        if !(setup.turbine_weight >= 0.0) {
            return Err(Error::Config("turbine weight must be non-negative".into()));
        }
        if setup.body_force.iter().any(|f| !f.is_finite()) {
            return Err(Error::Config("body force must be finite".into()));
        }
        let mut disks = Vec::new();
        for t in &setup.turbines {
            let mut specs = Vec::new();
            t.topology.root().visit(&mut |c| {
                specs.push(match &c.discretization {
                    Discretization::Disk(d) => Some(d.clone()),
                    _ => None,
                })
            });
            disks.push(specs);
        }

        // block weights from the initial point positions
        let mut touching = vec![0usize; grid.len()];
        for t in &setup.turbines {
            for p in t.topology.snapshot() {
                let x = lattice_position(&setup.units, &p.position());
                if let Ok((_, w)) = point_owner(&grid, x) {
                    for b in support_blocks(&grid, w) {
                        touching[b] += 1;
                    }
                }
            }
        }
        let weights: Vec<f64> = touching.iter().map(|&n| 1.0 + setup.turbine_weight * n as f64).collect();
        grid.set_weights(&weights);
        let assignment = balance_blocks_weighted_sfc(&grid, setup.workers, setup.curve)?;
        grid.set_owners(&assignment.owners);
        let pool = WorkerPool::new(setup.workers)?;

        let dims = grid.block_dims();
        let n = grid.len();
        let mut force: Vec<ForceField<T>> = (0..n).map(|_| ForceField::new(dims)).collect();
        if setup.body_force != [0.0; 3] {
            for f in &mut force {
                f.fill_interior_with(|_, _, _| setup.body_force);
            }
        }
        let cells = grid.total_cells() as u64;
        let mut solver = Self {
            assignment,
            pool,
            boundary: setup.boundary,
            collision: setup.collision,
            units: setup.units,
            body_force: setup.body_force,
            turbines: setup.turbines,
            disks,
            pdf: (0..n).map(|_| PdfField::new(dims)).collect(),
            scratch: (0..n).map(|_| PdfField::new(dims)).collect(),
            force,
            macros: (0..n).map(|_| MacroField::new(dims)).collect(),
            dirty: vec![Vec::new(); n],
            macro_ghosts_valid: false,
            step: 0,
            timer: RunTimer::new(cells),
            loads: Vec::new(),
            deposited: [0.0; 3],
            grid,
        };
        solver.initialize(|_| (1.0, [0.0; 3]))?;
        Ok(solver)
    }

    /// Sets every cell to the operator's equilibrium at the density and
    /// lattice velocity returned for its global coordinate.
    pub fn initialize(&mut self, state: impl Fn([usize; 3]) -> (f64, [f64; 3]) + Sync) -> Result<()> {
        let op = self.collision.operator();
        self.initialize_pdfs(|g| {
            let (rho, u) = state(g);
            equilibrium_for(op, rho, u).expect("initial state must be valid")
        })
    }

    /// Sets the populations of every cell directly.
    pub fn initialize_pdfs(&mut self, pdf: impl Fn([usize; 3]) -> [f64; Q] + Sync) -> Result<()> {
        let grid = &self.grid;
        for (b, (field, macro_field)) in self.pdf.iter_mut().zip(&mut self.macros).enumerate() {
            let origin = grid.block(b).origin;
            let mut bad = None;
            field.fill_interior_with(|x, y, z| {
                let f = pdf([origin[0] + x, origin[1] + y, origin[2] + z]);
                if f.iter().any(|v| !v.is_finite()) && bad.is_none() {
                    bad = Some([origin[0] + x, origin[1] + y, origin[2] + z]);
                }
                f
            });
            if let Some(cell) = bad {
                return Err(Error::InvalidArgument(format!("initial populations at {cell:?} are not finite")));
            }
            let [nx, ny, nz] = field.dims();
            for z in 0..nz as isize {
                for y in 0..ny as isize {
                    for x in 0..nx as isize {
                        let f = field.cell_f64(x, y, z);
                        let m = macroscopic_moments(&f, [0.0; 3], 1.0)?;
                        macro_field.set_cell_f64(x, y, z, &[m.rho, m.u[0], m.u[1], m.u[2]]);
                    }
                }
            }
        }
        self.macro_ghosts_valid = false;
        Ok(())
    }

    pub fn grid(&self) -> &BlockGrid {
        &self.grid
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn collision(&self) -> &CollisionConfig {
        &self.collision
    }

    pub fn boundary(&self) -> &OuterBoundary {
        &self.boundary
    }

    pub fn workers(&self) -> usize {
        self.pool.workers()
    }

    pub fn steps_done(&self) -> u64 {
        self.step
    }

    pub fn physical_time(&self) -> f64 {
        self.step as f64 * self.units.dt
    }

    pub fn timer(&self) -> &RunTimer {
        &self.timer
    }

    pub fn turbines(&self) -> &[TurbineInstance] {
        &self.turbines
    }

    /// Loads of the latest coupling step, in global point order.
    pub fn loads(&self) -> &[PointLoad] {
        &self.loads
    }

    /// Sum of the lattice forces spread into the fluid in the latest step.
    pub fn deposited_force(&self) -> [f64; 3] {
        self.deposited
    }

    pub fn pdf_blocks(&self) -> &[PdfField<T>] {
        &self.pdf
    }

    pub fn macro_blocks(&self) -> &[MacroField<T>] {
        &self.macros
    }

    pub fn force_blocks(&self) -> &[ForceField<T>] {
        &self.force
    }

    /// Runs `steps` steps inside the timed loop.
    pub fn run(&mut self, steps: u64) -> Result<()> {
        self.timer.start();
        let r = (0..steps).try_for_each(|_| self.step_inner());
        self.timer.stop();
        r
    }

    pub fn step(&mut self) -> Result<()> {
        self.run(1)
    }

    fn step_inner(&mut self) -> Result<()> {
        if !self.turbines.is_empty() {
            let mut timer = std::mem::replace(&mut self.timer, RunTimer::new(0));
            let r = timer.time(Phase::Turbine, || self.couple_turbines());
            self.timer = timer;
            r?;
        }
        let mut timer = std::mem::replace(&mut self.timer, RunTimer::new(0));
        let r = timer
            .time(Phase::Exchange, || self.exchange_and_boundaries())
            .and_then(|_| timer.time(Phase::CollideStream, || self.collide_stream()));
        if r.is_ok() && !self.turbines.is_empty() {
            let dt = self.units.dt;
            timer.time(Phase::Turbine, || {
                for t in &mut self.turbines {
                    t.topology.update(dt).expect("positive time step");
                }
            });
        }
        self.timer = timer;
        r?;
        self.step += 1;
        self.timer.add_step();
        Ok(())
    }

    fn exchange_and_boundaries(&mut self) -> Result<()> {
        let grid = &self.grid;
        let pdf = &mut self.pdf;
        self.pool.install(|| exchange_halos(grid, pdf))?;
        if self.boundary != OuterBoundary::Periodic {
            let spec = self.boundary;
            let op = self.collision.operator();
            self.pool.for_each_block(&self.assignment.owners, &mut self.pdf, |b, f| {
                apply_outer_boundary(grid, b, f, &spec, op)
            })?;
        }
        Ok(())
    }

    fn collide_stream(&mut self) -> Result<()> {
        let cfg = self.collision;
        let step = self.step;
        let grid = &self.grid;
        let mut items: Vec<_> = self
            .pdf
            .iter()
            .zip(self.scratch.iter_mut())
            .zip(self.force.iter())
            .zip(self.macros.iter_mut())
            .collect();
        self.pool.for_each_block(&self.assignment.owners, &mut items, |b, (((src, dst), force), m)| {
            stream_collide_block(src, dst, force, m, &cfg).map_err(|fault| {
                let o = grid.block(b).origin;
                Error::NumericalAbort {
                    step,
                    cell: [o[0] + fault.cell[0], o[1] + fault.cell[1], o[2] + fault.cell[2]],
                    reason: "non-finite density, velocity or population".into(),
                }
            })
        })?;
        std::mem::swap(&mut self.pdf, &mut self.scratch);
        self.macro_ghosts_valid = false;
        Ok(())
    }

    /// Halo exchange of the macroscopic fields; ghosts across open faces copy
    /// the adjacent interior cell.
    fn refresh_macro_ghosts(&mut self) -> Result<()> {
        if self.macro_ghosts_valid {
            return Ok(());
        }
        let grid = &self.grid;
        let macros = &mut self.macros;
        self.pool.install(|| exchange_halos(grid, macros))?;
        let periodic = grid.periodicity();
        if periodic != [true; 3] {
            for (b, m) in self.macros.iter_mut().enumerate() {
                fill_open_ghosts(m, grid, b, periodic);
            }
        }
        self.macro_ghosts_valid = true;
        Ok(())
    }

    /// Density (lattice) and velocity (lattice) at a global lattice
    /// coordinate by trilinear interpolation.
    pub fn sample_lattice(&mut self, x: [f64; 3]) -> Result<[f64; 4]> {
        self.refresh_macro_ghosts()?;
        sample_at(&self.grid, &self.macros, x).map(|(_, _, v)| v)
    }

    /// Density (kg/m³) and velocity (m/s) at a world position (m).
    pub fn sample_physical(&mut self, x_m: [f64; 3]) -> Result<(f64, [f64; 3])> {
        let x = lattice_position(&self.units, &Vector3::from(x_m));
        let v = self.sample_lattice(x)?;
        Ok((v[0] * self.units.rho_phys, self.units.velocity_to_physical([v[1], v[2], v[3]])))
    }

    fn couple_turbines(&mut self) -> Result<()> {
        self.refresh_macro_ghosts()?;
        let grid = &self.grid;
        let units = self.units;
        let macros = &self.macros;

        let points: Vec<(usize, WorldPoint)> = self
            .turbines
            .iter()
            .enumerate()
            .flat_map(|(t, inst)| inst.topology.snapshot().iter().map(move |p| (t, *p)))
            .collect();
        let samples: Vec<(usize, [f64; 3], [f64; 4])> = self.pool.install(|| {
            points
                .par_iter()
                .map(|(_, p)| sample_at(grid, macros, lattice_position(&units, &p.position())))
                .collect::<Result<Vec<_>>>()
        })?;
        if let Some(k) = samples.iter().position(|s| s.2.iter().any(|v| !v.is_finite())) {
            let (_, x, _) = samples[k];
            return Err(Error::NumericalAbort {
                step: self.step,
                cell: x.map(|v| v.floor().max(0.0) as usize),
                reason: format!("non-finite flow sampled at actuator point {k}"),
            });
        }

        let mut loads: Vec<PointLoad> = points
            .iter()
            .zip(&samples)
            .map(|((t, p), (_, _, m))| PointLoad {
                turbine: *t,
                point: *p,
                rho: m[0] * units.rho_phys,
                u: Vector3::from(units.velocity_to_physical([m[1], m[2], m[3]])),
                alpha: None,
                force: Vector3::zeros(),
            })
            .collect();

        // blade elements
        let turbines = &self.turbines;
        self.pool.install(|| {
            loads.par_iter_mut().for_each(|l| {
                if let PointKind::BladeElement { chord, length, twist, polar } = l.point.kind {
                    if let Some(s) = angle_of_attack(&l.point.transform.t, twist, &l.point.velocity, &l.u) {
                        let (cl, cd) = turbines[l.turbine].polars[polar].lookup(s.alpha);
                        l.alpha = Some(s.alpha);
                        l.force = blade_element_force(l.rho, s.u_rel, chord, length, cl, cd, &s.e_lift, &s.e_drag);
                    }
                }
            })
        });

        // disks: one momentum balance per disk component
        let mut start = 0;
        while start < loads.len() {
            let (t, comp) = (loads[start].turbine, loads[start].point.component);
            let end = start + loads[start..].iter().take_while(|l| l.turbine == t && l.point.component == comp).count();
            if let Some(spec) = &self.disks[t][comp] {
                let group = &mut loads[start..end];
                let axis: Vector3<f64> = group[0].point.transform.t.column(0).into();
                let (mut area, mut u_ax, mut rho) = (0.0, 0.0, 0.0);
                for l in group.iter() {
                    if let PointKind::DiskSample { area: a, .. } = l.point.kind {
                        area += a;
                        u_ax += a * l.u.dot(&axis);
                        rho += a * l.rho;
                    }
                }
                let u_inf = freestream_from_disk_velocity(u_ax / area, mean_thrust_coefficient(spec));
                let forces = actuator_disk_forces(spec, rho / area, u_inf, &axis)?;
                for (l, f) in group.iter_mut().zip(forces) {
                    l.force = f;
                }
            }
            start = end;
        }

        let records: Vec<ExchangeRecord> = loads
            .iter()
            .zip(&samples)
            .enumerate()
            .map(|(id, (l, (owner, x, _)))| {
                let f = units.force_to_lattice([-l.force.x, -l.force.y, -l.force.z]);
                ExchangeRecord { id: id as u32, source: *owner as u32, position: *x, force: f }
            })
            .collect();
        let per_block = mark_and_exchange_points(&records, grid)?;

        let body = self.body_force;
        let dims = grid.global_dims();
        let periodic = grid.periodicity();
        let mut items: Vec<_> = self.force.iter_mut().zip(self.dirty.iter_mut()).zip(per_block.iter()).collect();
        self.pool.for_each_block(&self.assignment.owners, &mut items, |b, ((field, dirty), recs)| {
            let data = field.data_mut();
            for &c in dirty.iter() {
                data[c * 3..c * 3 + 3].copy_from_slice(&body.map(T::from_f64));
            }
            dirty.clear();
            let origin = grid.block(b).origin;
            for r in recs.iter() {
                spread_point(field, origin, dims, periodic, r.position, r.force, dirty);
            }
            Ok(())
        })?;

        let mut total = [0.0; 3];
        for r in &records {
            for a in 0..3 {
                total[a] += r.force[a];
            }
        }
        self.deposited = total;
        self.loads = loads;
        Ok(())
    }

    /// Macroscopic state `(rho, ux, uy, uz)` of every cell, lattice units,
    /// x fastest over the global domain.
    pub fn gather_macro(&self) -> Vec<[f64; 4]> {
        self.gather(&self.macros)
    }

    /// Post-collision populations of every cell, x fastest.
    pub fn gather_pdfs(&self) -> Vec<[f64; Q]> {
        self.gather(&self.pdf)
    }

    /// Force density of every cell, x fastest.
    pub fn gather_force(&self) -> Vec<[f64; 3]> {
        self.gather(&self.force)
    }

    fn gather<const N: usize>(&self, fields: &[crate::lattice::Field<T, N>]) -> Vec<[f64; N]> {
        let [gx, gy, gz] = self.grid.global_dims();
        let mut out = vec![[0.0; N]; gx * gy * gz];
        for (b, f) in fields.iter().enumerate() {
            let o = self.grid.block(b).origin;
            let [nx, ny, nz] = f.dims();
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let g = (o[0] + x) + gx * ((o[1] + y) + gy * (o[2] + z));
                        out[g] = f.cell_f64(x as isize, y as isize, z as isize);
                    }
                }
            }
        }
        out
    }

    /// `Σ f_i` over all cells.
    pub fn total_mass(&self) -> f64 {
        self.pdf.iter().map(|f| f.interior_sum()).sum()
    }

    /// `Σ c_i f_i` over all cells (post-collision populations).
    pub fn total_momentum(&self) -> [f64; 3] {
        let mut j = [0.0; 3];
        for f in &self.pdf {
            let [nx, ny, nz] = f.dims();
            for z in 0..nz as isize {
                for y in 0..ny as isize {
                    for x in 0..nx as isize {
                        let c = f.cell(x, y, z);
                        for i in 0..Q {
                            let v = c[i].to_f64();
                            for a in 0..3 {
                                j[a] += VELOCITIES_F64[i][a] * v;
                            }
                        }
                    }
                }
            }
        }
        j
    }
}

/// Global lattice coordinate of a world position.
pub fn lattice_position(units: &UnitSystem, x: &Vector3<f64>) -> [f64; 3] {
    [0, 1, 2].map(|a| lattice_coordinate(x[a], units.dx))
}

fn sample_at<T: Real>(grid: &BlockGrid, macros: &[MacroField<T>], x: [f64; 3]) -> Result<(usize, [f64; 3], [f64; 4])> {
    let (owner, w) = point_owner(grid, x)?;
    let o = grid.block(owner).origin;
    let local = [0, 1, 2].map(|a| w[a] - o[a] as f64);
    let v = sample_trilinear(&macros[owner], local)?;
    Ok((owner, w, v))
}

/// Zero-gradient ghosts on the non-periodic outer faces of a block.
fn fill_open_ghosts<T: Real, const N: usize>(
    f: &mut crate::lattice::Field<T, N>,
    grid: &BlockGrid,
    block: usize,
    periodic: [bool; 3],
) {
    let index = grid.block(block).block_index;
    let counts = grid.block_counts();
    let n = f.dims().map(|d| d as isize);
    for a in 0..3 {
        if periodic[a] {
            continue;
        }
        let mut sides = Vec::new();
        if index[a] == 0 {
            sides.push((-1, 0));
        }
        if index[a] + 1 == counts[a] {
            sides.push((n[a], n[a] - 1));
        }
        let (b1, b2) = ((a + 1) % 3, (a + 2) % 3);
        for (ghost, inner) in sides {
            for j in -1..=n[b1] {
                for k in -1..=n[b2] {
                    let mut g = [0isize; 3];
                    g[a] = ghost;
                    g[b1] = j;
                    g[b2] = k;
                    let mut s = g;
                    s[a] = inner;
                    let v = f.cell_f64(s[0], s[1], s[2]);
                    f.set_cell_f64(g[0], g[1], g[2], &v);
                }
            }
        }
    }
}

/// Bytes held by the lattice fields of a run: two population arrays, force
/// and macroscopic fields per block, ghost layers included.
pub fn memory_estimate(global_dims: [usize; 3], block_dims: [usize; 3], precision_bytes: usize) -> u64 {
    let blocks: u64 = (0..3).map(|a| (global_dims[a] / block_dims[a].max(1)) as u64).product();
    let padded: u64 = block_dims.iter().map(|&n| n as u64 + 2).product();
    blocks * padded * (2 * Q as u64 + 3 + 4) * precision_bytes as u64
}
