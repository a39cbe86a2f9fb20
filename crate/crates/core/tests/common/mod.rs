#![allow(dead_code)]

use lbwind::actuator::PolarTable;
use lbwind::lattice::{lattice_units_with_tau, CollisionConfig, CollisionOperator, UnitSystem};
use lbwind::solver::{Solver, SolverSetup, TurbineInstance};
use lbwind::turbine::build_topology;
use lbwind::turbine::examples::{hawt, RotorParams};

pub const WIND: f64 = 10.0;

pub fn polar() -> PolarTable {
    PolarTable::from_degrees("p", &[[-20.0, -1.6, 0.08], [0.0, 0.1, 0.01], [12.0, 1.3, 0.02], [20.0, 1.1, 0.1]])
        .unwrap()
}

/// Units for a domain that is `n` cells and 2 m wide (rotor diameter 1 m).
pub fn units(n: usize, tau: f64) -> UnitSystem {
    lattice_units_with_tau(1.0, n / 2, WIND, 0.05, tau).unwrap()
}

/// Three-bladed rotor of diameter 1 m centred at `hub` (m).
pub fn rotor(hub: [f64; 3], omega: f64, n_points: usize) -> TurbineInstance {
    let p = RotorParams {
        base: hub,
        tower_height: 0.0,
        radius: 0.5,
        hub_radius: 0.05,
        n_points,
        chord: 0.06,
        twist: 0.3,
        omega,
        ..Default::default()
    };
    let topo = build_topology(hawt(&p).unwrap(), &["p".to_string()]).unwrap();
    TurbineInstance::new("rotor", topo, vec![polar()]).unwrap()
}

/// `n³` periodic box, uniform wind along x, optionally with a spinning
/// rotor in the centre.
pub fn rotor_case(n: usize, block: usize, workers: usize, op: CollisionOperator, turbine: bool) -> Solver<f64> {
    let u = units(n, 0.6);
    let cfg = CollisionConfig::new(op, u.omega()).unwrap();
    let mut setup = SolverSetup::new([n; 3], cfg, u);
    setup.block_dims = [block; 3];
    setup.workers = workers;
    if turbine {
        setup.turbines.push(rotor([1.0, 1.0, 1.0], 60.0, 12));
    }
    let mut s = Solver::new(setup).unwrap();
    let u_lat = u.u_lat;
    s.initialize(|g| (1.0, [u_lat * (1.0 + 0.05 * (g[1] as f64 * 0.3).sin()), 0.0, 0.0])).unwrap();
    s
}

pub fn max_abs_difference(a: &[[f64; 4]], b: &[[f64; 4]]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
}

use lbwind::turbine::{orthonormality_error, TurbineTopology};

/// Largest change of any pairwise point distance over `steps` updates.
pub fn rigid_distance_drift(topo: &mut TurbineTopology, steps: usize, dt: f64) -> f64 {
    let pos = |t: &TurbineTopology| t.snapshot().iter().map(|p| p.position()).collect::<Vec<_>>();
    let p0 = pos(topo);
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        topo.update(dt).unwrap();
        let p = pos(topo);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let d0 = (p0[i] - p0[j]).norm();
                let d = (p[i] - p[j]).norm();
                worst = worst.max((d - d0).abs());
            }
        }
    }
    worst
}

/// Largest `|TᵀT − I|` over every point frame during `steps` updates.
pub fn orthonormality_drift(topo: &mut TurbineTopology, steps: usize, dt: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        topo.update(dt).unwrap();
        for p in topo.snapshot() {
            worst = worst.max(orthonormality_error(&p.transform.t));
        }
    }
    worst
}

use lbwind::domain::OuterBoundary;
use std::f64::consts::TAU;

/// Two-dimensional Taylor-Green vortex in an `n³` periodic box with peak
/// lattice velocity `u0`, uniform along z.
pub fn taylor_green(n: usize, block: usize, op: CollisionOperator, tau: f64, u0: f64) -> Solver<f64> {
    let units = lattice_units_with_tau(1.0, n, u0, u0 * 3f64.sqrt(), tau).unwrap();
    let cfg = CollisionConfig::new(op, 1.0 / tau).unwrap();
    let mut setup = SolverSetup::new([n; 3], cfg, units);
    setup.block_dims = [block; 3];
    let mut s = Solver::new(setup).unwrap();
    let k = TAU / n as f64;
    s.initialize(|g| {
        let (x, y) = (g[0] as f64 * k, g[1] as f64 * k);
        let rho = 1.0 - 0.75 * u0 * u0 * ((2.0 * x).cos() + (2.0 * y).cos());
        (rho, [u0 * x.sin() * y.cos(), -u0 * x.cos() * y.sin(), 0.0])
    })
    .unwrap();
    s
}

/// `Σ |u|²/2` over the lattice.
pub fn kinetic_energy(s: &Solver<f64>) -> f64 {
    s.gather_macro().iter().map(|m| 0.5 * (m[1] * m[1] + m[2] * m[2] + m[3] * m[3])).sum()
}

/// Body-force driven channel with `n` cells between the walls; returns the
/// relative L2 error of the steady streamwise profile against the parabola.
pub fn poiseuille_error(n: usize, op: CollisionOperator, tau: f64, u_max: f64) -> f64 {
    let nu = (tau - 0.5) / 3.0;
    let h = n as f64;
    let force = 8.0 * nu * u_max / (h * h);
    let units = lattice_units_with_tau(1.0, n, 1.0, 0.05, tau).unwrap();
    let mut setup = SolverSetup::new([2, n, 2], CollisionConfig::new(op, 1.0 / tau).unwrap(), units);
    setup.boundary = OuterBoundary::ChannelWalls;
    setup.body_force = [force, 0.0, 0.0];
    let mut s = Solver::<f64>::new(setup).unwrap();
    // run to steady state: several viscous times across the channel
    let steps = (8.0 * h * h / nu) as u64;
    s.run(steps).unwrap();
    let m = s.gather_macro();
    let (mut err, mut norm) = (0.0, 0.0);
    for y in 0..n {
        let yy = y as f64 + 0.5;
        let exact = force / (2.0 * nu) * yy * (h - yy);
        let u = m[2 * y][1];
        err += (u - exact).powi(2);
        norm += exact * exact;
    }
    (err / norm).sqrt()
}
