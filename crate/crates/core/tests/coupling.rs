mod common;

use std::collections::HashSet;

use common::{max_abs_difference, rotor_case};
use lbwind::actuator::roma_support;
use lbwind::lattice::{CollisionOperator, Q};
use lbwind::solver::lattice_position;

#[test]
fn momentum_change_equals_deposited_force() {
    let mut s = rotor_case(32, 16, 2, CollisionOperator::Cumulant, true);
    for _ in 0..6 {
        let before = s.total_momentum();
        s.step().unwrap();
        let after = s.total_momentum();
        let dep = s.deposited_force();
        for a in 0..3 {
            assert!((after[a] - before[a] - dep[a]).abs() < 1e-8, "axis {a}: {} vs {}", after[a] - before[a], dep[a]);
        }
        // reaction of the blade loads, converted to lattice units
        let mut loads = [0.0; 3];
        for l in s.loads() {
            let f = s.units().force_to_lattice(l.force.into());
            for a in 0..3 {
                loads[a] -= f[a];
            }
        }
        for a in 0..3 {
            assert!((loads[a] - dep[a]).abs() <= 1e-12 * (1.0 + loads[a].abs()));
        }
    }
    assert!(s.deposited_force()[0] < 0.0, "rotor thrust must slow the flow");
}

#[test]
fn mass_is_conserved_with_a_turbine() {
    let mut s = rotor_case(32, 32, 1, CollisionOperator::Bgk, true);
    let m0 = s.total_mass();
    s.run(10).unwrap();
    assert!((s.total_mass() - m0).abs() < 1e-9 * m0);
}

#[test]
fn forces_only_touch_the_support_of_their_points() {
    for op in [CollisionOperator::Bgk, CollisionOperator::Cumulant] {
        let mut with = rotor_case(32, 16, 1, op, true);
        let mut without = rotor_case(32, 16, 1, op, false);
        with.step().unwrap();
        without.step().unwrap();
        let n = 32i64;
        let mut support = HashSet::new();
        for l in with.loads() {
            let x = lattice_position(with.units(), &l.point.position());
            let s: [(i64, [f64; 3]); 3] = std::array::from_fn(|a| roma_support(x[a]));
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let c = [s[0].0 + i, s[1].0 + j, s[2].0 + k].map(|v| v.rem_euclid(n) as usize);
                        support.insert(c[0] + 32 * (c[1] + 32 * c[2]));
                    }
                }
            }
        }
        let forces = with.gather_force();
        let a = with.gather_pdfs();
        let b = without.gather_pdfs();
        let mut changed = 0;
        for g in 0..a.len() {
            let differs = (0..Q).any(|i| a[g][i] != b[g][i]);
            let forced = forces[g] != [0.0; 3];
            if differs || forced {
                assert!(support.contains(&g), "cell {g} changed outside every point support");
                changed += 1;
            }
        }
        assert!(changed > 0);
    }
}

#[test]
fn coupled_run_is_independent_of_the_decomposition() {
    let mut reference = rotor_case(32, 32, 1, CollisionOperator::Cumulant, true);
    reference.run(25).unwrap();
    let m = reference.gather_macro();
    let f = reference.gather_pdfs();
    for (block, workers) in [(16, 2), (16, 3), (8, 4)] {
        let mut s = rotor_case(32, block, workers, CollisionOperator::Cumulant, true);
        s.run(25).unwrap();
        assert_eq!(max_abs_difference(&m, &s.gather_macro()), 0.0, "{block} cells per block, {workers} workers");
        assert!(f == s.gather_pdfs());
    }
}

#[test]
fn rest_state_is_stationary() {
    for op in [CollisionOperator::Bgk, CollisionOperator::Cumulant] {
        let mut s = rotor_case(16, 8, 2, op, false);
        s.initialize(|_| (1.0, [0.0; 3])).unwrap();
        let before = s.gather_pdfs();
        s.run(50).unwrap();
        let after = s.gather_pdfs();
        let d = before
            .iter()
            .zip(&after)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        assert!(d < 1e-12, "{op:?}: {d}");
    }
}
