mod common;

use common::{kinetic_energy, poiseuille_error, taylor_green};
use lbwind::lattice::CollisionOperator;

#[test]
fn operators_agree_on_a_taylor_green_vortex() {
    let mut bgk = taylor_green(32, 16, CollisionOperator::Bgk, 0.8, 0.05 / 3f64.sqrt());
    let mut cum = taylor_green(32, 16, CollisionOperator::Cumulant, 0.8, 0.05 / 3f64.sqrt());
    bgk.run(100).unwrap();
    cum.run(100).unwrap();
    let a = bgk.gather_macro();
    let b = cum.gather_macro();
    let (mut diff, mut norm) = (0.0, 0.0);
    for (p, q) in a.iter().zip(&b) {
        for c in 1..4 {
            diff += (p[c] - q[c]).powi(2);
            norm += p[c] * p[c];
        }
    }
    let rel = (diff / norm).sqrt();
    assert!(rel < 0.01, "relative L2 difference {rel}");
}

#[test]
fn taylor_green_energy_decays_at_the_viscous_rate() {
    let n = 32;
    let tau = 0.8;
    let mut s = taylor_green(n, 32, CollisionOperator::Cumulant, tau, 0.01);
    let nu = (tau - 0.5) / 3.0;
    let k2 = 2.0 * (std::f64::consts::TAU / n as f64).powi(2);
    s.run(10).unwrap();
    let e0 = kinetic_energy(&s);
    s.run(100).unwrap();
    let rate = (e0 / kinetic_energy(&s)).ln() / 100.0;
    let expected = 2.0 * nu * k2;
    assert!((rate / expected - 1.0).abs() < 0.03, "{rate} vs {expected}");
}

#[test]
fn channel_flow_is_parabolic() {
    for op in [CollisionOperator::Bgk, CollisionOperator::Cumulant] {
        let e = poiseuille_error(16, op, 0.8, 0.02);
        assert!(e < 0.01, "{op:?}: {e}");
    }
}
