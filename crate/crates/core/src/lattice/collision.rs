use serde::{Deserialize, Serialize};

use super::cumulant;
use super::equilibrium::polynomial;
use super::stencil::{CS2, Q, VELOCITIES_F64, WEIGHTS};
use crate::{Error, Result};

/// Number of relaxation rates above second order in the cumulant operator
/// (third-order combinations, fourth-order combinations, fifth, sixth).
pub const HIGHER_ORDER_RATE_COUNT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionOperator {
    Bgk,
    Cumulant,
}

/// Collision operator and its relaxation rates.
///
/// `omega` relaxes the second-order moments (shear and bulk) and sets the
/// `(1 - omega/2)` prefactor of the Guo source in both operators. The
/// cumulant operator additionally uses `higher_order_rates`:
///
/// | index | cumulants |
/// |-------|-----------|
/// | 0 | `C120+C102`, `C210+C012`, `C201+C021` |
/// | 1 | `C120-C102`, `C210-C012`, `C201-C021` |
/// | 2 | `C111` |
/// | 3 | `C220-2C202+C022`, `C220+C202-2C022` |
/// | 4 | `C220+C202+C022` |
/// | 5 | `C211`, `C121`, `C112` |
/// | 6 | `C221`, `C212`, `C122` |
/// | 7 | `C222` |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionConfig {
    operator: CollisionOperator,
    omega: f64,
    higher_order_rates: [f64; HIGHER_ORDER_RATE_COUNT],
}

impl CollisionConfig {
    pub fn new(operator: CollisionOperator, omega: f64) -> Result<Self> {
        let cfg = Self {
            operator,
            omega,
            higher_order_rates: [1.0; HIGHER_ORDER_RATE_COUNT],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bgk(omega: f64) -> Result<Self> {
        Self::new(CollisionOperator::Bgk, omega)
    }

    pub fn cumulant(omega: f64) -> Result<Self> {
        Self::new(CollisionOperator::Cumulant, omega)
    }

    /// Accepts either a single rate (applied to all higher orders) or one
    /// rate per entry of the table in the type docs. An empty slice keeps the
    /// default of 1.
    pub fn with_higher_order_rates(mut self, rates: &[f64]) -> Result<Self> {
        match rates.len() {
            0 => {}
            1 => self.higher_order_rates = [rates[0]; HIGHER_ORDER_RATE_COUNT],
            HIGHER_ORDER_RATE_COUNT => self.higher_order_rates.copy_from_slice(rates),
            n => {
                return Err(Error::Config(format!(
                    "higher_order_rates: expected 1 or {HIGHER_ORDER_RATE_COUNT} values, got {n}"
                )))
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::Config(format!(
                "relaxation rate omega must lie in (0, 2), got {}",
                self.omega
            )));
        }
        if let Some(r) = self
            .higher_order_rates
            .iter()
            .find(|r| !(**r > 0.0 && **r < 2.0))
        {
            return Err(Error::Config(format!(
                "higher-order relaxation rates must lie in (0, 2), got {r}"
            )));
        }
        Ok(())
    }

    pub fn operator(&self) -> CollisionOperator {
        self.operator
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn higher_order_rates(&self) -> &[f64; HIGHER_ORDER_RATE_COUNT] {
        &self.higher_order_rates
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroState {
    pub rho: f64,
    pub u: [f64; 3],
}

/// Density and force-shifted velocity `u = (sum c_i f_i + F dt / 2) / rho`.
pub fn macroscopic_moments(f: &[f64; Q], force: [f64; 3], dt: f64) -> Result<MacroState> {
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite populations".into()));
    }
    let (rho, u) = moments(f, force, dt);
    if !(rho > 0.0) {
        return Err(Error::Degenerate(format!("density {rho} is not positive")));
    }
    Ok(MacroState { rho, u })
}

#[inline(always)]
pub(crate) fn moments(f: &[f64; Q], force: [f64; 3], dt: f64) -> (f64, [f64; 3]) {
    let mut rho = 0.0;
    let mut j = [0.0; 3];
    for i in 0..Q {
        rho += f[i];
        let c = VELOCITIES_F64[i];
        j[0] += c[0] * f[i];
        j[1] += c[1] * f[i];
        j[2] += c[2] * f[i];
    }
    let inv = 1.0 / rho;
    let u = [
        (j[0] + 0.5 * dt * force[0]) * inv,
        (j[1] + 0.5 * dt * force[1]) * inv,
        (j[2] + 0.5 * dt * force[2]) * inv,
    ];
    (rho, u)
}

/// Guo source term
/// `S_i = (1 - omega/2) w_i [(c_i - u)/cs2 + (c_i.u) c_i / cs2^2] . F dt`.
pub fn guo_source(u: [f64; 3], force: [f64; 3], omega: f64, dt: f64) -> [f64; Q] {
    let mut s = [0.0; Q];
    if force == [0.0; 3] {
        return s;
    }
    add_guo_source(&mut s, u, force, omega, dt);
    s
}

#[inline(always)]
fn add_guo_source(f: &mut [f64; Q], u: [f64; 3], force: [f64; 3], omega: f64, dt: f64) {
    let pref = (1.0 - 0.5 * omega) * dt;
    let uf = u[0] * force[0] + u[1] * force[1] + u[2] * force[2];
    for i in 0..Q {
        let c = VELOCITIES_F64[i];
        let cf = c[0] * force[0] + c[1] * force[1] + c[2] * force[2];
        let cu = c[0] * u[0] + c[1] * u[1] + c[2] * u[2];
        f[i] += pref * WEIGHTS[i] * ((cf - uf) / CS2 + cu * cf / (CS2 * CS2));
    }
}

/// One collision including the Guo source. Returns the post-collision
/// populations.
pub fn collide(f: &[f64; Q], force: [f64; 3], cfg: &CollisionConfig, dt: f64) -> Result<[f64; Q]> {
    cfg.validate()?;
    if f.iter().any(|v| !v.is_finite()) || force.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite collision input".into()));
    }
    let (out, _) = collide_unchecked(f, force, cfg, dt);
    Ok(out)
}

/// Collision without input validation; also returns the pre-collision
/// macroscopic state (density and force-shifted velocity).
#[inline(always)]
pub fn collide_unchecked(
    f: &[f64; Q],
    force: [f64; 3],
    cfg: &CollisionConfig,
    dt: f64,
) -> ([f64; Q], MacroState) {
    let (rho, u) = moments(f, force, dt);
    let omega = cfg.omega;
    let mut out = match cfg.operator {
        CollisionOperator::Bgk => {
            let feq = polynomial(rho, u);
            let mut out = [0.0; Q];
            for i in 0..Q {
                out[i] = f[i] + omega * (feq[i] - f[i]);
            }
            out
        }
        CollisionOperator::Cumulant => {
            cumulant::relax(f, rho, u, omega, &cfg.higher_order_rates)
        }
    };
    if force != [0.0; 3] {
        add_guo_source(&mut out, u, force, omega, dt);
    }
    (out, MacroState { rho, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::equilibrium::{equilibrium_pdf, equilibrium_product};
    use rand::{Rng, SeedableRng};

    fn random_pdf(rng: &mut impl Rng) -> [f64; Q] {
        let rho = rng.random_range(0.8..1.2);
        let u = [
            rng.random_range(-0.08..0.08),
            rng.random_range(-0.08..0.08),
            rng.random_range(-0.08..0.08),
        ];
        let mut f = equilibrium_pdf(rho, u).unwrap();
        for v in f.iter_mut() {
            *v *= 1.0 + rng.random_range(-0.1..0.1);
        }
        f
    }

    fn mass_momentum(f: &[f64; Q]) -> (f64, [f64; 3]) {
        let mut rho = 0.0;
        let mut j = [0.0; 3];
        for i in 0..Q {
            rho += f[i];
            for a in 0..3 {
                j[a] += VELOCITIES_F64[i][a] * f[i];
            }
        }
        (rho, j)
    }

    #[test]
    fn moments_of_rest_state() {
        let m = macroscopic_moments(&WEIGHTS, [0.0; 3], 1.0).unwrap();
        assert!((m.rho - 1.0).abs() < 1e-15);
        assert_eq!(m.u, [0.0; 3]);
    }

    #[test]
    fn half_force_velocity_shift() {
        let m = macroscopic_moments(&WEIGHTS, [0.002, 0.0, 0.0], 1.0).unwrap();
        assert!((m.u[0] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_round_trip() {
        let f = equilibrium_pdf(1.0, [0.03, 0.0, 0.0]).unwrap();
        let m = macroscopic_moments(&f, [0.0; 3], 1.0).unwrap();
        assert!((m.u[0] - 0.03).abs() < 1e-14);
    }

    #[test]
    fn degenerate_density_is_rejected() {
        let f = [0.0; Q];
        assert!(matches!(
            macroscopic_moments(&f, [0.0; 3], 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn omega_bounds() {
        assert!(CollisionConfig::bgk(0.0).is_err());
        assert!(CollisionConfig::bgk(2.0).is_err());
        assert!(CollisionConfig::cumulant(1.9).is_ok());
        assert!(CollisionConfig::cumulant(1.0)
            .unwrap()
            .with_higher_order_rates(&[1.0, 1.0])
            .is_err());
        assert!(CollisionConfig::cumulant(1.0)
            .unwrap()
            .with_higher_order_rates(&[2.5])
            .is_err());
    }

    #[test]
    fn bgk_equilibrium_is_a_fixed_point() {
        let feq = equilibrium_pdf(1.0, [0.0; 3]).unwrap();
        for omega in [0.3, 1.0, 1.7] {
            let out = collide(&feq, [0.0; 3], &CollisionConfig::bgk(omega).unwrap(), 1.0).unwrap();
            for i in 0..Q {
                assert!((out[i] - feq[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn equilibria_are_fixed_points_of_their_operator() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let rho = rng.random_range(0.9..1.1);
            let mut u = [0.0; 3];
            loop {
                for c in u.iter_mut() {
                    *c = rng.random_range(-0.1..0.1);
                }
                if u.iter().map(|c| c * c).sum::<f64>() <= 0.01 {
                    break;
                }
            }
            let omega = rng.random_range(0.2..1.95);
            let cases = [
                (CollisionConfig::bgk(omega).unwrap(), equilibrium_pdf(rho, u).unwrap()),
                (
                    CollisionConfig::cumulant(omega)
                        .unwrap()
                        .with_higher_order_rates(&[rng.random_range(0.5..1.5)])
                        .unwrap(),
                    equilibrium_product(rho, u).unwrap(),
                ),
            ];
            for (cfg, feq) in cases {
                let out = collide(&feq, [0.0; 3], &cfg, 1.0).unwrap();
                for i in 0..Q {
                    assert!((out[i] - feq[i]).abs() < 1e-12, "{cfg:?}");
                }
            }
        }
    }

    #[test]
    fn bgk_with_unit_rate_is_equilibrium_plus_source() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let f = random_pdf(&mut rng);
        let force = [1e-4, -2e-4, 3e-5];
        let cfg = CollisionConfig::bgk(1.0).unwrap();
        let out = collide(&f, force, &cfg, 1.0).unwrap();
        let m = macroscopic_moments(&f, force, 1.0).unwrap();
        let feq = equilibrium_pdf(m.rho, m.u).unwrap();
        let s = guo_source(m.u, force, 1.0, 1.0);
        for i in 0..Q {
            assert!((out[i] - (feq[i] + s[i])).abs() < 1e-16);
        }
    }

    #[test]
    fn mass_and_momentum_contracts_hold_for_both_operators() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..500 {
            let f = random_pdf(&mut rng);
            let force = [
                rng.random_range(-1e-3..1e-3),
                rng.random_range(-1e-3..1e-3),
                rng.random_range(-1e-3..1e-3),
            ];
            let omega = rng.random_range(0.1..1.99);
            let (rho0, j0) = mass_momentum(&f);
            for op in [CollisionOperator::Bgk, CollisionOperator::Cumulant] {
                let cfg = CollisionConfig::new(op, omega)
                    .unwrap()
                    .with_higher_order_rates(&[rng.random_range(0.1..1.9)])
                    .unwrap();
                let out = collide(&f, force, &cfg, 1.0).unwrap();
                let (rho1, j1) = mass_momentum(&out);
                assert!(((rho1 - rho0) / rho0).abs() < 1e-12);
                for a in 0..3 {
                    assert!((j1[a] - j0[a] - force[a]).abs() < 1e-12, "{op:?}");
                }
            }
        }
    }

    #[test]
    fn guo_source_moments() {
        let u = [0.02, -0.01, 0.03];
        let force = [1e-3, 2e-3, -5e-4];
        let omega = 1.4;
        let s = guo_source(u, force, omega, 1.0);
        let (m0, m1) = mass_momentum(&s);
        assert!(m0.abs() < 1e-17);
        for a in 0..3 {
            assert!((m1[a] - (1.0 - omega / 2.0) * force[a]).abs() < 1e-17);
        }
    }
}
