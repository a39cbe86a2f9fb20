use super::collision::CollisionOperator;
use super::stencil::{Q, VELOCITIES, VELOCITIES_F64, WEIGHTS};
use crate::{Error, Result};

fn check_state(rho: f64, u: [f64; 3]) -> Result<()> {
    if !rho.is_finite() || u.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite equilibrium input rho={rho}, u={u:?}"
        )));
    }
    if rho <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "equilibrium density must be positive, got {rho}"
        )));
    }
    Ok(())
}

/// Second-order polynomial equilibrium
/// `w_i rho [1 + 3 c.u + 9/2 (c.u)^2 - 3/2 u^2]`.
pub fn equilibrium_pdf(rho: f64, u: [f64; 3]) -> Result<[f64; Q]> {
    check_state(rho, u)?;
    Ok(polynomial(rho, u))
}

/// Product-form equilibrium whose central moments factorise per axis. All of
/// its cumulants above second order vanish, which makes it the fixed point of
/// the cumulant collision.
pub fn equilibrium_product(rho: f64, u: [f64; 3]) -> Result<[f64; Q]> {
    check_state(rho, u)?;
    Ok(product(rho, u))
}

/// Equilibrium that is a fixed point of `op`.
pub fn equilibrium_for(op: CollisionOperator, rho: f64, u: [f64; 3]) -> Result<[f64; Q]> {
    match op {
        CollisionOperator::Bgk => equilibrium_pdf(rho, u),
        CollisionOperator::Cumulant => equilibrium_product(rho, u),
    }
}

#[inline(always)]
pub(crate) fn polynomial(rho: f64, u: [f64; 3]) -> [f64; Q] {
    let usq = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let base = 1.0 - 1.5 * usq;
    let mut f = [0.0; Q];
    for i in 0..Q {
        let c = VELOCITIES_F64[i];
        let cu = c[0] * u[0] + c[1] * u[1] + c[2] * u[2];
        f[i] = WEIGHTS[i] * rho * (base + 3.0 * cu + 4.5 * cu * cu);
    }
    f
}

#[inline(always)]
pub(crate) fn product(rho: f64, u: [f64; 3]) -> [f64; Q] {
    // per-axis factors for c = -1, 0, +1
    let factor = |v: f64| {
        let sq = v * v;
        [
            0.5 * (1.0 / 3.0 + sq - v),
            2.0 / 3.0 - sq,
            0.5 * (1.0 / 3.0 + sq + v),
        ]
    };
    let (fx, fy, fz) = (factor(u[0]), factor(u[1]), factor(u[2]));
    let mut f = [0.0; Q];
    for i in 0..Q {
        let c = VELOCITIES[i];
        f[i] = rho
            * fx[(c[0] + 1) as usize]
            * fy[(c[1] + 1) as usize]
            * fz[(c[2] + 1) as usize];
    }
    f
}
