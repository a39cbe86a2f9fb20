//! Cumulant collision on the D3Q27 lattice.
//!
//! Populations are arranged on a 3x3x3 cube indexed by `c + 1` and mapped to
//! central moments with the chimera transform (one axis at a time). Cumulants
//! up to sixth order follow from the central moments; only the 27 moments with
//! every index in `{0, 1, 2}` exist on this stencil.

use super::stencil::{Q, VELOCITIES};
use super::collision::HIGHER_ORDER_RATE_COUNT;

/// `m[a][b][c]`; for populations `a, b, c` are `cx+1, cy+1, cz+1`, for moments
/// they are the orders in x, y, z.
pub type Cube = [[[f64; 3]; 3]; 3];

#[inline(always)]
fn forward(m: [f64; 3], u: f64) -> [f64; 3] {
    let sum = m[0] + m[2];
    let diff = m[2] - m[0];
    let k0 = sum + m[1];
    let k1 = diff - u * k0;
    let k2 = sum - 2.0 * u * diff + u * u * k0;
    [k0, k1, k2]
}

#[inline(always)]
fn backward(k: [f64; 3], u: f64) -> [f64; 3] {
    let uu = u * u;
    let minus = 0.5 * (k[0] * (uu - u) + k[1] * (2.0 * u - 1.0) + k[2]);
    let rest = k[0] * (1.0 - uu) - 2.0 * u * k[1] - k[2];
    let plus = 0.5 * (k[0] * (uu + u) + k[1] * (2.0 * u + 1.0) + k[2]);
    [minus, rest, plus]
}

#[inline(always)]
fn to_cube(f: &[f64; Q]) -> Cube {
    let mut m = [[[0.0; 3]; 3]; 3];
    for i in 0..Q {
        let c = VELOCITIES[i];
        m[(c[0] + 1) as usize][(c[1] + 1) as usize][(c[2] + 1) as usize] = f[i];
    }
    m
}

#[inline(always)]
fn from_cube(m: &Cube) -> [f64; Q] {
    let mut f = [0.0; Q];
    for i in 0..Q {
        let c = VELOCITIES[i];
        f[i] = m[(c[0] + 1) as usize][(c[1] + 1) as usize][(c[2] + 1) as usize];
    }
    f
}

#[inline(always)]
fn forward_cube(m: &mut Cube, u: [f64; 3]) {
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = forward(m[a][b], u[2]);
        }
    }
    for a in 0..3 {
        for g in 0..3 {
            let k = forward([m[a][0][g], m[a][1][g], m[a][2][g]], u[1]);
            m[a][0][g] = k[0];
            m[a][1][g] = k[1];
            m[a][2][g] = k[2];
        }
    }
    for b in 0..3 {
        for g in 0..3 {
            let k = forward([m[0][b][g], m[1][b][g], m[2][b][g]], u[0]);
            m[0][b][g] = k[0];
            m[1][b][g] = k[1];
            m[2][b][g] = k[2];
        }
    }
}

#[inline(always)]
fn backward_cube(m: &mut Cube, u: [f64; 3]) {
    for b in 0..3 {
        for g in 0..3 {
            let f = backward([m[0][b][g], m[1][b][g], m[2][b][g]], u[0]);
            m[0][b][g] = f[0];
            m[1][b][g] = f[1];
            m[2][b][g] = f[2];
        }
    }
    for a in 0..3 {
        for g in 0..3 {
            let f = backward([m[a][0][g], m[a][1][g], m[a][2][g]], u[1]);
            m[a][0][g] = f[0];
            m[a][1][g] = f[1];
            m[a][2][g] = f[2];
        }
    }
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = backward(m[a][b], u[2]);
        }
    }
}

/// Central moments `k[a][b][c] = sum_i (cx-ux)^a (cy-uy)^b (cz-uz)^c f_i`
/// (density-weighted, not normalised).
pub fn central_moments(f: &[f64; Q], u: [f64; 3]) -> Cube {
    let mut m = to_cube(f);
    forward_cube(&mut m, u);
    m
}

/// Density-weighted cumulants from central moments. Orders up to three equal
/// the central moments; orders four to six carry the product corrections of
/// the zero-mean moment/cumulant relation.
pub fn cumulants_from_central(k: &Cube, rho: f64) -> Cube {
    let mut c = *k;
    let inv = 1.0 / rho;
    let k2 = |a: usize, b: usize, g: usize| k[a][b][g];
    c[2][1][1] = k2(2, 1, 1) - (k2(2, 0, 0) * k2(0, 1, 1) + 2.0 * k2(1, 1, 0) * k2(1, 0, 1)) * inv;
    c[1][2][1] = k2(1, 2, 1) - (k2(0, 2, 0) * k2(1, 0, 1) + 2.0 * k2(1, 1, 0) * k2(0, 1, 1)) * inv;
    c[1][1][2] = k2(1, 1, 2) - (k2(0, 0, 2) * k2(1, 1, 0) + 2.0 * k2(1, 0, 1) * k2(0, 1, 1)) * inv;
    c[2][2][0] = k2(2, 2, 0) - (k2(2, 0, 0) * k2(0, 2, 0) + 2.0 * k2(1, 1, 0).powi(2)) * inv;
    c[2][0][2] = k2(2, 0, 2) - (k2(2, 0, 0) * k2(0, 0, 2) + 2.0 * k2(1, 0, 1).powi(2)) * inv;
    c[0][2][2] = k2(0, 2, 2) - (k2(0, 2, 0) * k2(0, 0, 2) + 2.0 * k2(0, 1, 1).powi(2)) * inv;

    c[1][2][2] = k[1][2][2] - fifth_correction_122(k) * inv;
    c[2][1][2] = k[2][1][2] - fifth_correction_212(k) * inv;
    c[2][2][1] = k[2][2][1] - fifth_correction_221(k) * inv;

    let (a, b) = sixth_corrections(k);
    c[2][2][2] = k[2][2][2] - a * inv + b * inv * inv;
    c
}

#[inline(always)]
fn fifth_correction_122(k: &Cube) -> f64 {
    k[0][0][2] * k[1][2][0]
        + k[0][2][0] * k[1][0][2]
        + 4.0 * k[0][1][1] * k[1][1][1]
        + 2.0 * (k[1][0][1] * k[0][2][1] + k[1][1][0] * k[0][1][2])
}

#[inline(always)]
fn fifth_correction_212(k: &Cube) -> f64 {
    k[0][0][2] * k[2][1][0]
        + k[2][0][0] * k[0][1][2]
        + 4.0 * k[1][0][1] * k[1][1][1]
        + 2.0 * (k[0][1][1] * k[2][0][1] + k[1][1][0] * k[1][0][2])
}

#[inline(always)]
fn fifth_correction_221(k: &Cube) -> f64 {
    k[0][2][0] * k[2][0][1]
        + k[2][0][0] * k[0][2][1]
        + 4.0 * k[1][1][0] * k[1][1][1]
        + 2.0 * (k[0][1][1] * k[2][1][0] + k[1][0][1] * k[1][2][0])
}

/// `(A, B)` in `C222 = k222 - A/rho + B/rho^2`.
#[inline(always)]
fn sixth_corrections(k: &Cube) -> (f64, f64) {
    let a = 4.0 * k[1][1][1].powi(2)
        + k[2][0][0] * k[0][2][2]
        + k[0][2][0] * k[2][0][2]
        + k[0][0][2] * k[2][2][0]
        + 4.0 * (k[0][1][1] * k[2][1][1] + k[1][0][1] * k[1][2][1] + k[1][1][0] * k[1][1][2])
        + 2.0 * (k[1][2][0] * k[1][0][2] + k[2][1][0] * k[0][1][2] + k[2][0][1] * k[0][2][1]);
    let b = 16.0 * k[1][1][0] * k[1][0][1] * k[0][1][1]
        + 4.0
            * (k[1][0][1].powi(2) * k[0][2][0]
                + k[0][1][1].powi(2) * k[2][0][0]
                + k[1][1][0].powi(2) * k[0][0][2])
        + 2.0 * k[2][0][0] * k[0][2][0] * k[0][0][2];
    (a, b)
}

/// Inverse of [`cumulants_from_central`], evaluated order by order so the
/// corrections use already-reconstructed lower moments.
fn central_from_cumulants(c: &Cube, rho: f64) -> Cube {
    let mut k = *c;
    let inv = 1.0 / rho;
    k[2][1][1] = c[2][1][1] + (k[2][0][0] * k[0][1][1] + 2.0 * k[1][1][0] * k[1][0][1]) * inv;
    k[1][2][1] = c[1][2][1] + (k[0][2][0] * k[1][0][1] + 2.0 * k[1][1][0] * k[0][1][1]) * inv;
    k[1][1][2] = c[1][1][2] + (k[0][0][2] * k[1][1][0] + 2.0 * k[1][0][1] * k[0][1][1]) * inv;
    k[2][2][0] = c[2][2][0] + (k[2][0][0] * k[0][2][0] + 2.0 * k[1][1][0].powi(2)) * inv;
    k[2][0][2] = c[2][0][2] + (k[2][0][0] * k[0][0][2] + 2.0 * k[1][0][1].powi(2)) * inv;
    k[0][2][2] = c[0][2][2] + (k[0][2][0] * k[0][0][2] + 2.0 * k[0][1][1].powi(2)) * inv;

    k[1][2][2] = c[1][2][2] + fifth_correction_122(&k) * inv;
    k[2][1][2] = c[2][1][2] + fifth_correction_212(&k) * inv;
    k[2][2][1] = c[2][2][1] + fifth_correction_221(&k) * inv;

    let (a, b) = sixth_corrections(&k);
    k[2][2][2] = c[2][2][2] + a * inv - b * inv * inv;
    k
}

/// Relaxation in cumulant space. `u` is the force-shifted velocity; the
/// first-order central moments (which equal `-F/2` under that shift) relax
/// with `omega` so that the Guo source added afterwards completes exactly one
/// unit of forcing.
#[inline(always)]
pub(crate) fn relax(
    f: &[f64; Q],
    rho: f64,
    u: [f64; 3],
    omega: f64,
    rates: &[f64; HIGHER_ORDER_RATE_COUNT],
) -> [f64; Q] {
    let k = central_moments(f, u);
    let mut c = cumulants_from_central(&k, rho);
    let keep = 1.0 - omega;

    // first order
    c[1][0][0] *= keep;
    c[0][1][0] *= keep;
    c[0][0][1] *= keep;

    // second order: off-diagonal, normal-stress differences, trace
    c[1][1][0] *= keep;
    c[1][0][1] *= keep;
    c[0][1][1] *= keep;
    let dxy = keep * (c[2][0][0] - c[0][2][0]);
    let dxz = keep * (c[2][0][0] - c[0][0][2]);
    let trace = c[2][0][0] + c[0][2][0] + c[0][0][2];
    let trace = trace + omega * (rho - trace);
    c[2][0][0] = (trace + dxy + dxz) / 3.0;
    c[0][2][0] = (trace - 2.0 * dxy + dxz) / 3.0;
    c[0][0][2] = (trace + dxy - 2.0 * dxz) / 3.0;

    // third order
    let (k_sum, k_diff, k_111) = (1.0 - rates[0], 1.0 - rates[1], 1.0 - rates[2]);
    let pair = |a: f64, b: f64| {
        let s = k_sum * (a + b);
        let d = k_diff * (a - b);
        (0.5 * (s + d), 0.5 * (s - d))
    };
    (c[1][2][0], c[1][0][2]) = pair(c[1][2][0], c[1][0][2]);
    (c[2][1][0], c[0][1][2]) = pair(c[2][1][0], c[0][1][2]);
    (c[2][0][1], c[0][2][1]) = pair(c[2][0][1], c[0][2][1]);
    c[1][1][1] *= k_111;

    // fourth order
    let (k_dev, k_iso, k_mixed) = (1.0 - rates[3], 1.0 - rates[4], 1.0 - rates[5]);
    let a = k_dev * (c[2][2][0] - 2.0 * c[2][0][2] + c[0][2][2]);
    let b = k_dev * (c[2][2][0] + c[2][0][2] - 2.0 * c[0][2][2]);
    let s = k_iso * (c[2][2][0] + c[2][0][2] + c[0][2][2]);
    c[2][2][0] = (a + b + s) / 3.0;
    c[2][0][2] = (s - a) / 3.0;
    c[0][2][2] = (s - b) / 3.0;
    c[2][1][1] *= k_mixed;
    c[1][2][1] *= k_mixed;
    c[1][1][2] *= k_mixed;

    // fifth and sixth order
    let k5 = 1.0 - rates[6];
    c[1][2][2] *= k5;
    c[2][1][2] *= k5;
    c[2][2][1] *= k5;
    c[2][2][2] *= 1.0 - rates[7];

    let mut m = central_from_cumulants(&c, rho);
    backward_cube(&mut m, u);
    from_cube(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::stencil::VELOCITIES_F64;
    use rand::{Rng, SeedableRng};

    fn random_pdf(rng: &mut impl Rng) -> [f64; Q] {
        let mut f = [0.0; Q];
        for v in f.iter_mut() {
            *v = rng.random_range(0.01..0.2);
        }
        f
    }

    /// Raw moment E[prod_k X_{axes[k]}] of the normalised distribution.
    fn raw_moment(p: &[f64; Q], axes: &[usize]) -> f64 {
        (0..Q)
            .map(|i| {
                axes.iter().map(|&a| VELOCITIES_F64[i][a]).product::<f64>() * p[i]
            })
            .sum()
    }

    /// Set partitions of `items` as lists of blocks.
    fn partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let first = items[0];
        let mut out = Vec::new();
        for mut part in partitions(&items[1..]) {
            for b in 0..part.len() {
                let mut p = part.clone();
                p[b].insert(0, first);
                out.push(p);
            }
            part.push(vec![first]);
            out.push(part);
        }
        out
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|v| v as f64).product()
    }

    /// Joint cumulant via the partition formula on raw moments.
    fn joint_cumulant(p: &[f64; Q], axes: &[usize]) -> f64 {
        let idx: Vec<usize> = (0..axes.len()).collect();
        partitions(&idx)
            .into_iter()
            .map(|part| {
                let nb = part.len();
                let sign = if (nb - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let prod: f64 = part
                    .iter()
                    .map(|block| {
                        let ax: Vec<usize> = block.iter().map(|&k| axes[k]).collect();
                        raw_moment(p, &ax)
                    })
                    .product();
                sign * factorial(nb - 1) * prod
            })
            .sum()
    }

    #[test]
    fn cumulants_match_partition_formula() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        for _ in 0..20 {
            let f = random_pdf(&mut rng);
            let rho: f64 = f.iter().sum();
            let mut u = [0.0; 3];
            for i in 0..Q {
                for a in 0..3 {
                    u[a] += VELOCITIES_F64[i][a] * f[i] / rho;
                }
            }
            let p: [f64; Q] = std::array::from_fn(|i| f[i] / rho);
            let c = cumulants_from_central(&central_moments(&f, u), rho);
            for a in 0..3 {
                for b in 0..3 {
                    for g in 0..3 {
                        if a + b + g < 2 {
                            continue;
                        }
                        let mut axes = vec![0; a];
                        axes.extend(std::iter::repeat(1).take(b));
                        axes.extend(std::iter::repeat(2).take(g));
                        let oracle = rho * joint_cumulant(&p, &axes);
                        assert!(
                            (c[a][b][g] - oracle).abs() < 1e-13,
                            "C{a}{b}{g}: {} vs {oracle}",
                            c[a][b][g]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn transforms_invert() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        for _ in 0..50 {
            let f = random_pdf(&mut rng);
            let rho: f64 = f.iter().sum();
            let u = [
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            ];
            let k = central_moments(&f, u);
            let c = cumulants_from_central(&k, rho);
            let mut back = central_from_cumulants(&c, rho);
            backward_cube(&mut back, u);
            let g = from_cube(&back);
            for i in 0..Q {
                assert!((f[i] - g[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn central_moments_by_direct_summation() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let f = random_pdf(&mut rng);
        let u = [0.03, -0.02, 0.05];
        let k = central_moments(&f, u);
        for a in 0..3 {
            for b in 0..3 {
                for g in 0..3 {
                    let direct: f64 = (0..Q)
                        .map(|i| {
                            let c = VELOCITIES_F64[i];
                            (c[0] - u[0]).powi(a as i32)
                                * (c[1] - u[1]).powi(b as i32)
                                * (c[2] - u[2]).powi(g as i32)
                                * f[i]
                        })
                        .sum();
                    assert!((k[a][b][g] - direct).abs() < 1e-15);
                }
            }
        }
    }
}
