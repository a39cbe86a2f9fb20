use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use crate::{Error, Result};

/// Drift of `TᵀT` from the identity above which orientations are
/// re-orthonormalized.
pub const REORTHONORMALIZE_THRESHOLD: f64 = 1e-12;

/// Position and orientation of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub p: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self { p: Vector3::zeros(), t: Matrix3::identity() }
    }

    pub fn new(p: Vector3<f64>, t: Matrix3<f64>) -> Self {
        Self { p, t }
    }

    pub fn from_translation(p: [f64; 3]) -> Self {
        Self { p: Vector3::from(p), t: Matrix3::identity() }
    }

    pub fn from_axis_angle(p: [f64; 3], axis: [f64; 3], angle: f64) -> Result<Self> {
        Ok(Self { p: Vector3::from(p), t: rotation_matrix(Vector3::from(axis), angle)? })
    }

    /// Largest entry of `|TᵀT − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.t)
    }

    /// Maps a point given in this frame to the enclosing frame.
    pub fn apply(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.p + self.t * local
    }
}

/// Rotation by `angle` (rad, right-handed) about `axis`.
pub fn rotation_matrix(axis: Vector3<f64>, angle: f64) -> Result<Matrix3<f64>> {
    let norm = axis.norm();
    if !(norm > 0.0 && norm.is_finite()) || !angle.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rotation needs a finite non-zero axis and angle, got {axis:?}, {angle}"
        )));
    }
    Ok(Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).into_inner())
}

pub fn orthonormality_error(t: &Matrix3<f64>) -> f64 {
    (t.transpose() * t - Matrix3::identity()).amax()
}

/// Gram-Schmidt on the columns; the third column is rebuilt as the cross
/// product so the result stays right-handed.
pub fn reorthonormalize(t: &Matrix3<f64>) -> Matrix3<f64> {
    let c0 = t.column(0).normalize();
    let c1 = t.column(1) - c0 * c0.dot(&t.column(1));
    let c1 = c1.normalize();
    let c2 = c0.cross(&c1);
    Matrix3::from_columns(&[c0, c1, c2])
}

/// Re-orthonormalizes `t` only when its drift exceeds the threshold.
pub fn keep_orthonormal(t: &mut Matrix3<f64>) {
    if orthonormality_error(t) > REORTHONORMALIZE_THRESHOLD {
        *t = reorthonormalize(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_about_z() {
        let r = rotation_matrix(Vector3::z(), FRAC_PI_2).unwrap();
        let v = r * Vector3::x();
        assert!((v - Vector3::y()).amax() < 1e-15);
        assert!((r.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_axis() {
        assert!(rotation_matrix(Vector3::zeros(), 1.0).is_err());
    }

    #[test]
    fn gram_schmidt_repairs_drift() {
        let mut t = rotation_matrix(Vector3::new(1.0, 2.0, 3.0), 0.7).unwrap();
        t[(0, 1)] += 1e-6;
        t[(2, 2)] -= 2e-6;
        assert!(orthonormality_error(&t) > 1e-7);
        keep_orthonormal(&mut t);
        assert!(orthonormality_error(&t) < 1e-15);
        assert!((t.determinant() - 1.0).abs() < 1e-14);
    }
}
