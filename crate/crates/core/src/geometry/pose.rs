use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};

/// Tolerance used when validating externally supplied rotations.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

const REORTHONORMALIZE_DRIFT: f64 = 1e-12;

/// A rigid transform in SE(3): `x -> rotation * x + translation`.
///
/// Grasp frames, camera extrinsics and object placements are all `Pose`s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose after checking that `rotation` is a proper rotation
    /// (orthonormal, determinant +1) within [`ROTATION_TOLERANCE`].
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self, GeometryError> {
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidPose("non-finite translation".into()));
        }
        if !is_rotation(&rotation, ROTATION_TOLERANCE) {
            return Err(GeometryError::InvalidPose(
                "rotation is not orthonormal with determinant +1".into(),
            ));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a pose from a matrix the caller already knows to be a rotation.
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized), no translation.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        Self {
            rotation: axis_angle_matrix(axis, angle),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_quaternion(q: &UnitQuaternion<f64>, translation: Vec3) -> Self {
        Self {
            rotation: *q.to_rotation_matrix().matrix(),
            translation,
        }
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::z(), angle)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn with_translation(mut self, translation: Vec3) -> Self {
        self.translation = translation;
        self
    }

    /// Column `i` of the rotation: the i-th axis of this frame in the parent frame.
    pub fn axis(&self, i: usize) -> Vec3 {
        self.rotation.column(i).into_owned()
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let mut rotation = self.rotation * other.rotation;
        if rotation_drift(&rotation) > REORTHONORMALIZE_DRIFT {
            rotation = orthonormalize(&rotation);
        }
        Pose {
            rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Applies the inverse transform without materializing it.
    pub fn inverse_transform_point(&self, x: &Vec3) -> Vec3 {
        self.rotation.tr_mul(&(x - self.translation))
    }

    /// True when the rotation is proper within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        is_rotation(&self.rotation, tol) && self.translation.iter().all(|v| v.is_finite())
    }

    /// Row-major rotation followed by translation; the layout used in candidate dumps.
    pub fn to_row_major(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.x,
            t.y,
            t.z,
        ]
    }

    pub fn from_row_major(v: &[f64; 12]) -> Result<Self, GeometryError> {
        let r = Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
        Self::new(r, Vector3::new(v[9], v[10], v[11]))
    }
}

/// Rotation matrix for `angle` radians about `axis` (Rodrigues).
pub fn axis_angle_matrix(axis: &Vec3, angle: f64) -> Matrix3<f64> {
    let n = axis.norm();
    if n == 0.0 || angle == 0.0 {
        return Matrix3::identity();
    }
    let k = axis / n;
    let (s, c) = angle.sin_cos();
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * s + kx * kx * (1.0 - c)
}

/// Geodesic angle of a rotation matrix in `[0, π]`.
///
/// Uses `atan2(|sin|, cos)` so that angles near 0 and π stay accurate.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let skew = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let sin = (0.5 * skew.norm()).min(1.0);
    sin.atan2(cos).clamp(0.0, std::f64::consts::PI)
}

fn rotation_drift(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

fn is_rotation(r: &Matrix3<f64>, tol: f64) -> bool {
    r.iter().all(|v| v.is_finite())
        && rotation_drift(r) <= tol
        && (r.determinant() - 1.0).abs() <= tol
}

fn orthonormalize(r: &Matrix3<f64>) -> Matrix3<f64> {
    let x = r.column(0).normalize();
    let y0 = r.column(1).into_owned();
    let y = (y0 - x * x.dot(&y0)).normalize();
    let z = x.cross(&y);
    Matrix3::from_columns(&[x, y, z])
}

/// Builds a right-handed orthonormal basis whose first axis is `x` and whose
/// second axis is as close as possible to `y_hint`.
pub fn frame_from_xy(x: &Vec3, y_hint: &Vec3) -> Option<Matrix3<f64>> {
    let x = x.try_normalize(1e-12)?;
    let y = (y_hint - x * x.dot(y_hint)).try_normalize(1e-12)?;
    let z = x.cross(&y);
    Some(Matrix3::from_columns(&[x, y, z]))
}
