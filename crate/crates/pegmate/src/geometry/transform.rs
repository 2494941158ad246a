//! SE(3)/SE(2) rigid transforms and pinhole camera deprojection.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Orthonormality tolerance for rotation validation and drift checks.
pub const ROTATION_TOL: f64 = 1e-9;

/// Rigid transform in SE(3): `p_out = R * p_in + t`, translation in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SE3Transform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl SE3Transform {
    /// Validates that `rotation` is orthonormal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        let drift = orthonormality_drift(&rotation);
        if drift > ROTATION_TOL {
            return Err(GeometryError::InvalidRotation { drift });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Deviation of `R^T R` from identity plus determinant error.
    pub fn drift(&self) -> f64 {
        orthonormality_drift(&self.rotation)
    }

    /// Gram-Schmidt re-orthonormalization, for long composition chains.
    pub fn re_orthonormalized(&self) -> Self {
        let c0 = self.rotation.column(0).normalize();
        let mut c1 = self.rotation.column(1).into_owned();
        c1 -= c0 * c0.dot(&c1);
        let c1 = c1.normalize();
        let c2 = c0.cross(&c1);
        Self {
            rotation: Matrix3::from_columns(&[c0, c1, c2]),
            translation: self.translation,
        }
    }

    /// Row-major homogeneous 4x4, bottom row `0 0 0 1`.
    pub fn to_matrix4(&self) -> [[f64; 4]; 4] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    /// Parses and validates a row-major homogeneous 4x4.
    pub fn from_matrix4(m: &[[f64; 4]; 4]) -> Result<Self, GeometryError> {
        let bottom_ok = m[3][0] == 0.0 && m[3][1] == 0.0 && m[3][2] == 0.0 && m[3][3] == 1.0;
        if !bottom_ok {
            return Err(GeometryError::InvalidRotation { drift: f64::NAN });
        }
        let rotation = Matrix3::new(
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        );
        let translation = Vector3::new(m[0][3], m[1][3], m[2][3]);
        Self::new(rotation, translation)
    }
}

impl Serialize for SE3Transform {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_matrix4().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SE3Transform {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let m = <[[f64; 4]; 4]>::deserialize(deserializer)?;
        Self::from_matrix4(&m).map_err(serde::de::Error::custom)
    }
}

fn orthonormality_drift(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    let mut drift: f64 = 0.0;
    for v in gram.iter() {
        drift = drift.max(v.abs());
    }
    drift.max((r.determinant() - 1.0).abs())
}

/// `compose(a, b)` maps points as `a(b(p))`.
pub fn compose(a: &SE3Transform, b: &SE3Transform) -> SE3Transform {
    SE3Transform {
        rotation: a.rotation * b.rotation,
        translation: a.rotation * b.translation + a.translation,
    }
}

/// Planar pose: position in world meters, yaw in degrees normalized to [0, 360).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SE2Pose {
    pub x: f64,
    pub y: f64,
    yaw_deg: f64,
}

impl SE2Pose {
    pub fn new(x: f64, y: f64, yaw_deg: f64) -> Self {
        Self {
            x,
            y,
            yaw_deg: normalize_yaw(yaw_deg),
        }
    }

    pub fn yaw_deg(&self) -> f64 {
        self.yaw_deg
    }
}

/// Reduces an angle in degrees into [0, 360).
pub fn normalize_yaw(yaw_deg: f64) -> f64 {
    let r = yaw_deg.rem_euclid(360.0);
    if r == 360.0 {
        0.0
    } else {
        r
    }
}

/// Smallest absolute angular distance between two angles, in degrees.
pub fn angular_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "focal lengths must be positive, got ({}, {})",
                self.fx, self.fy
            )));
        }
        if !(0.0 <= self.cx && self.cx < self.width as f64)
            || !(0.0 <= self.cy && self.cy < self.height as f64)
        {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Deprojects pixel `(u, v)` with `depth` in millimeters into camera-frame
/// meters: `((u-cx)*d/fx, (v-cy)*d/fy, d)` with `d = depth/1000`.
pub fn deproject_pixel(
    u: f64,
    v: f64,
    depth_mm: u16,
    k: &CameraIntrinsics,
) -> Result<Vector3<f64>, GeometryError> {
    if depth_mm == 0 {
        return Err(GeometryError::ZeroDepth {
            u: u as u32,
            v: v as u32,
        });
    }
    let d = depth_mm as f64 / 1000.0;
    Ok(Vector3::new(
        (u - k.cx) * d / k.fx,
        (v - k.cy) * d / k.fy,
        d,
    ))
}

/// Maps camera-frame points into the world frame through `t_wc` (world <- camera).
pub fn transform_points(points: &[Vector3<f64>], t_wc: &SE3Transform) -> Vec<Vector3<f64>> {
    points.iter().map(|p| t_wc.apply(p)).collect()
}
