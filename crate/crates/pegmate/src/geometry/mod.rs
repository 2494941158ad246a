//! Rigid-body math, camera deprojection, 2D polygon machinery, and the
//! brute-force insertability oracle.
//!
//! Unit conventions, applied at module boundaries everywhere in this crate:
//! image-plane geometry in pixels, board geometry in millimeters, world
//! kinematics in meters.

mod insertability;
mod polygon;
mod transform;

pub use insertability::{
    best_margin_at_yaw, insertability, insertability_with_grid, placed_margin, InsertabilityGrid,
    InsertabilityReport,
};
pub use polygon::{convex_hull, min_area_rect, rot_deg, OrientedRect, Polygon2D};
pub use transform::{
    angular_distance_deg, compose, deproject_pixel, normalize_yaw, transform_points,
    CameraIntrinsics, SE2Pose, SE3Transform,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    /// Depth value of zero is the invalid-depth sentinel of the scene format.
    #[error("zero depth at pixel ({u}, {v})")]
    ZeroDepth { u: u32, v: u32 },
    /// Fewer than 3 points, or all points collinear.
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("rotation matrix is not orthonormal with det +1 (drift {drift:.3e})")]
    InvalidRotation { drift: f64 },
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
}
