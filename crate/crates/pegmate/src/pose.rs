//! SE(2) pose estimation: yaw from canonicalization plus a four-rotation
//! classification, position from the segmented cloud's centroid.
//!
//! Conventions that make `theta_yaw = theta_rotate + theta` recover the
//! world yaw: pixel coordinates are lifted to screen coordinates (y up) so a
//! shape at world yaw psi displays at angle psi; canonicalization rotates
//! the content by -theta; each successive classification rotation turns the
//! content a further 90 degrees clockwise on screen.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{centroid, HoleCandidate, SceneError};
use crate::geometry::{
    convex_hull, min_area_rect, normalize_yaw, GeometryError, OrientedRect, Polygon2D, SE2Pose,
};
use crate::matcher::{
    build_prompt, rank_candidates, GeometryQuery, InputStrategy, MatchError, MatchQuery,
    MatchResponse, MatcherBackend,
};
use crate::raster::{GrayImage, Interp};

#[derive(Debug, Error)]
pub enum PoseError {
    #[error("degenerate mask: {0}")]
    Degenerate(#[from] GeometryError),
    #[error("no rotation produced a parseable verdict: {0:?}")]
    AllUnparseable(Vec<String>),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// A hole crop rotated so its minimum bounding rectangle is axis-aligned.
#[derive(Debug, Clone)]
pub struct CanonicalizedImage {
    pub image: GrayImage,
    pub mask: GrayImage,
    /// Canonicalization angle in [0, 90).
    pub theta_deg: f64,
    /// Bounding rectangle measured on the original mask (screen coords).
    pub rect: OrientedRect,
}

/// One of the four classification inputs.
#[derive(Debug, Clone)]
pub struct RotatedView {
    pub rotation_deg: u32,
    pub image: GrayImage,
    pub mask: GrayImage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YawEstimate {
    /// Final estimate in [0, 360).
    pub theta_yaw_deg: f64,
    /// Selected classification rotation: 0, 90, 180, or 270.
    pub theta_rotate_deg: u32,
    /// Canonicalization angle in [0, 90).
    pub theta_deg: f64,
    /// All four rotations with their responses, best first; kept so a retry
    /// can fall back to the runner-up.
    pub ranking: Vec<(u32, MatchResponse)>,
}

impl YawEstimate {
    /// Yaw obtained by composing the rank-`k` rotation instead of the best.
    pub fn yaw_at_rank(&self, k: usize) -> Option<f64> {
        self.ranking
            .get(k)
            .map(|(r, _)| normalize_yaw(*r as f64 + self.theta_deg))
    }
}

/// Screen-coordinate points of the mask's on-pixel centers (y up).
fn mask_screen_points(mask: &GrayImage) -> Vec<[f64; 2]> {
    mask.on_pixels()
        .into_iter()
        .map(|(u, v)| [u as f64 + 0.5, -(v as f64 + 0.5)])
        .collect()
}

/// Rotates the crop so the mask's bounding rectangle aligns with the image
/// axes: nearest-neighbor for the mask (stays binary), bilinear for the
/// intensity image, both on a padded canvas so nothing clips.
pub fn canonicalize(image: &GrayImage, mask: &GrayImage) -> Result<CanonicalizedImage, PoseError> {
    let pts = mask_screen_points(mask);
    let hull = convex_hull(&pts)?;
    let rect = min_area_rect(&hull)?;
    let theta_deg = rect.angle_deg;
    let center_px = (rect.center[0], -rect.center[1]);
    Ok(CanonicalizedImage {
        image: image.rotate_about(center_px, -theta_deg, Interp::Bilinear),
        mask: mask.rotate_about(center_px, -theta_deg, Interp::Nearest),
        theta_deg,
        rect,
    })
}

/// The four classification inputs: the canonical image turned by successive
/// exact 90-degree screen-clockwise steps (lossless pixel permutations).
pub fn four_rotations(canonical: &CanonicalizedImage) -> [RotatedView; 4] {
    [0u32, 90, 180, 270].map(|r| RotatedView {
        rotation_deg: r,
        image: canonical.image.rot90_screen_cw(r / 90),
        mask: canonical.mask.rot90_screen_cw(r / 90),
    })
}

/// Shape-level inputs for the yaw queries; images feed the remote backend,
/// geometry feeds the oracle.
#[derive(Debug, Clone, Default)]
pub struct YawQueryContext {
    /// Cross-sectional peg image ($I^p_1$ counterpart), PNG bytes.
    pub peg_image_png: Option<Vec<u8>>,
    pub geometry: Option<YawGeometry>,
}

#[derive(Debug, Clone)]
pub struct YawGeometry {
    /// Peg footprint at the grasp orientation, millimeters.
    pub peg: Polygon2D,
    /// Cavity polygon at its world orientation, millimeters.
    pub cavity: Polygon2D,
    pub clearance_mm: f64,
}

/// Four-class yaw estimation: query the backend once per rotation with the
/// matching prompt shape, rank with the ordinary confidence ranking, and
/// compose the winning rotation with the canonicalization angle.
pub fn estimate_yaw(
    ctx: &YawQueryContext,
    canonical: &CanonicalizedImage,
    backend: &dyn MatcherBackend,
) -> Result<YawEstimate, PoseError> {
    let rotations = four_rotations(canonical);
    let peg_png = ctx
        .peg_image_png
        .clone()
        .unwrap_or_else(|| canonical.image.to_png());
    // The displayed cavity after canonicalization: rotated by -theta; each
    // classification step turns it a further -90 on screen.
    let canonical_cavity = ctx
        .geometry
        .as_ref()
        .map(|g| g.cavity.rotated(-canonical.theta_deg));

    let mut responses: Vec<(usize, MatchResponse)> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    for (i, view) in rotations.iter().enumerate() {
        let prompt = build_prompt(
            &[peg_png.clone()],
            &[view.image.to_png()],
            InputStrategy::CrossSectionalOnly,
        )?;
        let geometry = match (&ctx.geometry, &canonical_cavity) {
            (Some(g), Some(cav)) => Some(GeometryQuery {
                peg: g.peg.clone(),
                hole: cav.rotated(-(view.rotation_deg as f64)),
                clearance_mm: g.clearance_mm,
                peg_label: String::new(),
                hole_label: String::new(),
                orientation_locked: true,
            }),
            _ => None,
        };
        match backend.answer(&MatchQuery { prompt, geometry }) {
            Ok(resp) => responses.push((i, resp)),
            Err(e) => failures.push(format!("rotation {}: {e}", view.rotation_deg)),
        }
    }
    if responses.is_empty() {
        return Err(PoseError::AllUnparseable(failures));
    }

    let order = rank_candidates(&responses);
    let by_index: std::collections::HashMap<usize, MatchResponse> = responses.into_iter().collect();
    let ranking: Vec<(u32, MatchResponse)> = order
        .iter()
        .map(|&i| (90 * i as u32, by_index[&i].clone()))
        .collect();
    let theta_rotate_deg = ranking[0].0;
    Ok(YawEstimate {
        theta_yaw_deg: normalize_yaw(theta_rotate_deg as f64 + canonical.theta_deg),
        theta_rotate_deg,
        theta_deg: canonical.theta_deg,
        ranking,
    })
}

/// Hole position: the centroid of the segmented world-frame cloud.
pub fn localize(candidate: &HoleCandidate) -> Result<Vector3<f64>, PoseError> {
    Ok(centroid(&candidate.cloud)?)
}

/// Full SE(2) estimate: (x, y) from localization, yaw from the estimate.
pub fn se2_estimate(candidate: &HoleCandidate, yaw: &YawEstimate) -> Result<SE2Pose, PoseError> {
    let p = localize(candidate)?;
    Ok(SE2Pose::new(p.x, p.y, yaw.theta_yaw_deg))
}
