//! Candidate-hole detection: scene loading, lifting instance masks into
//! world-frame point clouds, centroid computation, height filtering, and
//! per-candidate crops.
//!
//! Masks come from the scene contract (synthetic renders or precomputed
//! offline segmentations); no segmentation model runs here.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    deproject_pixel, transform_points, CameraIntrinsics, GeometryError, SE3Transform,
};
use crate::pgm::{self, PgmError};
use crate::raster::{DepthImage, GrayImage, PixelRect};
use crate::scene::{Scene, SceneMeta, SegmentTruth};

/// Minimum mean segment height separating holes from table clutter, meters.
pub const Z_THRESHOLD_M: f64 = 0.050;

/// Default margin around the mask bounding box when cropping views.
pub const CROP_MARGIN_PX: u32 = 16;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("missing file: {0}")]
    MissingFile(String),
    #[error("{path}: {reason}")]
    FormatError { path: String, reason: String },
    #[error("segment {segment}: no mask pixel carries valid depth")]
    EmptyCloud { segment: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<PgmError> for SceneError {
    fn from(e: PgmError) -> Self {
        match e {
            PgmError::Io { path, source } if source.kind() == std::io::ErrorKind::NotFound => {
                SceneError::MissingFile(path)
            }
            PgmError::Io { path, source } => SceneError::FormatError {
                path,
                reason: source.to_string(),
            },
            PgmError::Format { path, reason } => SceneError::FormatError { path, reason },
        }
    }
}

/// One segmented hole candidate: masks, world-frame cloud, centroid, crops.
#[derive(Debug, Clone)]
pub struct HoleCandidate {
    /// Index into the scene's segment list.
    pub index: usize,
    /// World-frame points, meters.
    pub cloud: Vec<Vector3<f64>>,
    /// Arithmetic mean of the cloud.
    pub centroid: Vector3<f64>,
    /// Per-view masks (shared with the scene).
    pub masks: BTreeMap<String, GrayImage>,
    /// Per-view crops around the mask bounding box.
    pub crops: BTreeMap<String, GrayImage>,
    /// Crop rectangles used, per view.
    pub crop_rects: BTreeMap<String, PixelRect>,
    pub truth: SegmentTruth,
}

/// Machine-readable record of one candidate, for `candidates.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub index: usize,
    pub centroid_m: [f64; 3],
    pub z_mean_m: f64,
    pub crop_files: BTreeMap<String, String>,
}

/// Loads and fully validates a scene directory.
pub fn load_scene(dir: &Path) -> Result<Scene, SceneError> {
    let meta_path = dir.join("scene.json");
    let bytes = std::fs::read(&meta_path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            SceneError::MissingFile(meta_path.display().to_string())
        } else {
            SceneError::FormatError {
                path: meta_path.display().to_string(),
                reason: e.to_string(),
            }
        }
    })?;
    let meta: SceneMeta = serde_json::from_slice(&bytes).map_err(|e| SceneError::FormatError {
        path: meta_path.display().to_string(),
        reason: e.to_string(),
    })?;

    // Camera poses were validated during deserialization (orthonormal, det
    // +1); intrinsics get checked here.
    for (name, view) in &meta.views {
        view.intrinsics
            .validate()
            .map_err(|e| SceneError::FormatError {
                path: meta_path.display().to_string(),
                reason: format!("view {name}: {e}"),
            })?;
    }
    if !meta.views.contains_key(&meta.depth_view) {
        return Err(SceneError::FormatError {
            path: meta_path.display().to_string(),
            reason: format!("depth view {:?} not among views", meta.depth_view),
        });
    }

    let depth = pgm::read_depth(&dir.join(&meta.depth_file))?;
    let mut views = BTreeMap::new();
    for (name, view) in &meta.views {
        let img = pgm::read_gray(&dir.join(&view.image_file))?;
        if img.width != view.intrinsics.width || img.height != view.intrinsics.height {
            return Err(SceneError::FormatError {
                path: dir.join(&view.image_file).display().to_string(),
                reason: format!(
                    "image is {}x{} but intrinsics say {}x{}",
                    img.width, img.height, view.intrinsics.width, view.intrinsics.height
                ),
            });
        }
        views.insert(name.clone(), img);
    }
    {
        let dv = &views[&meta.depth_view];
        if depth.width != dv.width || depth.height != dv.height {
            return Err(SceneError::FormatError {
                path: dir.join(&meta.depth_file).display().to_string(),
                reason: "depth and view dimensions differ".into(),
            });
        }
    }

    let mut masks = Vec::with_capacity(meta.segments.len());
    for seg in &meta.segments {
        let mut per_view = BTreeMap::new();
        for (view, file) in &seg.masks {
            let img = pgm::read_gray(&dir.join(file))?;
            let ref_img = views.get(view).ok_or_else(|| SceneError::FormatError {
                path: dir.join(file).display().to_string(),
                reason: format!("mask references unknown view {view:?}"),
            })?;
            if img.width != ref_img.width || img.height != ref_img.height {
                return Err(SceneError::FormatError {
                    path: dir.join(file).display().to_string(),
                    reason: "mask and view dimensions differ".into(),
                });
            }
            per_view.insert(view.clone(), img);
        }
        masks.push(per_view);
    }

    let mut peg_views = BTreeMap::new();
    for (view, file) in &meta.peg_views {
        peg_views.insert(view.clone(), pgm::read_gray(&dir.join(file))?);
    }

    Ok(Scene {
        meta,
        depth,
        views,
        masks,
        peg_views,
    })
}

/// Lifts a mask into a world-frame point cloud: one point per mask pixel with
/// valid depth, deprojected at the pixel center then transformed.
pub fn mask_to_cloud(
    mask: &GrayImage,
    depth: &DepthImage,
    k: &CameraIntrinsics,
    t_wc: &SE3Transform,
) -> Result<Vec<Vector3<f64>>, SceneError> {
    let mut cam_points = Vec::new();
    for (u, v) in mask.on_pixels() {
        let d = depth.get(u, v);
        if d == 0 {
            continue; // invalid-depth sentinel
        }
        cam_points.push(
            deproject_pixel(u as f64 + 0.5, v as f64 + 0.5, d, k)
                .expect("nonzero depth deprojects"),
        );
    }
    if cam_points.is_empty() {
        return Err(SceneError::EmptyCloud {
            segment: usize::MAX,
        });
    }
    Ok(transform_points(&cam_points, t_wc))
}

/// Component-wise arithmetic mean of a cloud.
pub fn centroid(cloud: &[Vector3<f64>]) -> Result<Vector3<f64>, SceneError> {
    if cloud.is_empty() {
        return Err(SceneError::EmptyCloud {
            segment: usize::MAX,
        });
    }
    let mut acc = Vector3::zeros();
    for p in cloud {
        acc += p;
    }
    Ok(acc / cloud.len() as f64)
}

/// Axis-aligned crop of each view around the candidate's mask bounding box
/// expanded by `margin_px`, clamped to the image bounds.
pub fn crop_views(
    scene: &Scene,
    masks: &BTreeMap<String, GrayImage>,
    margin_px: u32,
) -> (BTreeMap<String, GrayImage>, BTreeMap<String, PixelRect>) {
    let mut crops = BTreeMap::new();
    let mut rects = BTreeMap::new();
    for (view, mask) in masks {
        let Some(bbox) = mask.mask_bbox() else {
            continue;
        };
        let img = &scene.views[view];
        let rect = PixelRect {
            x0: bbox.x0.saturating_sub(margin_px),
            y0: bbox.y0.saturating_sub(margin_px),
            x1: (bbox.x1 + margin_px).min(img.width),
            y1: (bbox.y1 + margin_px).min(img.height),
        };
        crops.insert(view.clone(), img.crop(rect));
        rects.insert(view.clone(), rect);
    }
    (crops, rects)
}

/// Builds candidates for every segment in the scene: cloud, centroid, crops.
/// Segments whose mask has no valid depth are skipped with a log line rather
/// than failing the whole scene.
pub fn detect_candidates(
    scene: &Scene,
    crop_margin_px: u32,
) -> Result<Vec<HoleCandidate>, SceneError> {
    let k = scene.intrinsics(&scene.meta.depth_view);
    let t_wc = scene.camera_pose(&scene.meta.depth_view);
    let mut out = Vec::new();
    for (i, seg_masks) in scene.masks.iter().enumerate() {
        let Some(mask) = seg_masks.get(&scene.meta.depth_view) else {
            log::warn!("segment {i} has no mask in the depth view; skipping");
            continue;
        };
        let cloud = match mask_to_cloud(mask, &scene.depth, k, t_wc) {
            Ok(c) => c,
            Err(SceneError::EmptyCloud { .. }) => {
                log::warn!("segment {i}: empty cloud; skipping");
                continue;
            }
            Err(e) => return Err(e),
        };
        let c = centroid(&cloud)?;
        let (crops, crop_rects) = crop_views(scene, seg_masks, crop_margin_px);
        out.push(HoleCandidate {
            index: i,
            cloud,
            centroid: c,
            masks: seg_masks.clone(),
            crops,
            crop_rects,
            truth: scene.meta.segments[i].truth,
        });
    }
    Ok(out)
}

/// Retains candidates whose mean height is at or above the threshold
/// (elimination happens when `z < z_threshold`, so the boundary is kept).
/// Order is preserved.
pub fn filter_by_height(candidates: Vec<HoleCandidate>, z_threshold_m: f64) -> Vec<HoleCandidate> {
    candidates
        .into_iter()
        .filter(|c| c.centroid.z >= z_threshold_m)
        .collect()
}

/// Serializable summaries plus crop file names for `candidates.json`.
pub fn candidate_records(candidates: &[HoleCandidate]) -> Vec<CandidateRecord> {
    candidates
        .iter()
        .map(|c| CandidateRecord {
            index: c.index,
            centroid_m: [c.centroid.x, c.centroid.y, c.centroid.z],
            z_mean_m: c.centroid.z,
            crop_files: c
                .crops
                .keys()
                .map(|view| (view.clone(), format!("crop_{}_{}.pgm", c.index, view)))
                .collect(),
        })
        .collect()
}

/// Runs detection end-to-end on a scene directory and writes crops plus
/// `candidates.json` into `out_dir`.
pub fn detect_to_dir(
    scene_dir: &Path,
    out_dir: &Path,
    z_threshold_m: f64,
    crop_margin_px: u32,
) -> Result<Vec<HoleCandidate>, SceneError> {
    let scene = load_scene(scene_dir)?;
    let candidates = filter_by_height(detect_candidates(&scene, crop_margin_px)?, z_threshold_m);
    std::fs::create_dir_all(out_dir).map_err(|e| SceneError::FormatError {
        path: out_dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let records = candidate_records(&candidates);
    for (cand, rec) in candidates.iter().zip(&records) {
        for (view, file) in &rec.crop_files {
            pgm::write_gray(&out_dir.join(file), &cand.crops[view])?;
        }
    }
    let json = serde_json::to_vec_pretty(&records).expect("records serialize");
    std::fs::write(out_dir.join("candidates.json"), json).map_err(|e| SceneError::FormatError {
        path: out_dir.join("candidates.json").display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(candidates)
}
