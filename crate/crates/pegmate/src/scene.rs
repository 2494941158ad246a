//! The scene directory contract shared by the renderer (writer) and the
//! detection stage (reader).
//!
//! Layout, bit-exact:
//! - `scene.json` — intrinsics, camera poses as row-major 4x4 (meters), and
//!   per-segment ground truth
//! - `depth_top.pgm` — 16-bit big-endian millimeters, 0 = invalid
//! - `view_top.pgm`, `view_angled.pgm` — 8-bit grayscale
//! - `mask_<k>_top.pgm`, `mask_<k>_angled.pgm` — 8-bit, 255 = inside
//! - `peg_top.pgm`, `peg_angled.pgm` — peg images for prompt construction
//!
//! Real RGB-D captures are imported by producing the same layout offline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{CameraIntrinsics, SE3Transform};
use crate::pgm::{self, PgmError};
use crate::raster::{DepthImage, GrayImage};
use crate::worldgen::SyntheticWorld;

pub const TOP_VIEW: &str = "top";
pub const ANGLED_VIEW: &str = "angled";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewMeta {
    pub intrinsics: CameraIntrinsics,
    /// World <- camera transform, meters.
    pub pose: SE3Transform,
    pub image_file: String,
}

/// What a segmentation mask actually covers, recorded as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentTruth {
    Hole { hole_index: usize },
    Clutter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMeta {
    /// View name -> mask file.
    pub masks: BTreeMap<String, String>,
    pub truth: SegmentTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMeta {
    pub views: BTreeMap<String, ViewMeta>,
    /// View the depth image belongs to.
    pub depth_view: String,
    pub depth_file: String,
    pub segments: Vec<SegmentMeta>,
    /// View name -> peg image file.
    pub peg_views: BTreeMap<String, String>,
    pub world: SyntheticWorld,
}

/// Fully loaded scene: depth, per-view images, and per-segment masks.
#[derive(Debug, Clone)]
pub struct Scene {
    pub meta: SceneMeta,
    pub depth: DepthImage,
    pub views: BTreeMap<String, GrayImage>,
    /// `masks[k][view]` is segment k's mask in that view.
    pub masks: Vec<BTreeMap<String, GrayImage>>,
    pub peg_views: BTreeMap<String, GrayImage>,
}

impl Scene {
    /// Writes the scene directory. Output bytes are a pure function of the
    /// scene contents.
    pub fn write(&self, dir: &Path) -> Result<(), PgmError> {
        std::fs::create_dir_all(dir).map_err(|e| PgmError::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        let json = serde_json::to_vec_pretty(&self.meta).expect("scene meta serializes");
        std::fs::write(dir.join("scene.json"), json).map_err(|e| PgmError::Io {
            path: dir.join("scene.json").display().to_string(),
            source: e,
        })?;
        pgm::write_depth(&dir.join(&self.meta.depth_file), &self.depth)?;
        for (name, meta) in &self.meta.views {
            pgm::write_gray(&dir.join(&meta.image_file), &self.views[name])?;
        }
        for (k, seg) in self.meta.segments.iter().enumerate() {
            for (view, file) in &seg.masks {
                pgm::write_gray(&dir.join(file), &self.masks[k][view])?;
            }
        }
        for (view, file) in &self.meta.peg_views {
            pgm::write_gray(&dir.join(file), &self.peg_views[view])?;
        }
        Ok(())
    }

    pub fn intrinsics(&self, view: &str) -> &CameraIntrinsics {
        &self.meta.views[view].intrinsics
    }

    pub fn camera_pose(&self, view: &str) -> &SE3Transform {
        &self.meta.views[view].pose
    }
}
