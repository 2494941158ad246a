//! Flat-shaded rasterization of polygon prisms into the scene contract.
//!
//! Two true pinhole cameras: a top-down view 0.5 m above the table and an
//! angled view pitched about the board center. Holes are depressions; their
//! opening is rendered at the cavity-floor plane so mask pixels and depth
//! pixels agree exactly. No lighting, no texture.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{make_shape, SyntheticWorld, WorldGenError};
use crate::geometry::{CameraIntrinsics, Polygon2D, SE3Transform};
use crate::raster::{fill_polygon, DepthImage, GrayImage};
use crate::scene::{Scene, SceneMeta, SegmentMeta, SegmentTruth, ViewMeta, ANGLED_VIEW, TOP_VIEW};

const TABLE_GRAY: u8 = 40;
const BOARD_GRAY: u8 = 110;
const CLUTTER_GRAY: u8 = 70;
const CAVITY_GRAY: u8 = 20;

/// Sensor imperfections injected at render time; all default to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Gaussian noise added to every depth sample.
    pub depth_sigma_mm: f64,
    /// Binary erosion radius applied to each mask.
    pub mask_erosion_px: u32,
    /// Magnitude of a per-segment mask shift in a seeded random direction.
    pub centroid_bias_mm: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            depth_sigma_mm: 0.0,
            mask_erosion_px: 0,
            centroid_bias_mm: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    /// Scale at the board-top plane in the top-down view.
    pub mm_per_pixel: f64,
    /// Camera height above the table, meters.
    pub camera_height_m: f64,
    /// Pitch of the second camera about the board center, degrees in [0, 90).
    pub angled_view_deg: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub noise: NoiseConfig,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            mm_per_pixel: 0.25,
            camera_height_m: 0.5,
            angled_view_deg: 30.0,
            image_width: 1280,
            image_height: 720,
            noise: NoiseConfig::default(),
        }
    }
}

struct Camera {
    intrinsics: CameraIntrinsics,
    /// World <- camera.
    pose: SE3Transform,
    /// Camera <- world, cached.
    inv: SE3Transform,
}

impl Camera {
    fn new(intrinsics: CameraIntrinsics, pose: SE3Transform) -> Self {
        let inv = pose.inverse();
        Self {
            intrinsics,
            pose,
            inv,
        }
    }

    /// Projects a world point (meters) to continuous pixel coordinates; also
    /// returns the camera-frame depth in millimeters.
    fn project(&self, p_world: Vector3<f64>) -> ([f64; 2], f64) {
        let pc = self.inv.apply(&p_world);
        let k = &self.intrinsics;
        (
            [k.cx + k.fx * pc.x / pc.z, k.cy + k.fy * pc.y / pc.z],
            pc.z * 1000.0,
        )
    }

    /// Projects a planar polygon in world millimeters lying at `z_m`.
    fn project_polygon(&self, poly: &Polygon2D, z_m: f64) -> Vec<[f64; 2]> {
        poly.vertices()
            .iter()
            .map(|[x, y]| self.project(Vector3::new(x / 1000.0, y / 1000.0, z_m)).0)
            .collect()
    }
}

fn board_polygon_mm(world: &SyntheticWorld) -> Polygon2D {
    let (w, h) = world.board_size_mm;
    Polygon2D::new(vec![
        [-w / 2.0, -h / 2.0],
        [w / 2.0, -h / 2.0],
        [w / 2.0, h / 2.0],
        [-w / 2.0, h / 2.0],
    ])
    .expect("board rectangle")
    .rotated_about(world.board_pose.yaw_deg(), [0.0, 0.0])
    .translated(world.board_pose.x * 1000.0, world.board_pose.y * 1000.0)
}

fn clutter_polygon_mm(world: &SyntheticWorld, k: usize) -> Result<Polygon2D, WorldGenError> {
    let c = &world.clutter[k];
    Ok(make_shape(&c.shape)?
        .rotated_about(c.pose.yaw_deg(), [0.0, 0.0])
        .translated(c.pose.x * 1000.0, c.pose.y * 1000.0))
}

fn build_cameras(
    world: &SyntheticWorld,
    cfg: &RenderConfig,
) -> Result<(Camera, Camera), WorldGenError> {
    let board_top_m = world.board_height_mm / 1000.0;
    let f = (cfg.camera_height_m * 1000.0 - world.board_height_mm) / cfg.mm_per_pixel;
    let intrinsics = CameraIntrinsics {
        fx: f,
        fy: f,
        cx: cfg.image_width as f64 / 2.0,
        cy: cfg.image_height as f64 / 2.0,
        width: cfg.image_width,
        height: cfg.image_height,
    };
    intrinsics.validate()?;

    let bc = Vector3::new(world.board_pose.x, world.board_pose.y, board_top_m);

    // Straight-down camera: +x east, image rows run south (v up on screen is
    // +y in the world).
    let top_rot = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    let top_pose = SE3Transform::new(
        top_rot,
        Vector3::new(world.board_pose.x, world.board_pose.y, cfg.camera_height_m),
    )?;

    // Second camera pitched about the board center, same standoff.
    let a = cfg.angled_view_deg.to_radians();
    let standoff = cfg.camera_height_m - board_top_m;
    let pos = bc + Vector3::new(0.0, -standoff * a.sin(), standoff * a.cos());
    let z_cam = (bc - pos).normalize();
    let x_cam = Vector3::new(1.0, 0.0, 0.0);
    let y_cam = z_cam.cross(&x_cam);
    let angled_pose = SE3Transform::new(Matrix3::from_columns(&[x_cam, y_cam, z_cam]), pos)?;

    Ok((
        Camera::new(intrinsics, top_pose),
        Camera::new(intrinsics, angled_pose),
    ))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Renders a world into an in-memory `Scene`. Byte-identical output for
/// identical `(world, cfg)`.
pub fn render_world(world: &SyntheticWorld, cfg: &RenderConfig) -> Result<Scene, WorldGenError> {
    if cfg.mm_per_pixel <= 0.0 || !(0.0..90.0).contains(&cfg.angled_view_deg) {
        return Err(WorldGenError::InvalidDimensions {
            family: "render_config",
            reason: format!(
                "mm_per_pixel {} / angled_view_deg {}",
                cfg.mm_per_pixel, cfg.angled_view_deg
            ),
        });
    }
    let (top_cam, angled_cam) = build_cameras(world, cfg)?;
    let (w, h) = (cfg.image_width, cfg.image_height);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);

    let board_poly = board_polygon_mm(world);
    let board_top_m = world.board_height_mm / 1000.0;
    let cam_h_mm = cfg.camera_height_m * 1000.0;

    // Depth (top view only): table, board slab, clutter slabs, cavity floors.
    let mut depth = DepthImage::new(w, h, cam_h_mm.round() as u16);
    {
        let pts = top_cam.project_polygon(&board_poly, board_top_m);
        let value = (cam_h_mm - world.board_height_mm).round() as u16;
        fill_polygon(&pts, w, h, |u, v| depth.set(u, v, value));
    }
    for k in 0..world.clutter.len() {
        let poly = clutter_polygon_mm(world, k)?;
        let z = world.clutter[k].height_mm / 1000.0;
        let value = (cam_h_mm - world.clutter[k].height_mm).round() as u16;
        let pts = top_cam.project_polygon(&poly, z);
        fill_polygon(&pts, w, h, |u, v| depth.set(u, v, value));
    }
    for k in 0..world.holes.len() {
        let poly = world.cavity_polygon_mm(k)?;
        let floor_m = world.cavity_floor_z_m(k);
        let value = (cam_h_mm - floor_m * 1000.0).round() as u16;
        let pts = top_cam.project_polygon(&poly, floor_m);
        fill_polygon(&pts, w, h, |u, v| depth.set(u, v, value));
    }
    if cfg.noise.depth_sigma_mm > 0.0 {
        for d in depth.data.iter_mut() {
            let noisy = *d as f64 + gaussian(&mut rng) * cfg.noise.depth_sigma_mm;
            *d = noisy.round().clamp(1.0, 65535.0) as u16;
        }
    }

    // Grayscale views.
    let mut views = BTreeMap::new();
    for (name, cam) in [(TOP_VIEW, &top_cam), (ANGLED_VIEW, &angled_cam)] {
        let mut img = GrayImage::new(w, h, TABLE_GRAY);
        let pts = cam.project_polygon(&board_poly, board_top_m);
        fill_polygon(&pts, w, h, |u, v| img.set(u, v, BOARD_GRAY));
        for k in 0..world.clutter.len() {
            let poly = clutter_polygon_mm(world, k)?;
            let pts = cam.project_polygon(&poly, world.clutter[k].height_mm / 1000.0);
            fill_polygon(&pts, w, h, |u, v| img.set(u, v, CLUTTER_GRAY));
        }
        for k in 0..world.holes.len() {
            let poly = world.cavity_polygon_mm(k)?;
            let pts = cam.project_polygon(&poly, world.cavity_floor_z_m(k));
            fill_polygon(&pts, w, h, |u, v| img.set(u, v, CAVITY_GRAY));
        }
        views.insert(name.to_string(), img);
    }

    // Instance masks: one per segment (holes, then clutter), per view.
    let mut masks: Vec<BTreeMap<String, GrayImage>> = Vec::new();
    let mut segments: Vec<SegmentMeta> = Vec::new();
    let n_segments = world.holes.len() + world.clutter.len();
    for k in 0..n_segments {
        let (poly, z_m, truth) = if k < world.holes.len() {
            (
                world.cavity_polygon_mm(k)?,
                world.cavity_floor_z_m(k),
                SegmentTruth::Hole { hole_index: k },
            )
        } else {
            let c = k - world.holes.len();
            (
                clutter_polygon_mm(world, c)?,
                world.clutter[c].height_mm / 1000.0,
                SegmentTruth::Clutter,
            )
        };
        let poly = if cfg.noise.centroid_bias_mm > 0.0 {
            let dir = rng.gen_range(0.0..std::f64::consts::TAU);
            poly.translated(
                cfg.noise.centroid_bias_mm * dir.cos(),
                cfg.noise.centroid_bias_mm * dir.sin(),
            )
        } else {
            poly
        };
        let mut per_view = BTreeMap::new();
        let mut files = BTreeMap::new();
        for (name, cam) in [(TOP_VIEW, &top_cam), (ANGLED_VIEW, &angled_cam)] {
            let mut img = GrayImage::new(w, h, 0);
            let pts = cam.project_polygon(&poly, z_m);
            fill_polygon(&pts, w, h, |u, v| img.set(u, v, 255));
            if cfg.noise.mask_erosion_px > 0 {
                img = img.eroded(cfg.noise.mask_erosion_px);
            }
            per_view.insert(name.to_string(), img);
            files.insert(name.to_string(), format!("mask_{k}_{name}.pgm"));
        }
        masks.push(per_view);
        segments.push(SegmentMeta {
            masks: files,
            truth,
        });
    }

    let (peg_top, peg_angled) = render_peg_views(world, cfg)?;
    let mut peg_view_imgs = BTreeMap::new();
    peg_view_imgs.insert(TOP_VIEW.to_string(), peg_top);
    peg_view_imgs.insert(ANGLED_VIEW.to_string(), peg_angled);
    let mut peg_view_files = BTreeMap::new();
    peg_view_files.insert(TOP_VIEW.to_string(), "peg_top.pgm".to_string());
    peg_view_files.insert(ANGLED_VIEW.to_string(), "peg_angled.pgm".to_string());

    let mut view_meta = BTreeMap::new();
    view_meta.insert(
        TOP_VIEW.to_string(),
        ViewMeta {
            intrinsics: top_cam.intrinsics,
            pose: top_cam.pose,
            image_file: "view_top.pgm".to_string(),
        },
    );
    view_meta.insert(
        ANGLED_VIEW.to_string(),
        ViewMeta {
            intrinsics: angled_cam.intrinsics,
            pose: angled_cam.pose,
            image_file: "view_angled.pgm".to_string(),
        },
    );

    Ok(Scene {
        meta: SceneMeta {
            views: view_meta,
            depth_view: TOP_VIEW.to_string(),
            depth_file: "depth_top.pgm".to_string(),
            segments,
            peg_views: peg_view_files,
            world: world.clone(),
        },
        depth,
        views,
        masks,
        peg_views: peg_view_imgs,
    })
}

/// Renders the grasped peg's cross-sectional and angled silhouette images,
/// the prompt-side counterparts of the hole crops.
pub fn render_peg_views(
    world: &SyntheticWorld,
    cfg: &RenderConfig,
) -> Result<(GrayImage, GrayImage), WorldGenError> {
    let poly = make_shape(&world.peg)?.rotated_about(world.peg_grasp_pose.yaw_deg(), [0.0, 0.0]);
    let (min, max) = poly.bounding_box();
    let extent = (max[0] - min[0]).max(max[1] - min[1]);
    let size = 192u32;
    let scale = (size as f64 * 0.75) / extent; // px per mm

    let render = |squash_y: f64| -> GrayImage {
        let mut img = GrayImage::new(size, size, TABLE_GRAY);
        let c = size as f64 / 2.0;
        let pts: Vec<[f64; 2]> = poly
            .vertices()
            .iter()
            .map(|[x, y]| [c + x * scale, c - y * scale * squash_y])
            .collect();
        fill_polygon(&pts, size, size, |u, v| img.set(u, v, BOARD_GRAY));
        img
    };
    Ok((render(1.0), render(cfg.angled_view_deg.to_radians().cos())))
}
