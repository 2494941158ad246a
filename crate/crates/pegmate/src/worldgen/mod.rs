//! Synthetic peg/hole worlds: shape families, clearanced hole footprints,
//! and board generation with oracle-certified ground truth.

mod render;

pub use render::{render_peg_views, render_world, NoiseConfig, RenderConfig};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{insertability, GeometryError, Polygon2D, SE2Pose};

#[derive(Debug, Error)]
pub enum WorldGenError {
    #[error("invalid dimensions for {family}: {reason}")]
    InvalidDimensions {
        family: &'static str,
        reason: String,
    },
    #[error("failed to place {placed} of {requested} holes after {tries} tries")]
    PlacementFailure {
        placed: usize,
        requested: usize,
        tries: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Number of chord segments used to approximate half a circle.
const ARC_SEGMENTS_HALF: usize = 16;

/// Cross-section shape family with dimensions in millimeters.
///
/// Every family produces a polygon centered on its area centroid with the
/// minimum bounding rectangle axis-aligned at yaw zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ShapeSpec {
    Rectangle {
        width_mm: f64,
        height_mm: f64,
    },
    Trapezoid {
        base_mm: f64,
        top_mm: f64,
        height_mm: f64,
    },
    DShape {
        diameter_mm: f64,
    },
    Cross {
        length_mm: f64,
        arm_mm: f64,
    },
    KeyedCircle {
        radius_mm: f64,
        key_w_mm: f64,
        key_h_mm: f64,
    },
    LShape {
        width_mm: f64,
        height_mm: f64,
        thickness_mm: f64,
    },
}

impl ShapeSpec {
    /// Free-form name of the family. Deliberately dimension-blind: two
    /// different rectangles share the label, which is what makes name-based
    /// matching fall over on lookalike parts.
    pub fn label(&self) -> &'static str {
        match self {
            ShapeSpec::Rectangle { .. } => "rectangle",
            ShapeSpec::Trapezoid { .. } => "trapezoid",
            ShapeSpec::DShape { .. } => "d-shape",
            ShapeSpec::Cross { .. } => "cross",
            ShapeSpec::KeyedCircle { .. } => "keyed-circle",
            ShapeSpec::LShape { .. } => "l-shape",
        }
    }

    /// Label plus rounded dimensions, for reports where two shapes share a
    /// family label.
    pub fn display_name(&self) -> String {
        match self {
            ShapeSpec::Rectangle {
                width_mm,
                height_mm,
            } => {
                format!("rectangle-{width_mm:.0}x{height_mm:.0}")
            }
            ShapeSpec::Trapezoid {
                base_mm,
                top_mm,
                height_mm,
            } => format!("trapezoid-{base_mm:.0}/{top_mm:.0}x{height_mm:.0}"),
            ShapeSpec::DShape { diameter_mm } => format!("d-shape-{diameter_mm:.0}"),
            ShapeSpec::Cross { length_mm, arm_mm } => {
                format!("cross-{length_mm:.0}x{arm_mm:.0}")
            }
            ShapeSpec::KeyedCircle {
                radius_mm,
                key_w_mm,
                key_h_mm,
            } => format!("keyed-circle-{radius_mm:.0}k{key_w_mm:.0}x{key_h_mm:.0}"),
            ShapeSpec::LShape {
                width_mm,
                height_mm,
                thickness_mm,
            } => format!("l-shape-{width_mm:.0}x{height_mm:.0}t{thickness_mm:.0}"),
        }
    }

    /// Smallest positive rotation (degrees) mapping the shape onto itself.
    /// 360 means no rotational symmetry.
    pub fn rotational_symmetry_deg(&self) -> f64 {
        match self {
            ShapeSpec::Rectangle {
                width_mm,
                height_mm,
            } => {
                if (width_mm - height_mm).abs() < 1e-12 {
                    90.0
                } else {
                    180.0
                }
            }
            ShapeSpec::Cross { .. } => 90.0,
            _ => 360.0,
        }
    }

    fn validate(&self) -> Result<(), WorldGenError> {
        let bad = |family: &'static str, reason: String| -> Result<(), WorldGenError> {
            Err(WorldGenError::InvalidDimensions { family, reason })
        };
        match *self {
            ShapeSpec::Rectangle {
                width_mm,
                height_mm,
            } => {
                if width_mm <= 0.0 || height_mm <= 0.0 {
                    return bad("rectangle", format!("{width_mm} x {height_mm}"));
                }
            }
            ShapeSpec::Trapezoid {
                base_mm,
                top_mm,
                height_mm,
            } => {
                if base_mm <= 0.0 || top_mm <= 0.0 || height_mm <= 0.0 {
                    return bad("trapezoid", format!("{base_mm} / {top_mm} x {height_mm}"));
                }
            }
            ShapeSpec::DShape { diameter_mm } => {
                if diameter_mm <= 0.0 {
                    return bad("d_shape", format!("diameter {diameter_mm}"));
                }
            }
            ShapeSpec::Cross { length_mm, arm_mm } => {
                if length_mm <= 0.0 || arm_mm <= 0.0 || arm_mm >= length_mm {
                    return bad("cross", format!("length {length_mm}, arm {arm_mm}"));
                }
            }
            ShapeSpec::KeyedCircle {
                radius_mm,
                key_w_mm,
                key_h_mm,
            } => {
                if radius_mm <= 0.0
                    || key_w_mm <= 0.0
                    || key_h_mm <= 0.0
                    || key_w_mm >= 2.0 * radius_mm
                {
                    return bad(
                        "keyed_circle",
                        format!("r {radius_mm}, key {key_w_mm} x {key_h_mm}"),
                    );
                }
            }
            ShapeSpec::LShape {
                width_mm,
                height_mm,
                thickness_mm,
            } => {
                if width_mm <= 0.0
                    || height_mm <= 0.0
                    || thickness_mm <= 0.0
                    || thickness_mm >= width_mm
                    || thickness_mm >= height_mm
                {
                    return bad(
                        "l_shape",
                        format!("{width_mm} x {height_mm}, t {thickness_mm}"),
                    );
                }
            }
        }
        Ok(())
    }

    fn raw_vertices(&self) -> Vec<[f64; 2]> {
        match *self {
            ShapeSpec::Rectangle {
                width_mm,
                height_mm,
            } => {
                let (w, h) = (width_mm / 2.0, height_mm / 2.0);
                vec![[-w, -h], [w, -h], [w, h], [-w, h]]
            }
            ShapeSpec::Trapezoid {
                base_mm,
                top_mm,
                height_mm,
            } => {
                let h = height_mm / 2.0;
                vec![
                    [-base_mm / 2.0, -h],
                    [base_mm / 2.0, -h],
                    [top_mm / 2.0, h],
                    [-top_mm / 2.0, h],
                ]
            }
            ShapeSpec::DShape { diameter_mm } => {
                let r = diameter_mm / 2.0;
                // Upper half-disc; the closing edge is the flat side.
                (0..=ARC_SEGMENTS_HALF)
                    .map(|i| {
                        let a = std::f64::consts::PI * i as f64 / ARC_SEGMENTS_HALF as f64;
                        [r * a.cos(), r * a.sin()]
                    })
                    .collect()
            }
            ShapeSpec::Cross { length_mm, arm_mm } => {
                let (l, w) = (length_mm / 2.0, arm_mm / 2.0);
                vec![
                    [-w, -l],
                    [w, -l],
                    [w, -w],
                    [l, -w],
                    [l, w],
                    [w, w],
                    [w, l],
                    [-w, l],
                    [-w, w],
                    [-l, w],
                    [-l, -w],
                    [-w, -w],
                ]
            }
            ShapeSpec::KeyedCircle {
                radius_mm,
                key_w_mm,
                key_h_mm,
            } => {
                let r = radius_mm;
                let half_w = key_w_mm / 2.0;
                // Key protrudes along +x between the two junction angles.
                let alpha = (half_w / r).asin();
                let n = 2 * ARC_SEGMENTS_HALF;
                let span = std::f64::consts::TAU - 2.0 * alpha;
                let mut verts: Vec<[f64; 2]> = (0..=n)
                    .map(|i| {
                        let a = alpha + span * i as f64 / n as f64;
                        [r * a.cos(), r * a.sin()]
                    })
                    .collect();
                verts.push([r + key_h_mm, -half_w]);
                verts.push([r + key_h_mm, half_w]);
                verts
            }
            ShapeSpec::LShape {
                width_mm,
                height_mm,
                thickness_mm,
            } => {
                let (w, h, t) = (width_mm, height_mm, thickness_mm);
                vec![[0.0, 0.0], [w, 0.0], [w, t], [t, t], [t, h], [0.0, h]]
            }
        }
    }
}

/// Builds the peg footprint polygon for a spec (centered at its area
/// centroid). Deterministic: identical specs give identical polygons.
pub fn make_shape(spec: &ShapeSpec) -> Result<Polygon2D, WorldGenError> {
    spec.validate()?;
    let poly = Polygon2D::new(spec.raw_vertices())?;
    let c = poly.area_centroid();
    Ok(poly.translated(-c[0], -c[1]))
}

/// Grows a footprint outward by `clearance_mm` of boundary slack: every edge
/// line is displaced along its outward normal and adjacent lines re-intersect
/// (miter joins). The original polygon sits inside the result with a minimal
/// boundary distance of exactly the clearance.
pub fn offset_polygon(poly: &Polygon2D, clearance_mm: f64) -> Result<Polygon2D, GeometryError> {
    if clearance_mm == 0.0 {
        return Ok(poly.clone());
    }
    let verts = poly.vertices();
    let n = verts.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = verts[(i + n - 1) % n];
        let cur = verts[i];
        let next = verts[(i + 1) % n];
        // Outward normals of the two edges meeting at `cur` (CCW polygon:
        // interior on the left, so outward is the right-hand normal).
        let na = edge_outward_normal(prev, cur);
        let nb = edge_outward_normal(cur, next);
        // Intersect the two displaced edge lines.
        let p1 = [
            prev[0] + clearance_mm * na[0],
            prev[1] + clearance_mm * na[1],
        ];
        let d1 = [cur[0] - prev[0], cur[1] - prev[1]];
        let p2 = [cur[0] + clearance_mm * nb[0], cur[1] + clearance_mm * nb[1]];
        let d2 = [next[0] - cur[0], next[1] - cur[1]];
        let denom = d1[0] * d2[1] - d1[1] * d2[0];
        if denom.abs() < 1e-12 {
            // Collinear neighbors: plain normal displacement.
            out.push([cur[0] + clearance_mm * na[0], cur[1] + clearance_mm * na[1]]);
        } else {
            let t = ((p2[0] - p1[0]) * d2[1] - (p2[1] - p1[1]) * d2[0]) / denom;
            out.push([p1[0] + t * d1[0], p1[1] + t * d1[1]]);
        }
    }
    Polygon2D::new(out)
}

fn edge_outward_normal(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = (dx * dx + dy * dy).sqrt();
    [dy / len, -dx / len]
}

/// Extra dilation applied to every cavity beyond its nominal clearance.
///
/// The insertability sweep anchors its 0.25 mm translation grid at centroid
/// alignment, and for asymmetric shapes the offset polygon's centroid shifts
/// relative to the peg's, so the exactly-nested placement is never on the
/// grid (worst miss: 0.25/sqrt(2) per axis ~= 0.177 mm). The pad keeps the
/// best on-grid margin strictly above the nominal clearance.
pub const CAVITY_NESTING_PAD_MM: f64 = 0.2;

/// Cavity footprint of a hole: the shape grown by its clearance plus the
/// nesting pad, re-centered on its own area centroid so a hole's pose is the
/// centroid its segmentation mask will localize.
pub fn make_hole_polygon(shape: &ShapeSpec, clearance_mm: f64) -> Result<Polygon2D, WorldGenError> {
    let poly = offset_polygon(&make_shape(shape)?, clearance_mm + CAVITY_NESTING_PAD_MM)?;
    let c = poly.area_centroid();
    Ok(poly.translated(-c[0], -c[1]))
}

/// One hole on the board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub shape: ShapeSpec,
    /// World-frame pose of the cavity (meters / degrees).
    pub pose: SE2Pose,
    pub clearance_mm: f64,
    pub depth_mm: f64,
}

/// Table clutter: a flat slab that produces a segmentation mask but is not a
/// hole, exercising the height filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterSpec {
    pub shape: ShapeSpec,
    pub pose: SE2Pose,
    pub height_mm: f64,
}

/// A synthetic board of holes plus the grasped peg, with ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub board_pose: SE2Pose,
    pub board_size_mm: (f64, f64),
    pub board_height_mm: f64,
    pub holes: Vec<HoleSpec>,
    #[serde(default)]
    pub clutter: Vec<ClutterSpec>,
    pub peg: ShapeSpec,
    /// Known pose of the grasped peg (task assumption; given, not estimated).
    pub peg_grasp_pose: SE2Pose,
    /// Index into `holes` of the unique mating hole.
    pub ground_truth_index: usize,
}

impl SyntheticWorld {
    /// Cavity polygon of hole `k` in world millimeters.
    pub fn cavity_polygon_mm(&self, k: usize) -> Result<Polygon2D, WorldGenError> {
        let hole = &self.holes[k];
        let poly = make_hole_polygon(&hole.shape, hole.clearance_mm)?;
        Ok(poly
            .rotated_about(hole.pose.yaw_deg(), [0.0, 0.0])
            .translated(hole.pose.x * 1000.0, hole.pose.y * 1000.0))
    }

    /// Peg footprint polygon at the grasp pose, world millimeters.
    pub fn peg_polygon_mm(&self) -> Result<Polygon2D, WorldGenError> {
        let poly = make_shape(&self.peg)?;
        Ok(poly
            .rotated_about(self.peg_grasp_pose.yaw_deg(), [0.0, 0.0])
            .translated(
                self.peg_grasp_pose.x * 1000.0,
                self.peg_grasp_pose.y * 1000.0,
            ))
    }

    /// Mating-hole height above table in meters: the cavity floor the depth
    /// camera sees through the opening.
    pub fn cavity_floor_z_m(&self, k: usize) -> f64 {
        (self.board_height_mm - self.holes[k].depth_mm) / 1000.0
    }
}

const BOARD_SIZE_MM: (f64, f64) = (250.0, 155.0);
const BOARD_HEIGHT_MM: f64 = 60.0;
const HOLE_DEPTH_MM: f64 = 8.0;
const PLACEMENT_GAP_MM: f64 = 8.0;
const PLACEMENT_TRIES: usize = 1000;
/// Board center in the world frame (meters); cameras are positioned above it.
const BOARD_CENTER_M: (f64, f64) = (0.30, 0.0);

fn shape_bound_radius(shape: &ShapeSpec) -> Result<f64, WorldGenError> {
    let poly = make_shape(shape)?;
    let mut r: f64 = 0.0;
    for [x, y] in poly.vertices() {
        r = r.max((x * x + y * y).sqrt());
    }
    Ok(r)
}

/// Places `shapes` on the board without overlap, yaws snapped to whole
/// degrees so the 1-degree oracle grid can certify fits exactly.
fn place_holes(
    shapes: &[ShapeSpec],
    clearance_mm: f64,
    depth_mm: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<HoleSpec>, WorldGenError> {
    let radii: Vec<f64> = shapes
        .iter()
        .map(shape_bound_radius)
        .collect::<Result<_, _>>()?;
    let (bw, bh) = BOARD_SIZE_MM;
    let mut placed: Vec<(f64, f64, f64)> = Vec::new(); // x_mm, y_mm, radius

    for (i, _) in shapes.iter().enumerate() {
        let r = radii[i] + clearance_mm;
        let mut ok = false;
        for _ in 0..PLACEMENT_TRIES {
            let margin = r + PLACEMENT_GAP_MM;
            if 2.0 * margin >= bw || 2.0 * margin >= bh {
                break;
            }
            let x = rng.gen_range(-(bw / 2.0 - margin)..(bw / 2.0 - margin));
            let y = rng.gen_range(-(bh / 2.0 - margin)..(bh / 2.0 - margin));
            let clear = placed.iter().all(|&(px, py, pr)| {
                ((px - x).powi(2) + (py - y).powi(2)).sqrt() > pr + r + PLACEMENT_GAP_MM
            });
            if clear {
                placed.push((x, y, r));
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(WorldGenError::PlacementFailure {
                placed: placed.len(),
                requested: shapes.len(),
                tries: PLACEMENT_TRIES,
            });
        }
    }

    Ok(shapes
        .iter()
        .zip(&placed)
        .map(|(shape, &(x, y, _))| HoleSpec {
            shape: shape.clone(),
            pose: SE2Pose::new(
                BOARD_CENTER_M.0 + x / 1000.0,
                BOARD_CENTER_M.1 + y / 1000.0,
                rng.gen_range(0..360) as f64,
            ),
            clearance_mm,
            depth_mm,
        })
        .collect())
}

fn sample_distractor_shape(rng: &mut ChaCha8Rng) -> ShapeSpec {
    match rng.gen_range(0..6) {
        0 => ShapeSpec::Rectangle {
            width_mm: rng.gen_range(8.0..30.0),
            height_mm: rng.gen_range(8.0..30.0),
        },
        1 => ShapeSpec::Trapezoid {
            base_mm: rng.gen_range(14.0..30.0),
            top_mm: rng.gen_range(6.0..12.0),
            height_mm: rng.gen_range(8.0..24.0),
        },
        2 => ShapeSpec::DShape {
            diameter_mm: rng.gen_range(10.0..30.0),
        },
        3 => ShapeSpec::Cross {
            length_mm: rng.gen_range(18.0..34.0),
            arm_mm: rng.gen_range(5.0..9.0),
        },
        4 => ShapeSpec::KeyedCircle {
            radius_mm: rng.gen_range(5.0..14.0),
            key_w_mm: rng.gen_range(2.0..4.0),
            key_h_mm: rng.gen_range(2.0..4.0),
        },
        _ => ShapeSpec::LShape {
            width_mm: rng.gen_range(14.0..30.0),
            height_mm: rng.gen_range(14.0..30.0),
            thickness_mm: rng.gen_range(4.0..8.0),
        },
    }
}

/// Generates a board with the peg's mating hole plus `distractors` holes that
/// are oracle-verified not to admit the peg at the given clearance.
/// Deterministic for a fixed seed.
pub fn make_board(
    peg: &ShapeSpec,
    distractors: usize,
    clearance_mm: f64,
    seed: u64,
) -> Result<SyntheticWorld, WorldGenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let peg_poly = make_shape(peg)?;

    let mut shapes: Vec<ShapeSpec> = Vec::with_capacity(distractors + 1);
    let gt_index = if distractors == 0 {
        0
    } else {
        rng.gen_range(0..=distractors)
    };
    let mut tries = 0;
    while shapes.len() < distractors + 1 {
        if shapes.len() == gt_index {
            shapes.push(peg.clone());
            continue;
        }
        tries += 1;
        if tries > PLACEMENT_TRIES {
            return Err(WorldGenError::PlacementFailure {
                placed: shapes.len(),
                requested: distractors + 1,
                tries,
            });
        }
        let candidate = sample_distractor_shape(&mut rng);
        let cavity = make_hole_polygon(&candidate, clearance_mm)?;
        if !insertability(&peg_poly, &cavity, clearance_mm)?.fits {
            shapes.push(candidate);
        }
    }

    let holes = place_holes(&shapes, clearance_mm, HOLE_DEPTH_MM, &mut rng)?;
    let world = SyntheticWorld {
        board_pose: SE2Pose::new(BOARD_CENTER_M.0, BOARD_CENTER_M.1, 0.0),
        board_size_mm: BOARD_SIZE_MM,
        board_height_mm: BOARD_HEIGHT_MM,
        holes,
        clutter: Vec::new(),
        peg: peg.clone(),
        peg_grasp_pose: SE2Pose::new(0.0, 0.0, 0.0),
        ground_truth_index: gt_index,
    };
    verify_unique_mating(&world, clearance_mm)?;
    Ok(world)
}

/// Re-verifies that exactly the ground-truth hole admits the peg.
pub fn verify_unique_mating(
    world: &SyntheticWorld,
    clearance_mm: f64,
) -> Result<(), WorldGenError> {
    let peg_poly = make_shape(&world.peg)?;
    for (k, hole) in world.holes.iter().enumerate() {
        let cavity = make_hole_polygon(&hole.shape, hole.clearance_mm)?;
        let fits = insertability(&peg_poly, &cavity, clearance_mm)?.fits;
        if fits != (k == world.ground_truth_index) {
            return Err(WorldGenError::PlacementFailure {
                placed: k,
                requested: world.holes.len(),
                tries: 0,
            });
        }
    }
    Ok(())
}

/// Adds table clutter (flat slabs outside the board footprint) to a world.
pub fn add_clutter(world: &mut SyntheticWorld, count: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC1_07_7E_5u64);
    for _ in 0..count {
        let shape = ShapeSpec::Rectangle {
            width_mm: rng.gen_range(15.0..35.0),
            height_mm: rng.gen_range(15.0..35.0),
        };
        // South of the board, on the table.
        let x = BOARD_CENTER_M.0 + rng.gen_range(-0.10..0.10);
        let y = BOARD_CENTER_M.1 - world.board_size_mm.1 / 2000.0 - rng.gen_range(0.025..0.055);
        world.clutter.push(ClutterSpec {
            shape,
            pose: SE2Pose::new(x, y, rng.gen_range(0..360) as f64),
            height_mm: rng.gen_range(3.0..12.0),
        });
    }
}

/// Builds the end-to-end evaluation batch: `n_boards` hole layouts, each
/// containing one mating hole per peg, expanded into one world per
/// (board, peg) pair. Pairwise mating uniqueness is certified once at the
/// shape level.
pub fn evaluation_batch(
    pegs: &[ShapeSpec],
    n_boards: usize,
    clearance_mm: f64,
    seed: u64,
) -> Result<Vec<SyntheticWorld>, WorldGenError> {
    // Shape-level certification: peg i fits exactly hole i.
    for (i, peg) in pegs.iter().enumerate() {
        let peg_poly = make_shape(peg)?;
        for (j, other) in pegs.iter().enumerate() {
            let cavity = make_hole_polygon(other, clearance_mm)?;
            let fits = insertability(&peg_poly, &cavity, clearance_mm)?.fits;
            if fits != (i == j) {
                return Err(WorldGenError::InvalidDimensions {
                    family: "evaluation_batch",
                    reason: format!(
                        "peg {i} ({}) vs hole {j} ({}): fits={fits}",
                        peg.label(),
                        other.label()
                    ),
                });
            }
        }
    }

    let mut worlds = Vec::with_capacity(n_boards * pegs.len());
    for b in 0..n_boards {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64));
        let holes = place_holes(pegs, clearance_mm, HOLE_DEPTH_MM, &mut rng)?;
        for (p, peg) in pegs.iter().enumerate() {
            worlds.push(SyntheticWorld {
                board_pose: SE2Pose::new(BOARD_CENTER_M.0, BOARD_CENTER_M.1, 0.0),
                board_size_mm: BOARD_SIZE_MM,
                board_height_mm: BOARD_HEIGHT_MM,
                holes: holes.clone(),
                clutter: Vec::new(),
                peg: peg.clone(),
                peg_grasp_pose: SE2Pose::new(0.0, 0.0, 0.0),
                ground_truth_index: p,
            });
        }
    }
    Ok(worlds)
}

/// Five connector-like pegs with mutually exclusive mating holes at 0.5 mm
/// clearance; the synthetic stand-in for a panel of distinct ports.
///
/// All five have axis-aligned minimum bounding rectangles at yaw zero (flat
/// dominant edges), which the yaw-canonicalization stage relies on. Keyed
/// circles and plus-crosses are excluded here: their minimum rectangles sit
/// diagonal to the key/arms, which breaks that assumption.
pub fn standard_peg_set() -> Vec<ShapeSpec> {
    vec![
        ShapeSpec::Trapezoid {
            base_mm: 22.0,
            top_mm: 12.0,
            height_mm: 12.0,
        },
        ShapeSpec::DShape { diameter_mm: 24.0 },
        ShapeSpec::Rectangle {
            width_mm: 16.0,
            height_mm: 16.0,
        },
        ShapeSpec::LShape {
            width_mm: 24.0,
            height_mm: 24.0,
            thickness_mm: 8.0,
        },
        ShapeSpec::Rectangle {
            width_mm: 28.0,
            height_mm: 9.0,
        },
    ]
}
