//! Spiral-search insertion against the synthetic world.
//!
//! The stiffness controller's compliant contact is reduced to a capture
//! funnel: the approach descends to the estimated position, reads the
//! contact force threshold while misaligned, and walks an Archimedean
//! spiral of waypoints until the residual offset falls inside the funnel
//! over the true mating hole.

use serde::{Deserialize, Serialize};

use crate::geometry::SE2Pose;
use crate::worldgen::SyntheticWorld;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams {
    pub max_radius_mm: f64,
    pub rotations: u32,
    pub waypoint_arc_mm: f64,
    pub approach_offset_mm: f64,
    pub contact_force_threshold_n: f64,
}

impl Default for SpiralParams {
    fn default() -> Self {
        Self {
            max_radius_mm: 5.0,
            rotations: 10,
            waypoint_arc_mm: 0.25,
            approach_offset_mm: 3.0,
            contact_force_threshold_n: 1.0,
        }
    }
}

/// The simulation substrate: a world plus the compliance capture region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactWorld {
    pub world: SyntheticWorld,
    /// Lateral capture radius of the chamfer/compliance, millimeters.
    pub success_funnel_xy_mm: f64,
    /// Yaw tolerance, degrees, folded by the hole's rotational symmetry.
    pub success_funnel_yaw_deg: f64,
    /// Board-top height, meters.
    pub surface_z_m: f64,
}

impl ContactWorld {
    pub fn new(world: SyntheticWorld, funnel_xy_mm: f64, funnel_yaw_deg: f64) -> Self {
        let surface_z_m = world.board_height_mm / 1000.0;
        Self {
            world,
            success_funnel_xy_mm: funnel_xy_mm,
            success_funnel_yaw_deg: funnel_yaw_deg,
            surface_z_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    None,
    /// The spiral never covered the lateral offset.
    OutOfReach,
    /// Position was covered but the yaw never admitted the peg.
    YawMismatch,
    /// The targeted hole is not the mating hole.
    WrongHole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsertionOutcome {
    pub success: bool,
    pub waypoints_used: usize,
    /// Residual offset to the targeted hole's center at termination, mm.
    pub final_offset_mm: [f64; 2],
    pub failure_mode: FailureMode,
}

/// Waypoint offsets (millimeters, relative to the commanded center) along an
/// Archimedean spiral `r = c * phi` with `c = max_radius / (2 pi rotations)`,
/// sampled at constant arc length. Yaw is held fixed throughout the search.
pub fn spiral_waypoints(params: &SpiralParams) -> Vec<[f64; 2]> {
    let c = params.max_radius_mm / (std::f64::consts::TAU * params.rotations as f64);
    let mut out = vec![[0.0, 0.0]];
    let mut phi = 0.0f64;
    loop {
        let r = c * phi;
        let dphi = params.waypoint_arc_mm / (c * c + r * r).sqrt();
        phi += dphi;
        let r = c * phi;
        if r > params.max_radius_mm {
            break;
        }
        out.push([r * phi.cos(), r * phi.sin()]);
    }
    out
}

fn yaw_error_folded(estimate_deg: f64, truth_deg: f64, symmetry_period_deg: f64) -> f64 {
    if symmetry_period_deg <= 0.0 {
        return 0.0;
    }
    let d = (estimate_deg - truth_deg).rem_euclid(symmetry_period_deg);
    d.min(symmetry_period_deg - d)
}

/// Simulates one insertion attempt: approach the estimate, then walk the
/// spiral. Success requires some waypoint to land within the lateral funnel
/// of the true mating hole with the yaw inside the (symmetry-folded) yaw
/// funnel; targeting any other hole exhausts the spiral in contact.
pub fn simulate_attempt(
    contact: &ContactWorld,
    estimate: &SE2Pose,
    target_hole_index: usize,
    params: &SpiralParams,
) -> InsertionOutcome {
    let target = &contact.world.holes[target_hole_index];
    let target_center_mm = [target.pose.x * 1000.0, target.pose.y * 1000.0];
    let est_mm = [estimate.x * 1000.0, estimate.y * 1000.0];
    let is_mating = target_hole_index == contact.world.ground_truth_index;

    let yaw_ok = yaw_error_folded(
        estimate.yaw_deg(),
        target.pose.yaw_deg(),
        target.shape.rotational_symmetry_deg(),
    ) <= contact.success_funnel_yaw_deg;

    let waypoints = spiral_waypoints(params);
    let mut best_d = f64::INFINITY;
    let mut last_offset = [0.0, 0.0];
    for (i, w) in waypoints.iter().enumerate() {
        let pos = [est_mm[0] + w[0], est_mm[1] + w[1]];
        let offset = [pos[0] - target_center_mm[0], pos[1] - target_center_mm[1]];
        let d = (offset[0] * offset[0] + offset[1] * offset[1]).sqrt();
        best_d = best_d.min(d);
        last_offset = offset;
        if d <= contact.success_funnel_xy_mm && yaw_ok && is_mating {
            return InsertionOutcome {
                success: true,
                waypoints_used: i + 1,
                final_offset_mm: offset,
                failure_mode: FailureMode::None,
            };
        }
    }

    let failure_mode = if !is_mating {
        FailureMode::WrongHole
    } else if best_d > contact.success_funnel_xy_mm {
        FailureMode::OutOfReach
    } else {
        FailureMode::YawMismatch
    };
    InsertionOutcome {
        success: false,
        waypoints_used: waypoints.len(),
        final_offset_mm: last_offset,
        failure_mode,
    }
}
