//! Spiral-search insertion: an Archimedean spiral of contact waypoints
//! absorbs residual SE(2) error within its coverage radius.
//!
//! Run with: cargo run --release --example spiral_insert

use pegmate::geometry::SE2Pose;
use pegmate::insertion::{simulate_attempt, spiral_waypoints, ContactWorld, SpiralParams};
use pegmate::worldgen::{make_board, ShapeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SpiralParams::default();
    let waypoints = spiral_waypoints(&params);
    let last = waypoints.last().unwrap();
    println!(
        "spiral: {} waypoints, {} rotations to radius {:.2} mm (pitch {:.2} mm)",
        waypoints.len(),
        params.rotations,
        (last[0] * last[0] + last[1] * last[1]).sqrt(),
        params.max_radius_mm / params.rotations as f64
    );

    let world = make_board(&ShapeSpec::DShape { diameter_mm: 20.0 }, 1, 0.5, 14)?;
    let contact = ContactWorld::new(world.clone(), 0.4, 2.0);
    let gt = world.ground_truth_index;
    let truth = world.holes[gt].pose;

    println!("\nlateral error sweep (yaw exact):");
    for err_mm in [0.0, 1.0, 2.5, 4.0, 4.6, 6.0] {
        let est = SE2Pose::new(truth.x + err_mm / 1000.0, truth.y, truth.yaw_deg());
        let o = simulate_attempt(&contact, &est, gt, &params);
        println!(
            "  {err_mm:>4.1} mm: success={} after {:>3} waypoints ({:?})",
            o.success, o.waypoints_used, o.failure_mode
        );
    }

    println!("\nyaw error with perfect position (D-shape is asymmetric):");
    for yaw_err in [0.0, 1.5, 90.0, 180.0] {
        let est = SE2Pose::new(truth.x, truth.y, truth.yaw_deg() + yaw_err);
        let o = simulate_attempt(&contact, &est, gt, &params);
        println!(
            "  {yaw_err:>5.1} deg: success={} ({:?})",
            o.success, o.failure_mode
        );
    }

    let wrong = (gt + 1) % world.holes.len();
    let o = simulate_attempt(&contact, &world.holes[wrong].pose.clone(), wrong, &params);
    println!(
        "\ntargeting the distractor hole: success={} ({:?})",
        o.success, o.failure_mode
    );
    Ok(())
}
