//! Estimate a hole's SE(2) pose: canonicalize the crop so its bounding
//! rectangle is axis-aligned, classify among the four 90-degree rotations,
//! and compose theta_yaw = theta_rotate + theta; position comes from the
//! cloud centroid.
//!
//! Run with: cargo run --release --example estimate_pose

use pegmate::detection::{detect_candidates, filter_by_height, Z_THRESHOLD_M};
use pegmate::geometry::SE2Pose;
use pegmate::matcher::OracleBackend;
use pegmate::pose::{canonicalize, estimate_yaw, four_rotations, YawGeometry, YawQueryContext};
use pegmate::worldgen::{make_board, render_world, RenderConfig, ShapeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let peg = ShapeSpec::DShape { diameter_mm: 26.0 };
    let mut world = make_board(&peg, 0, 0.5, 3)?;
    // Pin a ground-truth yaw so the printout is easy to follow.
    let p = world.holes[0].pose;
    world.holes[0].pose = SE2Pose::new(p.x, p.y, 205.0);

    let scene = render_world(&world, &RenderConfig::default())?;
    let candidates = filter_by_height(detect_candidates(&scene, 16)?, Z_THRESHOLD_M);
    let cand = &candidates[0];

    let rect = cand.crop_rects["top"];
    let canonical = canonicalize(&cand.crops["top"], &cand.masks["top"].crop(rect))?;
    println!(
        "canonicalization: theta = {:.2} deg (bounding rect {:.1} x {:.1} px)",
        canonical.theta_deg,
        canonical.rect.half_extents.0 * 2.0,
        canonical.rect.half_extents.1 * 2.0
    );
    for view in four_rotations(&canonical) {
        println!(
            "  rotation {:>3} deg: {}x{} canvas",
            view.rotation_deg, view.image.width, view.image.height
        );
    }

    let ctx = YawQueryContext {
        peg_image_png: Some(scene.peg_views["top"].to_png()),
        geometry: Some(YawGeometry {
            peg: world.peg_polygon_mm()?,
            cavity: world.cavity_polygon_mm(0)?,
            clearance_mm: 0.5,
        }),
    };
    let est = estimate_yaw(&ctx, &canonical, &OracleBackend::new())?;
    println!("\nfour-rotation ranking:");
    for (rot, resp) in &est.ranking {
        println!(
            "  {:>3} deg: {:?} p = {:.4}",
            rot, resp.verdict, resp.probability
        );
    }
    println!(
        "\ntheta_yaw = {} + {:.2} = {:.2} deg (ground truth {:.2})",
        est.theta_rotate_deg,
        est.theta_deg,
        est.theta_yaw_deg,
        world.holes[0].pose.yaw_deg()
    );
    println!(
        "position from centroid: ({:.4}, {:.4}) m (ground truth ({:.4}, {:.4}))",
        cand.centroid.x, cand.centroid.y, world.holes[0].pose.x, world.holes[0].pose.y
    );
    Ok(())
}
