//! Detect candidate holes: load a scene, lift each instance mask into a
//! world-frame point cloud, and filter by mean height to drop table clutter.
//!
//! Run with: cargo run --release --example detect_holes

use pegmate::detection::{detect_candidates, filter_by_height, Z_THRESHOLD_M};
use pegmate::scene::SegmentTruth;
use pegmate::worldgen::{add_clutter, make_board, render_world, RenderConfig, ShapeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let peg = ShapeSpec::Trapezoid {
        base_mm: 22.0,
        top_mm: 12.0,
        height_mm: 12.0,
    };
    let mut world = make_board(&peg, 3, 0.5, 7)?;
    add_clutter(&mut world, 2, 7);
    let scene = render_world(&world, &RenderConfig::default())?;

    let all = detect_candidates(&scene, 16)?;
    println!("{} segments lifted to point clouds:", all.len());
    for c in &all {
        let kind = match c.truth {
            SegmentTruth::Hole { hole_index } => format!("hole {hole_index}"),
            SegmentTruth::Clutter => "clutter".to_string(),
        };
        println!(
            "  segment {}: {} points, z mean {:.1} mm ({kind})",
            c.index,
            c.cloud.len(),
            c.centroid.z * 1000.0
        );
    }

    let retained = filter_by_height(all, Z_THRESHOLD_M);
    println!(
        "\nheight filter at {} mm keeps {} candidate(s):",
        Z_THRESHOLD_M * 1000.0,
        retained.len()
    );
    for c in &retained {
        println!(
            "  segment {}: centroid ({:.4}, {:.4}) m, crop {}x{} px",
            c.index, c.centroid.x, c.centroid.y, c.crops["top"].width, c.crops["top"].height
        );
    }
    Ok(())
}
