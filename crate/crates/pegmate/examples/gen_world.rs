//! Generate a synthetic board with distractor holes and table clutter, then
//! render it into the scene directory format.
//!
//! Run with: cargo run --release --example gen_world

use pegmate::worldgen::{add_clutter, make_board, render_world, RenderConfig, ShapeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let peg = ShapeSpec::DShape { diameter_mm: 24.0 };
    let mut world = make_board(&peg, 4, 0.5, 42)?;
    add_clutter(&mut world, 2, 42);

    println!("peg: {}", world.peg.display_name());
    println!(
        "board: {:?} mm, {} mm tall",
        world.board_size_mm, world.board_height_mm
    );
    for (k, hole) in world.holes.iter().enumerate() {
        let marker = if k == world.ground_truth_index {
            " <- mating"
        } else {
            ""
        };
        println!(
            "  hole {k}: {} at ({:.3}, {:.3}) m yaw {:.0} deg, clearance {} mm{marker}",
            hole.shape.display_name(),
            hole.pose.x,
            hole.pose.y,
            hole.pose.yaw_deg(),
            hole.clearance_mm,
        );
    }

    let scene = render_world(&world, &RenderConfig::default())?;
    let dir = std::env::temp_dir().join("pegmate-example-scene");
    scene.write(&dir)?;
    println!(
        "scene written to {} ({} masks, depth {}x{})",
        dir.display(),
        scene.masks.len(),
        scene.depth.width,
        scene.depth.height
    );
    Ok(())
}
