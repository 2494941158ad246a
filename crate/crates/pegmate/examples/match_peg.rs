//! Identify the mating hole: query the backend once per candidate and rank
//! by verdict and generation probability (Yes descending, then No ascending
//! so the least-confident rejections are reconsidered first).
//!
//! Run with: cargo run --release --example match_peg

use pegmate::detection::{detect_candidates, filter_by_height, Z_THRESHOLD_M};
use pegmate::matcher::{match_hole, OracleBackend};
use pegmate::pipeline::scene_candidate_queries;
use pegmate::worldgen::{make_board, render_world, RenderConfig, ShapeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let peg = ShapeSpec::LShape {
        width_mm: 24.0,
        height_mm: 24.0,
        thickness_mm: 8.0,
    };
    let world = make_board(&peg, 4, 0.5, 99)?;
    let scene = render_world(&world, &RenderConfig::default())?;
    let candidates = filter_by_height(detect_candidates(&scene, 16)?, Z_THRESHOLD_M);

    let queries = scene_candidate_queries(&scene, &candidates, Default::default())?;
    let outcome = match_hole(&queries, &OracleBackend::new())?;

    println!("peg: {}", world.peg.display_name());
    for (i, r) in &outcome.responses {
        println!(
            "  candidate {i} ({}): {:?} with p = {:.4}",
            world.holes[*i].shape.display_name(),
            r.verdict,
            r.probability
        );
    }
    println!("ranking (best first): {:?}", outcome.ranking);
    println!(
        "selected hole {} -- ground truth is {}",
        outcome.selected().unwrap(),
        world.ground_truth_index
    );
    Ok(())
}
