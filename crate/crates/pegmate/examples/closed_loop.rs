//! The full closed loop with fault injection: detection, identification,
//! SE(2) estimation, and insertion, retrying down the rankings when an
//! attempt fails.
//!
//! Run with: cargo run --release --example closed_loop

use pegmate::matcher::OracleBackend;
use pegmate::pipeline::{run_e2e, PipelineConfig};
use pegmate::worldgen::{evaluation_batch, standard_peg_set};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pegs = standard_peg_set();
    let worlds = evaluation_batch(&pegs, 12, 0.5, 2024)?;
    println!(
        "{} trials: {} board layouts x {} pegs",
        worlds.len(),
        12,
        pegs.len()
    );

    let mut cfg = PipelineConfig::default();
    cfg.seed = 2024;
    // Imperfect segmentation and occasional yaw flips, so retries matter.
    cfg.render.noise.centroid_bias_mm = 1.5;
    cfg.yaw_flip_prob = 0.15;

    let results = run_e2e(&worlds, &cfg, &OracleBackend::new())?;
    println!(
        "\nfirst attempt: {}/{} ({:.1}%)",
        results.first_attempt_successes,
        results.n_trials,
        100.0 * results.first_attempt_rate()
    );
    println!(
        "with retries (N_ID = {}, N_SE2 = {}): {}/{} ({:.1}%)",
        cfg.n_id_retries,
        cfg.n_se2_retries,
        results.with_retry_successes,
        results.n_trials,
        100.0 * results.with_retry_rate()
    );
    if !results.failure_modes.is_empty() {
        println!("remaining failures: {:?}", results.failure_modes);
    }
    println!("\nper peg:");
    for (peg, stats) in &results.per_peg {
        println!(
            "  {:<22} first {}/{}  retry {}/{}",
            peg,
            stats.first_attempt_successes,
            stats.trials,
            stats.with_retry_successes,
            stats.trials
        );
    }
    Ok(())
}
