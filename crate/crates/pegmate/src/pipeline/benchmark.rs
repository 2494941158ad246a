//! Certified benchmark datasets: shape sets whose mating structure is
//! oracle-verified at generation time, and the engineered multi-Yes set that
//! separates probability ranking from bare yes/no output.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetEntry, MatchingDataset, PipelineError};
use crate::geometry::insertability;
use crate::worldgen::{make_hole_polygon, make_shape, ShapeSpec, WorldGenError};

fn sample_candidate(rng: &mut ChaCha8Rng) -> ShapeSpec {
    match rng.gen_range(0..6) {
        0 => ShapeSpec::Rectangle {
            width_mm: rng.gen_range(8.0..36.0),
            height_mm: rng.gen_range(6.0..20.0),
        },
        1 => ShapeSpec::Trapezoid {
            base_mm: rng.gen_range(14.0..34.0),
            top_mm: rng.gen_range(6.0..13.0),
            height_mm: rng.gen_range(8.0..22.0),
        },
        2 => ShapeSpec::DShape {
            diameter_mm: rng.gen_range(10.0..32.0),
        },
        3 => ShapeSpec::Cross {
            length_mm: rng.gen_range(16.0..36.0),
            arm_mm: rng.gen_range(5.0..10.0),
        },
        4 => ShapeSpec::KeyedCircle {
            radius_mm: rng.gen_range(5.0..15.0),
            key_w_mm: rng.gen_range(2.0..4.5),
            key_h_mm: rng.gen_range(2.0..4.5),
        },
        _ => ShapeSpec::LShape {
            width_mm: rng.gen_range(14.0..32.0),
            height_mm: rng.gen_range(14.0..32.0),
            thickness_mm: rng.gen_range(4.0..9.0),
        },
    }
}

/// Generates `n` peg/hole pairs such that each peg fits exactly its own hole
/// at the given clearance and every cross-pair margin sits at least
/// `separation_mm` below the clearance. Deterministic for a fixed seed.
pub fn certified_benchmark(
    n: usize,
    clearance_mm: f64,
    separation_mm: f64,
    seed: u64,
) -> Result<MatchingDataset, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted: Vec<ShapeSpec> = Vec::with_capacity(n);
    let mut tries = 0usize;
    let max_tries = 400;

    'outer: while accepted.len() < n {
        tries += 1;
        if tries > max_tries {
            return Err(PipelineError::WorldGen(WorldGenError::PlacementFailure {
                placed: accepted.len(),
                requested: n,
                tries,
            }));
        }
        let candidate = sample_candidate(&mut rng);
        let Ok(cand_peg) = make_shape(&candidate) else {
            continue;
        };
        let Ok(cand_hole) = make_hole_polygon(&candidate, clearance_mm) else {
            continue;
        };
        // Must admit itself through the quantized sweep.
        if !insertability(&cand_peg, &cand_hole, clearance_mm)?.fits {
            continue;
        }
        // Cross margins against everything already accepted, both directions.
        for other in &accepted {
            let other_peg = make_shape(other)?;
            let other_hole = make_hole_polygon(other, clearance_mm)?;
            let a = insertability(&cand_peg, &other_hole, clearance_mm)?;
            let b = insertability(&other_peg, &cand_hole, clearance_mm)?;
            if a.margin_mm > clearance_mm - separation_mm
                || b.margin_mm > clearance_mm - separation_mm
            {
                continue 'outer;
            }
        }
        accepted.push(candidate);
    }

    Ok(MatchingDataset {
        entries: accepted
            .into_iter()
            .map(|s| DatasetEntry {
                peg: s.clone(),
                hole_shape: s,
                clearance_mm,
            })
            .collect(),
    })
}

/// Six-row dataset where half the rows carry a second, tighter admitting
/// hole at a *smaller* column index: probability ranking still prefers the
/// true (roomier) mating hole, while bare yes/no output goes ambiguous and
/// the index-order fallback picks the wrong one.
pub fn multi_yes_dataset() -> MatchingDataset {
    let clearance = 0.3;
    // Each (cross, rectangle) pair is sized so the rectangle peg also fits
    // the cross's cavity, but with ~0.35 mm of margin against the
    // rectangle's own ~0.5 mm. Widths grow while heights shrink across the
    // pairs so no peg fits a cavity from another pair at any yaw; the plus
    // shape admits tilted near-square pegs, so heights stay well under the
    // sqrt(2) diagonal bound of every other arm.
    let rect_dims = [(16.0, 12.0), (26.0, 9.0), (40.0, 5.5)];
    let mut entries = Vec::new();
    for (rect_w, rect_h) in rect_dims {
        // Cross arm sized so the rect fits its cavity with 0.35 mm margin:
        // cavity arm = arm + 2*(clearance + pad) must equal rect_h + 0.7.
        let arm = rect_h + 0.7 - 2.0 * (clearance + crate::worldgen::CAVITY_NESTING_PAD_MM);
        let length = rect_w + 3.0;
        entries.push(DatasetEntry {
            peg: ShapeSpec::Cross {
                length_mm: length,
                arm_mm: arm,
            },
            hole_shape: ShapeSpec::Cross {
                length_mm: length,
                arm_mm: arm,
            },
            clearance_mm: clearance,
        });
        entries.push(DatasetEntry {
            peg: ShapeSpec::Rectangle {
                width_mm: rect_w,
                height_mm: rect_h,
            },
            hole_shape: ShapeSpec::Rectangle {
                width_mm: rect_w,
                height_mm: rect_h,
            },
            clearance_mm: clearance,
        });
    }
    MatchingDataset { entries }
}
