//! Closed-loop orchestration: detection, identification, SE(2) pose, and
//! insertion, with ranked retries for identification and yaw, plus the
//! experiment harnesses and report emission.

mod benchmark;
mod experiment;
mod report;

pub use benchmark::{certified_benchmark, multi_yes_dataset};
pub use experiment::{
    run_ablation, run_matching_experiment, AblationReport, AblationRow, CellRecord,
    ConfusionMatrix, DatasetEntry, MatchingDataset, MatchingResults, RowRecord,
};
pub use report::{
    emit_ablation_report, emit_e2e_report, emit_matching_report, render_confusion_svg,
    render_success_bars_svg, Manifest,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{detect_candidates, filter_by_height, HoleCandidate, SceneError};
use crate::geometry::SE2Pose;
use crate::insertion::{
    simulate_attempt, ContactWorld, FailureMode, InsertionOutcome, SpiralParams,
};
use crate::matcher::{
    build_prompt, match_hole, CandidateQuery, Fidelity, GeometryQuery, InputStrategy, MatchError,
    MatchQuery, MatchVerdict, MatcherBackend,
};
use crate::pose::{
    canonicalize, estimate_yaw, PoseError, YawEstimate, YawGeometry, YawQueryContext,
};
use crate::scene::{Scene, SegmentTruth, ANGLED_VIEW, TOP_VIEW};
use crate::worldgen::{render_world, RenderConfig, SyntheticWorld, WorldGenError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error(transparent)]
    WorldGen(#[from] WorldGenError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// How the identification and yaw retry budgets interleave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetryNesting {
    /// Yaw retries run inside each identification attempt (pose errors are
    /// corrected before abandoning a hole).
    #[default]
    Nested,
    /// Attempts ordered by total rank: (0,0), (1,0), (0,1), (1,1), ...
    Flat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Total identification attempts (1 disables identification retry).
    pub n_id_retries: usize,
    /// Total yaw attempts per identification.
    pub n_se2_retries: usize,
    pub strategy: InputStrategy,
    pub z_threshold_m: f64,
    pub crop_margin_px: u32,
    pub spiral: SpiralParams,
    pub funnel_xy_mm: f64,
    pub funnel_yaw_deg: f64,
    pub render: RenderConfig,
    pub seed: u64,
    /// Fault injection: probability of swapping the top two yaw rotations.
    pub yaw_flip_prob: f64,
    pub retry_nesting: RetryNesting,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_id_retries: 2,
            n_se2_retries: 2,
            strategy: InputStrategy::TwoView,
            z_threshold_m: crate::detection::Z_THRESHOLD_M,
            crop_margin_px: crate::detection::CROP_MARGIN_PX,
            spiral: SpiralParams::default(),
            funnel_xy_mm: 0.4,
            funnel_yaw_deg: 2.0,
            render: RenderConfig::default(),
            seed: 0,
            yaw_flip_prob: 0.0,
            retry_nesting: RetryNesting::Nested,
        }
    }
}

// ── Attempt log ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub segment_index: usize,
    pub centroid_m: [f64; 3],
    pub z_mean_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseSummary {
    pub segment_index: usize,
    pub verdict: MatchVerdict,
    pub probability: f64,
    pub fidelity: Fidelity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub id_rank: usize,
    pub yaw_rank: usize,
    pub segment_index: usize,
    pub hole_index: Option<usize>,
    pub estimate: Option<SE2Pose>,
    pub yaw_ranking: Vec<(u32, MatchVerdict, f64)>,
    pub outcome: Option<InsertionOutcome>,
    pub error: Option<String>,
}

/// Full, replayable record of one trial. Timings are wall-clock and are the
/// one non-deterministic field; report emission leaves them out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub peg: String,
    pub world_digest: String,
    pub ground_truth_hole: usize,
    pub candidates: Vec<CandidateSummary>,
    pub ranking: Vec<usize>,
    pub responses: Vec<ResponseSummary>,
    pub ambiguous: bool,
    pub match_failures: Vec<(usize, String)>,
    pub attempts: Vec<AttemptRecord>,
    pub first_attempt_success: bool,
    pub with_retry_success: bool,
    pub final_failure: Option<FailureMode>,
    pub error: Option<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PegStats {
    pub trials: usize,
    pub first_attempt_successes: usize,
    pub with_retry_successes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct E2eResults {
    pub n_trials: usize,
    pub first_attempt_successes: usize,
    pub with_retry_successes: usize,
    pub failure_modes: BTreeMap<String, usize>,
    pub per_peg: BTreeMap<String, PegStats>,
    pub trials: Vec<TrialRecord>,
}

impl E2eResults {
    pub fn first_attempt_rate(&self) -> f64 {
        self.first_attempt_successes as f64 / self.n_trials.max(1) as f64
    }
    pub fn with_retry_rate(&self) -> f64 {
        self.with_retry_successes as f64 / self.n_trials.max(1) as f64
    }
}

fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    // splitmix64 over the packed inputs.
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_of<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("serializable"))
}

// ── Query assembly ──────────────────────────────────────────────────────────

fn strategy_view_names(strategy: InputStrategy) -> Vec<&'static str> {
    match strategy {
        InputStrategy::TwoView | InputStrategy::NoProbability | InputStrategy::Name => {
            vec![TOP_VIEW, ANGLED_VIEW]
        }
        InputStrategy::CrossSectionalOnly => vec![TOP_VIEW],
        InputStrategy::AngledOnly => vec![ANGLED_VIEW],
        // The synthetic scenes have two cameras; the third view repeats the
        // top-down crop, mirroring the redundant-information ablation.
        InputStrategy::ThreeView => vec![TOP_VIEW, ANGLED_VIEW, TOP_VIEW],
    }
}

/// Builds one matcher query per candidate from a scene: prompt images from
/// the peg views and candidate crops, oracle geometry from the scene's
/// ground-truth shapes.
pub fn scene_candidate_queries(
    scene: &Scene,
    candidates: &[HoleCandidate],
    strategy: InputStrategy,
) -> Result<Vec<CandidateQuery>, PipelineError> {
    let world = &scene.meta.world;
    let peg_poly = world.peg_polygon_mm()?;
    let views = strategy_view_names(strategy);
    let peg_images: Vec<Vec<u8>> = views.iter().map(|v| scene.peg_views[*v].to_png()).collect();

    let mut queries = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let hole_images: Vec<Vec<u8>> = views
            .iter()
            .map(|v| {
                cand.crops
                    .get(*v)
                    .map(|img| img.to_png())
                    .unwrap_or_else(|| scene.views[*v].to_png())
            })
            .collect();
        let prompt = build_prompt(&peg_images, &hole_images, strategy)?;
        let geometry = match cand.truth {
            SegmentTruth::Hole { hole_index } => {
                let hole = &world.holes[hole_index];
                Some(GeometryQuery {
                    peg: peg_poly.clone(),
                    hole: world.cavity_polygon_mm(hole_index)?,
                    clearance_mm: hole.clearance_mm,
                    peg_label: world.peg.label().to_string(),
                    hole_label: hole.shape.label().to_string(),
                    orientation_locked: false,
                })
            }
            SegmentTruth::Clutter => None,
        };
        queries.push(CandidateQuery {
            index: cand.index,
            query: MatchQuery { prompt, geometry },
        });
    }
    Ok(queries)
}

// ── Closed loop ─────────────────────────────────────────────────────────────

fn run_trial(
    trial_index: usize,
    world: &SyntheticWorld,
    cfg: &PipelineConfig,
    backend: &dyn MatcherBackend,
) -> TrialRecord {
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut record = TrialRecord {
        trial_index,
        peg: world.peg.display_name(),
        world_digest: digest_of(world),
        ground_truth_hole: world.ground_truth_index,
        candidates: Vec::new(),
        ranking: Vec::new(),
        responses: Vec::new(),
        ambiguous: false,
        match_failures: Vec::new(),
        attempts: Vec::new(),
        first_attempt_success: false,
        with_retry_success: false,
        final_failure: None,
        error: None,
        timings_ms: BTreeMap::new(),
    };

    let total_start = Instant::now();
    let result = (|| -> Result<(), PipelineError> {
        // Render with a per-trial noise stream.
        let mut render_cfg = cfg.render;
        render_cfg.noise.seed = mix_seed(cfg.seed, trial_index as u64, 0x5EED);
        let t0 = Instant::now();
        let scene = render_world(world, &render_cfg)?;
        let candidates = filter_by_height(
            detect_candidates(&scene, cfg.crop_margin_px)?,
            cfg.z_threshold_m,
        );
        timings.insert("detect_ms".into(), t0.elapsed().as_secs_f64() * 1e3);
        record.candidates = candidates
            .iter()
            .map(|c| CandidateSummary {
                segment_index: c.index,
                centroid_m: [c.centroid.x, c.centroid.y, c.centroid.z],
                z_mean_m: c.centroid.z,
            })
            .collect();
        if candidates.is_empty() {
            record.error = Some("no candidates above the height threshold".into());
            return Ok(());
        }

        // Identification.
        let t1 = Instant::now();
        let queries = scene_candidate_queries(&scene, &candidates, cfg.strategy)?;
        let outcome = match_hole(&queries, backend)?;
        timings.insert("match_ms".into(), t1.elapsed().as_secs_f64() * 1e3);
        record.ranking = outcome.ranking.clone();
        record.ambiguous = outcome.ambiguous;
        record.match_failures = outcome.failures.clone();
        record.responses = outcome
            .responses
            .iter()
            .map(|(i, r)| ResponseSummary {
                segment_index: *i,
                verdict: r.verdict,
                probability: r.probability,
                fidelity: r.fidelity,
            })
            .collect();

        let by_index: BTreeMap<usize, &HoleCandidate> =
            candidates.iter().map(|c| (c.index, c)).collect();
        let peg_poly = world.peg_polygon_mm()?;
        let contact = ContactWorld::new(world.clone(), cfg.funnel_xy_mm, cfg.funnel_yaw_deg);

        // Per-identification pose estimates, computed lazily.
        let mut yaw_estimates: BTreeMap<usize, Result<YawEstimate, String>> = BTreeMap::new();
        let mut pose_ms = 0.0;
        let mut insert_ms = 0.0;

        let attempt_order: Vec<(usize, usize)> = match cfg.retry_nesting {
            RetryNesting::Nested => (0..cfg.n_id_retries)
                .flat_map(|i| (0..cfg.n_se2_retries).map(move |j| (i, j)))
                .collect(),
            RetryNesting::Flat => {
                let mut v: Vec<(usize, usize)> = (0..cfg.n_id_retries)
                    .flat_map(|i| (0..cfg.n_se2_retries).map(move |j| (i, j)))
                    .collect();
                v.sort_by_key(|&(i, j)| (i + j, i, j));
                v
            }
        };

        'attempts: for (id_rank, yaw_rank) in attempt_order {
            let Some(&segment_index) = outcome.ranking.get(id_rank) else {
                continue;
            };
            let Some(cand) = by_index.get(&segment_index) else {
                continue;
            };
            let hole_index = match cand.truth {
                SegmentTruth::Hole { hole_index } => Some(hole_index),
                SegmentTruth::Clutter => None,
            };

            let mut attempt = AttemptRecord {
                id_rank,
                yaw_rank,
                segment_index,
                hole_index,
                estimate: None,
                yaw_ranking: Vec::new(),
                outcome: None,
                error: None,
            };

            let Some(hole_index) = hole_index else {
                attempt.error = Some("targeted segment is clutter".into());
                record.attempts.push(attempt);
                continue;
            };

            // Yaw estimate for this identification (cached across yaw ranks).
            if !yaw_estimates.contains_key(&segment_index) {
                let t2 = Instant::now();
                let est = estimate_candidate_yaw(&scene, cand, &peg_poly, hole_index, backend)
                    .map_err(|e| e.to_string())
                    .map(|mut est| {
                        maybe_flip_yaw(&mut est, cfg, trial_index, id_rank);
                        est
                    });
                pose_ms += t2.elapsed().as_secs_f64() * 1e3;
                yaw_estimates.insert(segment_index, est);
            }
            let est = match &yaw_estimates[&segment_index] {
                Ok(e) => e.clone(),
                Err(msg) => {
                    attempt.error = Some(msg.clone());
                    record.attempts.push(attempt);
                    continue;
                }
            };
            attempt.yaw_ranking = est
                .ranking
                .iter()
                .map(|(r, resp)| (*r, resp.verdict, resp.probability))
                .collect();

            let Some(yaw) = est.yaw_at_rank(yaw_rank) else {
                attempt.error = Some(format!("no yaw at rank {yaw_rank}"));
                record.attempts.push(attempt);
                continue;
            };
            let estimate = SE2Pose::new(cand.centroid.x, cand.centroid.y, yaw);
            attempt.estimate = Some(estimate);

            let t3 = Instant::now();
            let outcome = simulate_attempt(&contact, &estimate, hole_index, &cfg.spiral);
            insert_ms += t3.elapsed().as_secs_f64() * 1e3;
            attempt.outcome = Some(outcome);
            record.attempts.push(attempt);

            if outcome.success {
                record.with_retry_success = true;
                break 'attempts;
            }
        }
        timings.insert("pose_ms".into(), pose_ms);
        timings.insert("insert_ms".into(), insert_ms);
        Ok(())
    })();

    if let Err(e) = result {
        record.error = Some(e.to_string());
    }
    record.first_attempt_success = record
        .attempts
        .first()
        .and_then(|a| a.outcome)
        .map(|o| o.success)
        .unwrap_or(false);
    record.final_failure = if record.with_retry_success {
        Some(FailureMode::None)
    } else {
        record
            .attempts
            .iter()
            .rev()
            .find_map(|a| a.outcome)
            .map(|o| o.failure_mode)
    };
    timings.insert("total_ms".into(), total_start.elapsed().as_secs_f64() * 1e3);
    record.timings_ms = timings;
    record
}

fn estimate_candidate_yaw(
    scene: &Scene,
    cand: &HoleCandidate,
    peg_poly: &crate::geometry::Polygon2D,
    hole_index: usize,
    backend: &dyn MatcherBackend,
) -> Result<YawEstimate, PipelineError> {
    let world = &scene.meta.world;
    let mask = cand.masks.get(TOP_VIEW).ok_or_else(|| {
        PipelineError::Scene(SceneError::EmptyCloud {
            segment: cand.index,
        })
    })?;
    let rect = cand.crop_rects[TOP_VIEW];
    let image_crop = cand.crops[TOP_VIEW].clone();
    let mask_crop = mask.crop(rect);
    let canonical = canonicalize(&image_crop, &mask_crop)?;
    let ctx = YawQueryContext {
        peg_image_png: Some(scene.peg_views[TOP_VIEW].to_png()),
        geometry: Some(YawGeometry {
            peg: peg_poly.clone(),
            cavity: world.cavity_polygon_mm(hole_index)?,
            clearance_mm: world.holes[hole_index].clearance_mm,
        }),
    };
    Ok(estimate_yaw(&ctx, &canonical, backend)?)
}

/// Fault injection: swap the two best rotations with the configured
/// probability, deterministically per (seed, trial, identification).
fn maybe_flip_yaw(est: &mut YawEstimate, cfg: &PipelineConfig, trial: usize, id_rank: usize) {
    if cfg.yaw_flip_prob <= 0.0 || est.ranking.len() < 2 {
        return;
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed ^ 0xF11F, trial as u64, id_rank as u64));
    if rng.gen::<f64>() < cfg.yaw_flip_prob {
        est.ranking.swap(0, 1);
        est.theta_rotate_deg = est.ranking[0].0;
        est.theta_yaw_deg =
            crate::geometry::normalize_yaw(est.theta_rotate_deg as f64 + est.theta_deg);
    }
}

/// Runs the closed loop over a batch of worlds.
pub fn run_e2e(
    worlds: &[SyntheticWorld],
    cfg: &PipelineConfig,
    backend: &dyn MatcherBackend,
) -> Result<E2eResults, PipelineError> {
    if worlds.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let mut trials = Vec::with_capacity(worlds.len());
    for (i, world) in worlds.iter().enumerate() {
        trials.push(run_trial(i, world, cfg, backend));
    }

    let mut failure_modes: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_peg: BTreeMap<String, PegStats> = BTreeMap::new();
    let mut first = 0;
    let mut retry = 0;
    for t in &trials {
        if t.first_attempt_success {
            first += 1;
        }
        if t.with_retry_success {
            retry += 1;
        }
        let stats = per_peg.entry(t.peg.clone()).or_default();
        stats.trials += 1;
        stats.first_attempt_successes += usize::from(t.first_attempt_success);
        stats.with_retry_successes += usize::from(t.with_retry_success);
        if !t.with_retry_success {
            let key = match (&t.error, t.final_failure) {
                (Some(_), _) => "internal_error".to_string(),
                (None, Some(mode)) => format!("{mode:?}").to_lowercase(),
                (None, None) => "no_attempt".to_string(),
            };
            *failure_modes.entry(key).or_insert(0) += 1;
        }
    }

    Ok(E2eResults {
        n_trials: trials.len(),
        first_attempt_successes: first,
        with_retry_successes: retry,
        failure_modes,
        per_peg,
        trials,
    })
}
