//! Command-line front end: every subcommand is a thin wrapper over the
//! library stages. Exit codes: 0 success, 2 validation error, 3 backend
//! transport failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use pegmate::config::{parse_strategy, ConfigMap};
use pegmate::detection::{detect_candidates, detect_to_dir, filter_by_height, load_scene};
use pegmate::geometry::SE2Pose;
use pegmate::insertion::{simulate_attempt, ContactWorld};
use pegmate::matcher::{
    match_hole, MatchError, MatcherBackend, OracleBackend, RemoteBackend, RemoteConfig,
};
use pegmate::pipeline::{
    certified_benchmark, digest_of, emit_ablation_report, emit_e2e_report, emit_matching_report,
    run_ablation, run_e2e, run_matching_experiment, scene_candidate_queries, PipelineConfig,
    PipelineError,
};
use pegmate::pose::{canonicalize, estimate_yaw, YawEstimate, YawGeometry, YawQueryContext};
use pegmate::scene::{SegmentTruth, TOP_VIEW};
use pegmate::worldgen::{add_clutter, make_board, render_world, standard_peg_set, ShapeSpec};

#[derive(Parser)]
#[command(
    name = "pegmate",
    about = "zero-shot peg insertion over a synthetic world"
)]
struct Cli {
    /// Key-value text config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "oracle")]
    backend: BackendKind,
    /// Output directory (default: ./pegmate-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Oracle,
    Remote,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic board and render its scene directory.
    GenWorld {
        /// Peg spec, e.g. rectangle=20,10 | d_shape=24 | cross=26,8 |
        /// trapezoid=22,12,12 | keyed_circle=8,3,3 | l_shape=24,24,8
        #[arg(long, default_value = "d_shape=24")]
        peg: String,
        #[arg(long, default_value_t = 4)]
        distractors: usize,
        #[arg(long, default_value_t = 0.5)]
        clearance: f64,
        #[arg(long, default_value_t = 0)]
        clutter: usize,
    },
    /// Detect hole candidates in a scene directory.
    Detect {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Rank candidate holes for the scene's peg.
    Match {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Estimate a candidate's SE(2) pose.
    Pose {
        #[arg(long)]
        scene: PathBuf,
        /// Segment index; defaults to the top-ranked candidate.
        #[arg(long)]
        candidate: Option<usize>,
    },
    /// Simulate spiral-search insertion from a pose estimate.
    Insert {
        #[arg(long)]
        scene: PathBuf,
        /// pose.json produced by the pose subcommand.
        #[arg(long)]
        pose: PathBuf,
    },
    /// Closed-loop batch: boards x pegs trials with retries.
    E2e {
        #[arg(long, default_value_t = 12)]
        boards: usize,
        #[arg(long, default_value_t = 0.0)]
        centroid_bias_mm: f64,
        #[arg(long, default_value_t = 0.0)]
        yaw_flip_prob: f64,
    },
    /// Input/output ablation table over a certified benchmark.
    Ablate {
        #[arg(long, default_value_t = 12)]
        size: usize,
        /// Comma-separated strategies (default: all six).
        #[arg(long)]
        strategies: Option<String>,
    },
    /// Run the matching experiment on a certified benchmark.
    MatchBench {
        #[arg(long, default_value_t = 20)]
        size: usize,
    },
    /// Re-render charts from a results directory.
    Report {
        #[arg(long)]
        results: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn transport_code(e: &PipelineError) -> Option<u8> {
    match e {
        PipelineError::Match(MatchError::Transport { .. })
        | PipelineError::Match(MatchError::BadStatus { .. }) => Some(3),
        _ => None,
    }
}

fn parse_peg_spec(s: &str) -> Result<ShapeSpec, CliError> {
    let (family, dims) = s.split_once('=').unwrap_or((s, ""));
    let vals: Vec<f64> = if dims.is_empty() {
        vec![]
    } else {
        dims.split(',')
            .map(|d| d.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::validation(format!("bad peg dimensions in {s:?}")))?
    };
    let need = |n: usize| -> Result<(), CliError> {
        if vals.len() != n {
            return Err(CliError::validation(format!(
                "{family} expects {n} dimensions, got {}",
                vals.len()
            )));
        }
        Ok(())
    };
    Ok(match family {
        "rectangle" => {
            need(2)?;
            ShapeSpec::Rectangle {
                width_mm: vals[0],
                height_mm: vals[1],
            }
        }
        "trapezoid" => {
            need(3)?;
            ShapeSpec::Trapezoid {
                base_mm: vals[0],
                top_mm: vals[1],
                height_mm: vals[2],
            }
        }
        "d_shape" => {
            need(1)?;
            ShapeSpec::DShape {
                diameter_mm: vals[0],
            }
        }
        "cross" => {
            need(2)?;
            ShapeSpec::Cross {
                length_mm: vals[0],
                arm_mm: vals[1],
            }
        }
        "keyed_circle" => {
            need(3)?;
            ShapeSpec::KeyedCircle {
                radius_mm: vals[0],
                key_w_mm: vals[1],
                key_h_mm: vals[2],
            }
        }
        "l_shape" => {
            need(3)?;
            ShapeSpec::LShape {
                width_mm: vals[0],
                height_mm: vals[1],
                thickness_mm: vals[2],
            }
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown shape family {other:?}"
            )))
        }
    })
}

fn build_backend(
    kind: BackendKind,
    config: &ConfigMap,
) -> Result<Box<dyn MatcherBackend>, CliError> {
    match kind {
        BackendKind::Oracle => Ok(Box::new(OracleBackend::new())),
        BackendKind::Remote => {
            let cfg: RemoteConfig = config.remote_config().ok_or_else(|| {
                CliError::validation(format!(
                    "remote backend needs vlm.url in the config or {}",
                    pegmate::matcher::URL_ENV
                ))
            })?;
            Ok(Box::new(RemoteBackend::new(cfg).map_err(|e| CliError {
                code: 3,
                message: e.to_string(),
            })?))
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<ConfigMap, CliError> {
    match path {
        Some(p) => Ok(ConfigMap::load(p)?),
        None => Ok(ConfigMap::default()),
    }
}

#[derive(serde::Serialize, Deserialize)]
struct PoseFile {
    segment_index: usize,
    hole_index: Option<usize>,
    estimate: SE2Pose,
    theta_deg: f64,
    theta_rotate_deg: u32,
    yaw_ranking: Vec<(u32, String, f64)>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_ref())?;
    let mut pipeline_cfg = PipelineConfig::default();
    config.apply_pipeline(&mut pipeline_cfg)?;
    if let Some(seed) = cli.seed {
        pipeline_cfg.seed = seed;
    }
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("pegmate-out"));

    match cli.command {
        Command::GenWorld {
            peg,
            distractors,
            clearance,
            clutter,
        } => {
            let peg = parse_peg_spec(&peg)?;
            let mut world = make_board(&peg, distractors, clearance, pipeline_cfg.seed)?;
            if clutter > 0 {
                add_clutter(&mut world, clutter, pipeline_cfg.seed);
            }
            let scene = render_world(&world, &pipeline_cfg.render)?;
            scene.write(&out_dir)?;
            std::fs::write(
                out_dir.join("world.json"),
                serde_json::to_vec_pretty(&world).expect("world serializes"),
            )
            .map_err(|e| CliError::validation(e.to_string()))?;
            println!(
                "wrote scene with {} holes (+{} clutter) to {}",
                world.holes.len(),
                world.clutter.len(),
                out_dir.display()
            );
            println!(
                "ground-truth mating hole: segment {}",
                world.ground_truth_index
            );
        }

        Command::Detect { scene } => {
            let candidates = detect_to_dir(
                &scene,
                &out_dir,
                pipeline_cfg.z_threshold_m,
                pipeline_cfg.crop_margin_px,
            )?;
            println!(
                "{} candidates above the height threshold:",
                candidates.len()
            );
            for c in &candidates {
                println!(
                    "  segment {}: centroid ({:.4}, {:.4}, {:.4}) m, {} points",
                    c.index,
                    c.centroid.x,
                    c.centroid.y,
                    c.centroid.z,
                    c.cloud.len()
                );
            }
            println!("candidates.json and crops written to {}", out_dir.display());
        }

        Command::Match { scene, strategy } => {
            let strategy = match strategy {
                Some(s) => parse_strategy(&s)?,
                None => pipeline_cfg.strategy,
            };
            let backend = build_backend(cli.backend, &config)?;
            let scene = load_scene(&scene)?;
            let candidates = filter_by_height(
                detect_candidates(&scene, pipeline_cfg.crop_margin_px)?,
                pipeline_cfg.z_threshold_m,
            );
            let queries = scene_candidate_queries(&scene, &candidates, strategy).map_err(|e| {
                match transport_code(&e) {
                    Some(code) => CliError {
                        code,
                        message: e.to_string(),
                    },
                    None => CliError::validation(e.to_string()),
                }
            })?;
            let outcome = match_hole(&queries, backend.as_ref()).map_err(|e| CliError {
                code: match e {
                    MatchError::Transport { .. } | MatchError::BadStatus { .. } => 3,
                    _ => 2,
                },
                message: e.to_string(),
            })?;
            println!("ranking (best first): {:?}", outcome.ranking);
            for (i, r) in &outcome.responses {
                println!(
                    "  segment {i}: {:?} p={:.4} ({:?})",
                    r.verdict, r.probability, r.fidelity
                );
            }
            if outcome.ambiguous {
                println!("AmbiguousMatch: multiple Yes answers without probabilities");
            }
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::validation(e.to_string()))?;
            std::fs::write(
                out_dir.join("ranking.json"),
                serde_json::to_vec_pretty(&serde_json::json!({
                    "ranking": outcome.ranking,
                    "ambiguous": outcome.ambiguous,
                    "responses": outcome.responses.iter().map(|(i, r)| {
                        serde_json::json!({
                            "segment_index": i,
                            "verdict": r.verdict,
                            "probability": r.probability,
                            "fidelity": r.fidelity,
                        })
                    }).collect::<Vec<_>>(),
                    "failures": outcome.failures,
                }))
                .expect("ranking serializes"),
            )
            .map_err(|e| CliError::validation(e.to_string()))?;
            println!("ranking.json written to {}", out_dir.display());
        }

        Command::Pose { scene, candidate } => {
            let backend = build_backend(cli.backend, &config)?;
            let scene = load_scene(&scene)?;
            let candidates = filter_by_height(
                detect_candidates(&scene, pipeline_cfg.crop_margin_px)?,
                pipeline_cfg.z_threshold_m,
            );
            let segment = match candidate {
                Some(s) => s,
                None => {
                    let queries =
                        scene_candidate_queries(&scene, &candidates, pipeline_cfg.strategy)?;
                    *match_hole(&queries, backend.as_ref())?
                        .ranking
                        .first()
                        .ok_or_else(|| CliError::validation("no candidates"))?
                }
            };
            let cand = candidates
                .iter()
                .find(|c| c.index == segment)
                .ok_or_else(|| {
                    CliError::validation(format!("no candidate with segment {segment}"))
                })?;
            let hole_index = match cand.truth {
                SegmentTruth::Hole { hole_index } => hole_index,
                SegmentTruth::Clutter => {
                    return Err(CliError::validation("selected segment is clutter"))
                }
            };
            let world = &scene.meta.world;
            let rect = cand.crop_rects[TOP_VIEW];
            let canonical = canonicalize(&cand.crops[TOP_VIEW], &cand.masks[TOP_VIEW].crop(rect))?;
            let ctx = YawQueryContext {
                peg_image_png: Some(scene.peg_views[TOP_VIEW].to_png()),
                geometry: Some(YawGeometry {
                    peg: world.peg_polygon_mm()?,
                    cavity: world.cavity_polygon_mm(hole_index)?,
                    clearance_mm: world.holes[hole_index].clearance_mm,
                }),
            };
            let est: YawEstimate = estimate_yaw(&ctx, &canonical, backend.as_ref())?;
            let estimate = SE2Pose::new(cand.centroid.x, cand.centroid.y, est.theta_yaw_deg);
            println!(
                "segment {segment}: theta {:.2} deg, rotation {} deg, yaw {:.2} deg, position ({:.4}, {:.4}) m",
                est.theta_deg, est.theta_rotate_deg, est.theta_yaw_deg, estimate.x, estimate.y
            );
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::validation(e.to_string()))?;
            let pose_file = PoseFile {
                segment_index: segment,
                hole_index: Some(hole_index),
                estimate,
                theta_deg: est.theta_deg,
                theta_rotate_deg: est.theta_rotate_deg,
                yaw_ranking: est
                    .ranking
                    .iter()
                    .map(|(r, resp)| (*r, format!("{:?}", resp.verdict), resp.probability))
                    .collect(),
            };
            std::fs::write(
                out_dir.join("pose.json"),
                serde_json::to_vec_pretty(&pose_file).expect("pose serializes"),
            )
            .map_err(|e| CliError::validation(e.to_string()))?;
            println!("pose.json written to {}", out_dir.display());
        }

        Command::Insert { scene, pose } => {
            let scene = load_scene(&scene)?;
            let pose_file: PoseFile = serde_json::from_slice(
                &std::fs::read(&pose).map_err(|e| CliError::validation(e.to_string()))?,
            )
            .map_err(|e| CliError::validation(format!("bad pose file: {e}")))?;
            let hole_index = pose_file
                .hole_index
                .ok_or_else(|| CliError::validation("pose file has no hole index"))?;
            let contact = ContactWorld::new(
                scene.meta.world.clone(),
                pipeline_cfg.funnel_xy_mm,
                pipeline_cfg.funnel_yaw_deg,
            );
            let outcome = simulate_attempt(
                &contact,
                &pose_file.estimate,
                hole_index,
                &pipeline_cfg.spiral,
            );
            println!(
                "success: {} after {} waypoints (failure mode {:?}, residual ({:.3}, {:.3}) mm)",
                outcome.success,
                outcome.waypoints_used,
                outcome.failure_mode,
                outcome.final_offset_mm[0],
                outcome.final_offset_mm[1]
            );
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::validation(e.to_string()))?;
            std::fs::write(
                out_dir.join("outcome.json"),
                serde_json::to_vec_pretty(&outcome).expect("outcome serializes"),
            )
            .map_err(|e| CliError::validation(e.to_string()))?;
        }

        Command::E2e {
            boards,
            centroid_bias_mm,
            yaw_flip_prob,
        } => {
            let backend = build_backend(cli.backend, &config)?;
            pipeline_cfg.render.noise.centroid_bias_mm = centroid_bias_mm;
            pipeline_cfg.yaw_flip_prob = yaw_flip_prob;
            let pegs = standard_peg_set();
            let worlds =
                pegmate::worldgen::evaluation_batch(&pegs, boards, 0.5, pipeline_cfg.seed)?;
            let results =
                run_e2e(&worlds, &pipeline_cfg, backend.as_ref()).map_err(|e| CliError {
                    code: transport_code(&e).unwrap_or(2),
                    message: e.to_string(),
                })?;
            println!(
                "{} trials: first attempt {}/{} ({:.1}%), with retries {}/{} ({:.1}%)",
                results.n_trials,
                results.first_attempt_successes,
                results.n_trials,
                100.0 * results.first_attempt_rate(),
                results.with_retry_successes,
                results.n_trials,
                100.0 * results.with_retry_rate()
            );
            for (mode, count) in &results.failure_modes {
                println!("  failure {mode}: {count}");
            }
            let mut inputs = BTreeMap::new();
            inputs.insert("worlds".to_string(), digest_of(&worlds));
            emit_e2e_report(&results, pipeline_cfg.seed, &pipeline_cfg, inputs, &out_dir)?;
            println!("reports written to {}", out_dir.display());
        }

        Command::Ablate { size, strategies } => {
            let backend = build_backend(cli.backend, &config)?;
            let strategies = match strategies {
                Some(s) => s
                    .split(',')
                    .map(|x| parse_strategy(x.trim()))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![
                    pegmate::matcher::InputStrategy::TwoView,
                    pegmate::matcher::InputStrategy::CrossSectionalOnly,
                    pegmate::matcher::InputStrategy::AngledOnly,
                    pegmate::matcher::InputStrategy::ThreeView,
                    pegmate::matcher::InputStrategy::Name,
                    pegmate::matcher::InputStrategy::NoProbability,
                ],
            };
            let dataset = certified_benchmark(size, 0.5, 0.3, pipeline_cfg.seed)?;
            let report = run_ablation(&dataset, &strategies, backend.as_ref())?;
            println!(
                "strategy                 top-1  top-2  top-3  (of {})",
                dataset.len()
            );
            for row in &report.rows {
                match (row.top1, row.top2, row.top3) {
                    (Some(a), Some(b), Some(c)) => {
                        println!(
                            "{:<24} {a:>5}  {b:>5}  {c:>5}",
                            format!("{:?}", row.strategy)
                        )
                    }
                    _ => println!(
                        "{:<24} failed: {}",
                        format!("{:?}", row.strategy),
                        row.error.as_deref().unwrap_or("?")
                    ),
                }
            }
            let mut inputs = BTreeMap::new();
            inputs.insert("dataset".to_string(), digest_of(&dataset.entries));
            emit_ablation_report(&report, pipeline_cfg.seed, &pipeline_cfg, inputs, &out_dir)?;
            println!("ablation.json written to {}", out_dir.display());
        }

        Command::MatchBench { size } => {
            let backend = build_backend(cli.backend, &config)?;
            let dataset = certified_benchmark(size, 0.5, 0.3, pipeline_cfg.seed)?;
            let results =
                run_matching_experiment(&dataset, backend.as_ref(), pipeline_cfg.strategy)?;
            println!(
                "top-1 {}/{}  top-2 {}/{}  top-3 {}/{}",
                results.top1,
                results.total,
                results.top2,
                results.total,
                results.top3,
                results.total
            );
            let mut inputs = BTreeMap::new();
            inputs.insert("dataset".to_string(), digest_of(&dataset.entries));
            emit_matching_report(&results, pipeline_cfg.seed, &pipeline_cfg, inputs, &out_dir)?;
            println!(
                "matching.json and confusion.svg written to {}",
                out_dir.display()
            );
        }

        Command::Report { results } => {
            let mut rendered = 0;
            let matching_path = results.join("matching.json");
            if matching_path.exists() {
                let parsed: pegmate::pipeline::MatchingResults = serde_json::from_slice(
                    &std::fs::read(&matching_path)
                        .map_err(|e| CliError::validation(e.to_string()))?,
                )
                .map_err(|e| CliError::validation(e.to_string()))?;
                std::fs::write(
                    results.join("confusion.svg"),
                    pegmate::pipeline::render_confusion_svg(&parsed),
                )
                .map_err(|e| CliError::validation(e.to_string()))?;
                rendered += 1;
            }
            let e2e_path = results.join("e2e.json");
            if e2e_path.exists() {
                #[derive(Deserialize)]
                struct Summary {
                    per_peg: BTreeMap<String, pegmate::pipeline::PegStats>,
                }
                let parsed: Summary = serde_json::from_slice(
                    &std::fs::read(&e2e_path).map_err(|e| CliError::validation(e.to_string()))?,
                )
                .map_err(|e| CliError::validation(e.to_string()))?;
                std::fs::write(
                    results.join("success_by_peg.svg"),
                    pegmate::pipeline::render_success_bars_svg(&parsed.per_peg),
                )
                .map_err(|e| CliError::validation(e.to_string()))?;
                rendered += 1;
            }
            if rendered == 0 {
                return Err(CliError::validation(format!(
                    "no matching.json or e2e.json under {}",
                    results.display()
                )));
            }
            println!("re-rendered {rendered} chart(s) in {}", results.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
