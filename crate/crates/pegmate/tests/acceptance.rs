//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (visible with `--nocapture`; the per-test ok/FAILED
//! line from the harness is the gate either way).
//!
//! Run with: cargo test --test acceptance -- --nocapture

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{completion_body, MockReply, MockVlm};
use pegmate::detection::{centroid, detect_candidates, filter_by_height, Z_THRESHOLD_M};
use pegmate::geometry::{normalize_yaw, SE2Pose};
use pegmate::insertion::{
    simulate_attempt, spiral_waypoints, ContactWorld, FailureMode, SpiralParams,
};
use pegmate::matcher::{
    build_prompt, rank_candidates, Fidelity, InputStrategy, MatchError, MatchQuery, MatchResponse,
    MatchVerdict, MatcherBackend, OracleBackend, RemoteBackend, RemoteConfig,
    TWO_VIEW_TEMPLATE as IMPL_TEMPLATE,
};
use pegmate::pipeline::{
    certified_benchmark, emit_e2e_report, run_e2e, run_matching_experiment, PipelineConfig,
};
use pegmate::pose::{canonicalize, estimate_yaw, YawGeometry, YawQueryContext};
use pegmate::scene::SegmentTruth;
use pegmate::worldgen::{
    add_clutter, evaluation_batch, make_board, make_hole_polygon, render_world, standard_peg_set,
    RenderConfig, ShapeSpec, SyntheticWorld,
};

/// Criterion 1: Eq.-style centroid equals an independent brute-force mean on
/// 1000 random clouds to 1e-9 m, within 5 seconds.
#[test]
fn acceptance_1_centroid_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=2000);
        let cloud: Vec<Vector3<f64>> = (0..n)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect();
        // Independent oracle: plain component-wise summation.
        let (mut sx, mut sy, mut sz) = (0.0f64, 0.0f64, 0.0f64);
        for p in &cloud {
            sx += p.x;
            sy += p.y;
            sz += p.z;
        }
        let m = n as f64;
        let expect = Vector3::new(sx / m, sy / m, sz / m);
        let got = centroid(&cloud).unwrap();
        worst = worst.max((got - expect).norm());
        assert!((got - expect).norm() <= 1e-9, "cloud of {n}: {worst:e}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.2}s");
    println!("ACCEPTANCE 1 PASS: 1000 clouds, worst |delta| = {worst:.2e} m, {elapsed:.2}s");
}

/// Criterion 2: height filter retains exactly the holes on 100 cluttered
/// scenes, and the z == threshold boundary case is retained.
#[test]
fn acceptance_2_height_filter() {
    let pegs = [
        ShapeSpec::Rectangle {
            width_mm: 24.0,
            height_mm: 12.0,
        },
        ShapeSpec::DShape { diameter_mm: 22.0 },
        ShapeSpec::Trapezoid {
            base_mm: 24.0,
            top_mm: 12.0,
            height_mm: 14.0,
        },
    ];
    let cfg = RenderConfig::default();
    let mut errors = 0usize;
    let mut scenes = 0usize;
    for seed in 0..100u64 {
        let peg = &pegs[(seed % 3) as usize];
        let mut world = make_board(peg, (seed % 3) as usize, 0.5, seed).unwrap();
        add_clutter(&mut world, 1 + (seed % 2) as usize, seed);
        let scene = render_world(&world, &cfg).unwrap();
        let candidates = detect_candidates(&scene, 8).unwrap();
        let retained = filter_by_height(candidates, Z_THRESHOLD_M);
        let holes_retained = retained
            .iter()
            .filter(|c| matches!(c.truth, SegmentTruth::Hole { .. }))
            .count();
        let clutter_retained = retained.len() - holes_retained;
        if holes_retained != world.holes.len() || clutter_retained != 0 {
            errors += 1;
        }
        scenes += 1;
    }
    assert_eq!(
        errors, 0,
        "height filter errors on {errors}/{scenes} scenes"
    );

    // Boundary: a candidate whose mean height equals the threshold exactly
    // is retained (elimination is z < threshold), and one infinitesimally
    // below is eliminated.
    let candidate = |z: f64, index: usize| pegmate::detection::HoleCandidate {
        index,
        cloud: vec![Vector3::new(0.0, 0.0, z)],
        centroid: Vector3::new(0.0, 0.0, z),
        masks: BTreeMap::new(),
        crops: BTreeMap::new(),
        crop_rects: BTreeMap::new(),
        truth: SegmentTruth::Clutter,
    };
    let retained = filter_by_height(
        vec![candidate(0.050, 0), candidate(0.049, 1)],
        Z_THRESHOLD_M,
    );
    let kept: Vec<usize> = retained.iter().map(|c| c.index).collect();
    assert_eq!(kept, vec![0], "z == 0.050 retained, z == 0.049 eliminated");
    println!("ACCEPTANCE 2 PASS: {scenes} scenes, 0 filter errors, boundary retained");
}

/// Criterion 3: ranking laws hold over 1e5 random response multisets with
/// zero violations.
#[test]
fn acceptance_3_ranking_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let probs = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
    let mut checked = 0usize;
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=10);
        let responses: Vec<(usize, MatchResponse)> = (0..n)
            .map(|i| {
                let verdict = if rng.gen_bool(0.5) {
                    MatchVerdict::Yes
                } else {
                    MatchVerdict::No
                };
                (
                    i,
                    MatchResponse {
                        verdict,
                        probability: probs[rng.gen_range(0..probs.len())],
                        raw_text: String::new(),
                        fidelity: Fidelity::Logprob,
                    },
                )
            })
            .collect();

        let ranking = rank_candidates(&responses);

        // Permutation.
        let mut sorted = ranking.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>(), "not a permutation");

        // Ordering laws with deterministic tie-break.
        for w in ranking.windows(2) {
            let a = &responses[w[0]].1;
            let b = &responses[w[1]].1;
            match (a.verdict, b.verdict) {
                (MatchVerdict::No, MatchVerdict::Yes) => panic!("No ranked above Yes"),
                (MatchVerdict::Yes, MatchVerdict::Yes) => assert!(
                    a.probability > b.probability
                        || (a.probability == b.probability && w[0] < w[1])
                ),
                (MatchVerdict::No, MatchVerdict::No) => assert!(
                    a.probability < b.probability
                        || (a.probability == b.probability && w[0] < w[1])
                ),
                _ => {}
            }
        }

        // Input-order invariance.
        let mut reversed = responses.clone();
        reversed.reverse();
        assert_eq!(ranking, rank_candidates(&reversed), "order dependence");
        checked += 1;
    }
    println!("ACCEPTANCE 3 PASS: {checked} multisets, zero violations");
}

/// Criterion 4: oracle identification on a 20-peg certified benchmark is
/// perfect at top-1 with monotone top-k, within 60 seconds.
#[test]
fn acceptance_4_oracle_identification() {
    let start = Instant::now();
    let dataset = certified_benchmark(20, 0.5, 0.3, 0xACC4).unwrap();
    let results =
        run_matching_experiment(&dataset, &OracleBackend::new(), InputStrategy::TwoView).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(
        results.top1,
        20,
        "top-1 {}/20; rows: {:?}",
        results.top1,
        results
            .confusion
            .rows
            .iter()
            .map(|r| (&r.peg, r.truth_rank))
            .collect::<Vec<_>>()
    );
    assert!(results.top1 <= results.top2 && results.top2 <= results.top3);
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
    println!(
        "ACCEPTANCE 4 PASS: top-1 {}/20, top-2 {}/20, top-3 {}/20 in {elapsed:.1}s",
        results.top1, results.top2, results.top3
    );
}

fn single_hole_world(shape: &ShapeSpec, yaw_deg: f64, seed: u64) -> SyntheticWorld {
    let mut world = make_board(shape, 0, 0.5, seed).unwrap();
    let pose = world.holes[0].pose;
    world.holes[0].pose = SE2Pose::new(pose.x, pose.y, yaw_deg);
    world
}

fn yaw_error_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Criterion 5: yaw accuracy through the full render-detect-canonicalize
/// path: asymmetric holes within 1 degree, 180-symmetric ones within 1
/// degree of either orientation, and the composition identity everywhere.
#[test]
fn acceptance_5_yaw_accuracy() {
    let mut render_cfg = RenderConfig::default();
    render_cfg.mm_per_pixel = 0.2;
    let asymmetric = [
        ShapeSpec::DShape { diameter_mm: 30.0 },
        ShapeSpec::LShape {
            width_mm: 30.0,
            height_mm: 30.0,
            thickness_mm: 9.0,
        },
        ShapeSpec::Trapezoid {
            base_mm: 30.0,
            top_mm: 14.0,
            height_mm: 18.0,
        },
    ];
    let backend = OracleBackend::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    let mut worst = 0.0f64;

    let run_case = |shape: &ShapeSpec, yaw_star: f64, seed: u64| -> f64 {
        let world = single_hole_world(shape, yaw_star, seed);
        let scene = render_world(&world, &render_cfg).unwrap();
        let candidates = filter_by_height(detect_candidates(&scene, 16).unwrap(), Z_THRESHOLD_M);
        assert_eq!(candidates.len(), 1);
        let cand = &candidates[0];
        let rect = cand.crop_rects["top"];
        let canonical = canonicalize(&cand.crops["top"], &cand.masks["top"].crop(rect)).unwrap();
        let ctx = YawQueryContext {
            peg_image_png: None,
            geometry: Some(YawGeometry {
                peg: world.peg_polygon_mm().unwrap(),
                cavity: world.cavity_polygon_mm(0).unwrap(),
                clearance_mm: 0.5,
            }),
        };
        let est = estimate_yaw(&ctx, &canonical, &backend).unwrap();
        // Composition identity on every case.
        assert_eq!(
            normalize_yaw(est.theta_rotate_deg as f64 + est.theta_deg),
            est.theta_yaw_deg
        );
        est.theta_yaw_deg
    };

    for i in 0..200 {
        let shape = &asymmetric[i % asymmetric.len()];
        let yaw_star: f64 = rng.gen_range(0.0..360.0);
        let got = run_case(shape, yaw_star, 1000 + i as u64);
        let err = yaw_error_deg(got, yaw_star);
        worst = worst.max(err);
        assert!(
            err <= 1.0,
            "{} at {yaw_star:.2}: estimated {got:.2} (err {err:.2})",
            shape.display_name()
        );
    }

    // 180-degree symmetric rectangles: either orientation within 1 degree.
    let rect = ShapeSpec::Rectangle {
        width_mm: 30.0,
        height_mm: 14.0,
    };
    let mut sym_worst = 0.0f64;
    for i in 0..40 {
        let yaw_star: f64 = rng.gen_range(0.0..360.0);
        let got = run_case(&rect, yaw_star, 5000 + i as u64);
        let err = yaw_error_deg(got, yaw_star).min(yaw_error_deg(got, yaw_star + 180.0));
        sym_worst = sym_worst.max(err);
        assert!(err <= 1.0, "rect at {yaw_star:.2}: estimated {got:.2}");
    }
    println!(
        "ACCEPTANCE 5 PASS: 200 asymmetric (worst {worst:.3} deg) + 40 symmetric (worst {sym_worst:.3} deg), identity held"
    );
}

/// Criterion 6: spiral coverage over a 0.1 mm offset grid with a 0.4 mm
/// funnel, out-of-reach beyond 6 mm, and the last waypoint at 5.0 +- 0.25 mm.
#[test]
fn acceptance_6_spiral_coverage() {
    let params = SpiralParams::default();
    let world = make_board(
        &ShapeSpec::Rectangle {
            width_mm: 20.0,
            height_mm: 10.0,
        },
        0,
        0.5,
        6,
    )
    .unwrap();
    let contact = ContactWorld::new(world.clone(), 0.4, 2.0);
    let truth = world.holes[0].pose;

    let wps = spiral_waypoints(&params);
    let last = wps.last().unwrap();
    let last_r = (last[0] * last[0] + last[1] * last[1]).sqrt();
    assert!(
        (last_r - 5.0).abs() <= 0.25,
        "last waypoint radius {last_r}"
    );

    let mut covered = 0usize;
    let mut tested = 0usize;
    let mut ox = -5.0f64;
    while ox <= 5.0 {
        let mut oy = -5.0f64;
        while oy <= 5.0 {
            let r = (ox * ox + oy * oy).sqrt();
            if r <= 5.0 - 0.4 {
                tested += 1;
                let est = SE2Pose::new(
                    truth.x + ox / 1000.0,
                    truth.y + oy / 1000.0,
                    truth.yaw_deg(),
                );
                let outcome = simulate_attempt(&contact, &est, 0, &params);
                if outcome.success {
                    covered += 1;
                } else {
                    panic!("offset ({ox:.1}, {oy:.1}) mm not covered: {outcome:?}");
                }
            }
            oy += 0.1;
        }
        ox += 0.1;
    }
    assert_eq!(covered, tested);

    // Beyond six millimeters the spiral must report out_of_reach.
    let mut far_tested = 0usize;
    for k in 0..64 {
        let ang = k as f64 / 64.0 * std::f64::consts::TAU;
        for r in [6.0, 6.5, 7.0] {
            let est = SE2Pose::new(
                truth.x + r * ang.cos() / 1000.0,
                truth.y + r * ang.sin() / 1000.0,
                truth.yaw_deg(),
            );
            let outcome = simulate_attempt(&contact, &est, 0, &params);
            assert!(!outcome.success);
            assert_eq!(outcome.failure_mode, FailureMode::OutOfReach, "r = {r}");
            far_tested += 1;
        }
    }
    println!(
        "ACCEPTANCE 6 PASS: {covered}/{tested} offsets covered, {far_tested} far offsets out_of_reach, last radius {last_r:.3} mm"
    );
}

/// Criterion 7: closed-loop monotonicity with injected noise over >= 200
/// trials, exact first-attempt equality with retries disabled, and 60/60 at
/// zero noise.
#[test]
fn acceptance_7_closed_loop_monotonicity() {
    let pegs = standard_peg_set();

    // Noisy batch: centroid bias plus yaw flips.
    let worlds = evaluation_batch(&pegs, 40, 0.5, 0xACC7).unwrap();
    assert!(worlds.len() >= 200);
    let mut cfg = PipelineConfig::default();
    cfg.seed = 0xACC7;
    cfg.render.noise.centroid_bias_mm = 1.5;
    cfg.yaw_flip_prob = 0.10;
    let noisy = run_e2e(&worlds, &cfg, &OracleBackend::new()).unwrap();
    assert!(
        noisy.with_retry_successes >= noisy.first_attempt_successes,
        "retries lost successes: {} < {}",
        noisy.with_retry_successes,
        noisy.first_attempt_successes
    );

    // Disabling retries reproduces the first-attempt number exactly.
    let mut single = cfg.clone();
    single.n_id_retries = 1;
    single.n_se2_retries = 1;
    let single_run = run_e2e(&worlds, &single, &OracleBackend::new()).unwrap();
    assert_eq!(
        single_run.with_retry_successes,
        single_run.first_attempt_successes
    );
    assert_eq!(
        single_run.first_attempt_successes,
        noisy.first_attempt_successes
    );

    // Zero noise: 12 boards x 5 pegs all succeed.
    let clean_worlds = evaluation_batch(&pegs, 12, 0.5, 0x60).unwrap();
    assert_eq!(clean_worlds.len(), 60);
    let clean_cfg = PipelineConfig::default();
    let clean = run_e2e(&clean_worlds, &clean_cfg, &OracleBackend::new()).unwrap();
    assert_eq!(
        clean.with_retry_successes, 60,
        "zero-noise failures: {:?}",
        clean.failure_modes
    );

    println!(
        "ACCEPTANCE 7 PASS: noisy {} trials first {} retry {} (monotone, N=1 exact), zero-noise 60/60",
        noisy.n_trials, noisy.first_attempt_successes, noisy.with_retry_successes
    );
}

/// Criterion 8: the wire contract. Golden prompt bytes, mock round trip,
/// degraded mode without logprobs, and three-attempt transport behavior.
#[test]
fn acceptance_8_wire_contract() {
    // Golden test: the two-view prompt is byte-identical to the template.
    let golden = "<image1> This is a cross-sectional image of a peg.\n\
<image2> This is another image of a peg from a different angle.\n\
<image3> This is a cross-sectional image of a hole.\n\
<image4> This is another image of a hole from a different angle.\n\
Can the peg in images 1 and 2 be perfectly inserted into the hole in images 3 and 4?\n\
Please answer with only yes or no.";
    assert_eq!(IMPL_TEMPLATE, golden);
    let img = vec![9u8; 16];
    let bundle = build_prompt(
        &[img.clone(), img.clone()],
        &[img.clone(), img.clone()],
        InputStrategy::TwoView,
    )
    .unwrap();
    assert_eq!(bundle.text.as_bytes(), golden.as_bytes());

    let query = MatchQuery {
        prompt: bundle,
        geometry: None,
    };
    let fast = |url: String| {
        let mut c = RemoteConfig::new(url);
        c.backoff_ms = 5;
        c
    };

    // Mock round trip with an injected verdict and probability.
    let mock = MockVlm::start(vec![MockReply::Json(completion_body(
        "Yes",
        Some(0.83f64.ln()),
        &[],
    ))]);
    let backend = RemoteBackend::new(fast(mock.url())).unwrap();
    let r = backend.answer(&query).unwrap();
    assert_eq!(r.verdict, MatchVerdict::Yes);
    assert!((r.probability - 0.83).abs() < 1e-12);
    assert_eq!(r.fidelity, Fidelity::Logprob);
    drop(mock);

    // Withheld logprobs trigger degraded mode.
    let mock = MockVlm::start(vec![MockReply::Json(completion_body("No", None, &[]))]);
    let backend = RemoteBackend::new(fast(mock.url())).unwrap();
    let r = backend.answer(&query).unwrap();
    assert_eq!(
        (r.verdict, r.probability, r.fidelity),
        (MatchVerdict::No, 1.0, Fidelity::Degraded)
    );
    drop(mock);

    // A persistently failing endpoint costs exactly three attempts.
    let mock = MockVlm::start(vec![MockReply::Status(500)]);
    let backend = RemoteBackend::new(fast(mock.url())).unwrap();
    let err = backend.answer(&query).unwrap_err();
    assert!(matches!(err, MatchError::Transport { attempts: 3, .. }));
    assert_eq!(mock.hits(), 3);

    println!("ACCEPTANCE 8 PASS: golden prompt, round trip, degraded mode, 3-attempt transport");
}

/// Criterion 9: a full e2e rerun with identical seed and config produces
/// byte-identical reports, and scene renders are byte-identical too.
#[test]
fn acceptance_9_determinism() {
    let pegs = &standard_peg_set()[..3];
    let worlds = evaluation_batch(pegs, 2, 0.5, 0xACC9).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.seed = 0xACC9;
    cfg.render.noise.centroid_bias_mm = 0.8;
    cfg.yaw_flip_prob = 0.2;
    let backend = OracleBackend::new();

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let inputs = |w: &[SyntheticWorld]| {
        let mut m = BTreeMap::new();
        m.insert("worlds".to_string(), pegmate::pipeline::digest_of(&w));
        m
    };
    let ra = run_e2e(&worlds, &cfg, &backend).unwrap();
    emit_e2e_report(&ra, cfg.seed, &cfg, inputs(&worlds), dir_a.path()).unwrap();
    let rb = run_e2e(&worlds, &cfg, &backend).unwrap();
    emit_e2e_report(&rb, cfg.seed, &cfg, inputs(&worlds), dir_b.path()).unwrap();

    let mut compared = 0;
    for f in [
        "e2e.json",
        "failure_modes.json",
        "success_by_peg.svg",
        "manifest.json",
    ] {
        let a = std::fs::read(dir_a.path().join(f)).unwrap();
        let b = std::fs::read(dir_b.path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
        compared += 1;
    }

    // Scene files: identical (world, config) render to identical bytes.
    let scene_a = tempfile::tempdir().unwrap();
    let scene_b = tempfile::tempdir().unwrap();
    render_world(&worlds[0], &cfg.render)
        .unwrap()
        .write(scene_a.path())
        .unwrap();
    render_world(&worlds[0], &cfg.render)
        .unwrap()
        .write(scene_b.path())
        .unwrap();
    let mut files: Vec<_> = std::fs::read_dir(scene_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    assert!(files.len() > 5);
    for f in &files {
        let a = std::fs::read(scene_a.path().join(f)).unwrap();
        let b = std::fs::read(scene_b.path().join(f)).unwrap();
        assert_eq!(a, b, "{f:?} differs");
        compared += 1;
    }
    println!("ACCEPTANCE 9 PASS: {compared} files byte-identical across reruns");
}

/// Supporting check for criterion 4's certification claim: the mating
/// structure of the benchmark is exactly diagonal under the oracle.
#[test]
fn acceptance_4b_benchmark_certification() {
    let dataset = certified_benchmark(20, 0.5, 0.3, 0xACC4).unwrap();
    let mut cross_margins = 0usize;
    for (i, e) in dataset.entries.iter().enumerate() {
        let peg = pegmate::worldgen::make_shape(&e.peg).unwrap();
        for (j, other) in dataset.entries.iter().enumerate() {
            let hole = make_hole_polygon(&other.hole_shape, other.clearance_mm).unwrap();
            let r = pegmate::geometry::insertability(&peg, &hole, other.clearance_mm).unwrap();
            assert_eq!(r.fits, i == j, "peg {i} vs hole {j}");
            if i != j {
                assert!(
                    r.margin_mm <= other.clearance_mm - 0.3,
                    "cross margin {} too close (peg {i}, hole {j})",
                    r.margin_mm
                );
                cross_margins += 1;
            }
        }
    }
    println!("ACCEPTANCE 4b PASS: {cross_margins} cross margins separated by >= 0.3 mm");
}
