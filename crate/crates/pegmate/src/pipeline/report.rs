//! Report emission: machine-readable result tables, the confusion grid,
//! failure-mode counts, vector charts, and a manifest of input digests.
//!
//! Everything written here is byte-stable for a fixed seed and config; the
//! wall-clock attempt log goes to a separate `attempts.jsonl` sidecar that
//! is excluded from that guarantee.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{digest_of, AblationReport, E2eResults, MatchingResults, PipelineError};
use crate::matcher::MatchVerdict;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_digest: String,
    /// Input name -> sha256 digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report value serializes");
    bytes.push(b'\n');
    std::fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Confusion grid as an SVG table: rows are pegs, columns holes, cells carry
/// the verdict and probability, shaded by rank (top-1/2/3).
pub fn render_confusion_svg(results: &MatchingResults) -> String {
    let rows = &results.confusion.rows;
    let n_rows = rows.len();
    let n_cols = results.confusion.holes.len();
    let cell = 64.0;
    let left = 150.0;
    let top = 120.0;
    let width = left + n_cols as f64 * cell + 10.0;
    let height = top + n_rows as f64 * cell + 10.0;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" font-family=\"monospace\" font-size=\"11\">"
    );
    let _ = write!(
        svg,
        "<text x=\"8\" y=\"20\" font-size=\"14\">peg-hole verdicts, p(o_m), shaded by rank (strategy {:?})</text>",
        results.strategy
    );
    for (j, hole) in results.confusion.holes.iter().enumerate() {
        let x = left + j as f64 * cell + cell / 2.0;
        let _ = write!(
            svg,
            "<text x=\"{x:.0}\" y=\"{:.0}\" text-anchor=\"start\" transform=\"rotate(-45 {x:.0} {:.0})\">{}</text>",
            top - 10.0,
            top - 10.0,
            escape_xml(hole)
        );
    }
    for (i, row) in rows.iter().enumerate() {
        let y = top + i as f64 * cell;
        let _ = write!(
            svg,
            "<text x=\"{:.0}\" y=\"{:.0}\">{}</text>",
            8.0,
            y + cell / 2.0,
            escape_xml(&row.peg)
        );
        for (j, c) in row.cells.iter().enumerate() {
            let x = left + j as f64 * cell;
            let fill = match c.rank {
                1 => "#1a9641",
                2 => "#a6d96a",
                3 => "#d9f0a3",
                _ => "#f2f2f2",
            };
            let _ = write!(
                svg,
                "<rect x=\"{x:.0}\" y=\"{y:.0}\" width=\"{cell:.0}\" height=\"{cell:.0}\" fill=\"{fill}\" stroke=\"#999\"/>"
            );
            let label = match (c.verdict, c.probability) {
                (Some(MatchVerdict::Yes), Some(p)) => format!("Y {p:.2}"),
                (Some(MatchVerdict::No), Some(p)) => format!("N {p:.2}"),
                _ => "err".to_string(),
            };
            let _ = write!(
                svg,
                "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\">{}</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 4.0,
                label
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Per-peg success bars: first-attempt and with-retry rates side by side.
pub fn render_success_bars_svg(per_peg: &BTreeMap<String, super::PegStats>) -> String {
    let pegs: Vec<(&String, &super::PegStats)> = per_peg.iter().collect();
    let bar_w = 34.0;
    let group_w = bar_w * 2.0 + 26.0;
    let left = 60.0;
    let base = 220.0;
    let chart_h = 170.0;
    let width = left + pegs.len() as f64 * group_w + 20.0;
    let height = base + 90.0;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" font-family=\"monospace\" font-size=\"11\">"
    );
    let _ = write!(
        svg,
        "<text x=\"8\" y=\"20\" font-size=\"14\">insertion success by peg (dark: first attempt, light: with retries)</text>"
    );
    let _ = write!(
        svg,
        "<line x1=\"{left}\" y1=\"{base}\" x2=\"{:.0}\" y2=\"{base}\" stroke=\"#333\"/>",
        width - 10.0
    );
    for (k, (peg, stats)) in pegs.iter().enumerate() {
        let x0 = left + k as f64 * group_w;
        let first = stats.first_attempt_successes as f64 / stats.trials.max(1) as f64;
        let retry = stats.with_retry_successes as f64 / stats.trials.max(1) as f64;
        for (off, frac, color) in [(0.0, first, "#2166ac"), (bar_w + 4.0, retry, "#92c5de")] {
            let h = chart_h * frac;
            let _ = write!(
                svg,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{bar_w}\" height=\"{h:.1}\" fill=\"{color}\"/>",
                x0 + off,
                base - h
            );
            let _ = write!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.0}%</text>",
                x0 + off + bar_w / 2.0,
                base - h - 4.0,
                frac * 100.0
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"start\" transform=\"rotate(40 {:.1} {:.1})\">{}</text>",
            x0,
            base + 16.0,
            x0,
            base + 16.0,
            escape_xml(peg)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn write_manifest<C: Serialize>(
    dir: &Path,
    seed: u64,
    config: &C,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
) -> Result<(), PipelineError> {
    let manifest = Manifest {
        seed,
        config_digest: digest_of(config),
        inputs,
        outputs,
    };
    write_json(dir, "manifest.json", &manifest)
}

/// Writes `matching.json`, `confusion.svg`, and `manifest.json`.
pub fn emit_matching_report<C: Serialize>(
    results: &MatchingResults,
    seed: u64,
    config: &C,
    inputs: BTreeMap<String, String>,
    out_dir: &Path,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    write_json(out_dir, "matching.json", results)?;
    std::fs::write(out_dir.join("confusion.svg"), render_confusion_svg(results))?;
    write_manifest(
        out_dir,
        seed,
        config,
        inputs,
        vec!["matching.json".into(), "confusion.svg".into()],
    )
}

/// Writes `e2e.json`, `failure_modes.json`, `success_by_peg.svg`,
/// `manifest.json`, and the (non-byte-stable) `attempts.jsonl`.
pub fn emit_e2e_report<C: Serialize>(
    results: &E2eResults,
    seed: u64,
    config: &C,
    inputs: BTreeMap<String, String>,
    out_dir: &Path,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out_dir)?;

    // Summary without the per-trial bodies (those carry timings).
    #[derive(Serialize)]
    struct E2eSummary<'a> {
        n_trials: usize,
        first_attempt_successes: usize,
        with_retry_successes: usize,
        first_attempt_rate: f64,
        with_retry_rate: f64,
        failure_modes: &'a BTreeMap<String, usize>,
        per_peg: &'a BTreeMap<String, super::PegStats>,
    }
    write_json(
        out_dir,
        "e2e.json",
        &E2eSummary {
            n_trials: results.n_trials,
            first_attempt_successes: results.first_attempt_successes,
            with_retry_successes: results.with_retry_successes,
            first_attempt_rate: results.first_attempt_rate(),
            with_retry_rate: results.with_retry_rate(),
            failure_modes: &results.failure_modes,
            per_peg: &results.per_peg,
        },
    )?;
    write_json(out_dir, "failure_modes.json", &results.failure_modes)?;
    std::fs::write(
        out_dir.join("success_by_peg.svg"),
        render_success_bars_svg(&results.per_peg),
    )?;

    let mut jsonl = Vec::new();
    for t in &results.trials {
        jsonl.extend(serde_json::to_vec(t).expect("trial serializes"));
        jsonl.push(b'\n');
    }
    std::fs::write(out_dir.join("attempts.jsonl"), jsonl)?;

    write_manifest(
        out_dir,
        seed,
        config,
        inputs,
        vec![
            "e2e.json".into(),
            "failure_modes.json".into(),
            "success_by_peg.svg".into(),
        ],
    )
}

/// Writes `ablation.json` and `manifest.json`.
pub fn emit_ablation_report<C: Serialize>(
    report: &AblationReport,
    seed: u64,
    config: &C,
    inputs: BTreeMap<String, String>,
    out_dir: &Path,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    write_json(out_dir, "ablation.json", report)?;
    write_manifest(out_dir, seed, config, inputs, vec!["ablation.json".into()])
}
