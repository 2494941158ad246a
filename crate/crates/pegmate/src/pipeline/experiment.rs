//! Matching experiments over shape datasets: per-peg rankings against every
//! hole, confusion grids with top-k accounting, and the input/output
//! ablation harness.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::matcher::{
    build_prompt, rank_candidates, GeometryQuery, InputStrategy, MatchQuery, MatchResponse,
    MatchVerdict, MatcherBackend,
};
use crate::raster::{fill_polygon, GrayImage};
use crate::worldgen::{make_hole_polygon, make_shape, ShapeSpec};

/// One peg/hole pair of a matching dataset; entry `i`'s hole is peg `i`'s
/// certified mating hole.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub peg: ShapeSpec,
    pub hole_shape: ShapeSpec,
    pub clearance_mm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingDataset {
    pub entries: Vec<DatasetEntry>,
}

impl MatchingDataset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub verdict: Option<MatchVerdict>,
    pub probability: Option<f64>,
    /// 1-based rank of this hole in the row's ranking.
    pub rank: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowRecord {
    pub peg: String,
    pub cells: Vec<CellRecord>,
    pub ranking: Vec<usize>,
    /// Rank of the ground-truth hole (1-based).
    pub truth_rank: usize,
}

/// Rows are pegs, columns are holes; the diagonal is ground truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub holes: Vec<String>,
    pub rows: Vec<RowRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingResults {
    pub strategy: InputStrategy,
    pub confusion: ConfusionMatrix,
    pub top1: usize,
    pub top2: usize,
    pub top3: usize,
    pub total: usize,
}

impl MatchingResults {
    pub fn top1_rate(&self) -> f64 {
        self.top1 as f64 / self.total.max(1) as f64
    }
}

/// Orthographic silhouette views of a shape for prompt images: top-down,
/// a cos-squashed "angled" view, and a steeper third view.
fn shape_views(spec: &ShapeSpec) -> Result<Vec<GrayImage>, PipelineError> {
    let poly = make_shape(spec)?;
    let (min, max) = poly.bounding_box();
    let extent = (max[0] - min[0]).max(max[1] - min[1]);
    let size = 128u32;
    let scale = size as f64 * 0.75 / extent;
    let render = |squash: f64| {
        let mut img = GrayImage::new(size, size, 30);
        let c = size as f64 / 2.0;
        let pts: Vec<[f64; 2]> = poly
            .vertices()
            .iter()
            .map(|[x, y]| [c + x * scale, c - y * scale * squash])
            .collect();
        fill_polygon(&pts, size, size, |u, v| img.set(u, v, 140));
        img
    };
    Ok(vec![render(1.0), render(0.866), render(0.5)])
}

fn views_for_strategy(views: &[GrayImage], strategy: InputStrategy) -> Vec<Vec<u8>> {
    let picks: &[usize] = match strategy {
        InputStrategy::TwoView | InputStrategy::NoProbability | InputStrategy::Name => &[0, 1],
        InputStrategy::CrossSectionalOnly => &[0],
        InputStrategy::AngledOnly => &[1],
        InputStrategy::ThreeView => &[0, 1, 2],
    };
    picks.iter().map(|&i| views[i].to_png()).collect()
}

/// Ranks every hole for every peg and reports the verdict/probability grid
/// with top-1/2/3 accuracies. Per-cell backend faults are recorded, not
/// fatal.
pub fn run_matching_experiment(
    dataset: &MatchingDataset,
    backend: &dyn MatcherBackend,
    strategy: InputStrategy,
) -> Result<MatchingResults, PipelineError> {
    if dataset.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let n = dataset.len();
    let peg_views: Vec<Vec<GrayImage>> = dataset
        .entries
        .iter()
        .map(|e| shape_views(&e.peg))
        .collect::<Result<_, _>>()?;
    let hole_views: Vec<Vec<GrayImage>> = dataset
        .entries
        .iter()
        .map(|e| shape_views(&e.hole_shape))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(n);
    let (mut top1, mut top2, mut top3) = (0, 0, 0);
    for i in 0..n {
        let peg_entry = &dataset.entries[i];
        let peg_poly = make_shape(&peg_entry.peg)?;
        let peg_images = views_for_strategy(&peg_views[i], strategy);

        let mut responses: Vec<(usize, MatchResponse)> = Vec::new();
        let mut errors: BTreeMap<usize, String> = BTreeMap::new();
        for j in 0..n {
            let hole_entry = &dataset.entries[j];
            let query = MatchQuery {
                prompt: build_prompt(
                    &peg_images,
                    &views_for_strategy(&hole_views[j], strategy),
                    strategy,
                )?,
                geometry: Some(GeometryQuery {
                    peg: peg_poly.clone(),
                    hole: make_hole_polygon(&hole_entry.hole_shape, hole_entry.clearance_mm)?,
                    clearance_mm: hole_entry.clearance_mm,
                    peg_label: peg_entry.peg.label().to_string(),
                    hole_label: hole_entry.hole_shape.label().to_string(),
                    orientation_locked: false,
                }),
            };
            match backend.answer(&query) {
                Ok(resp) => responses.push((j, resp)),
                Err(e) => {
                    errors.insert(j, e.to_string());
                }
            }
        }

        let mut ranking = rank_candidates(&responses);
        let mut failed: Vec<usize> = errors.keys().copied().collect();
        failed.sort_unstable();
        ranking.extend(failed);

        let rank_of = |j: usize| ranking.iter().position(|&r| r == j).unwrap_or(n - 1) + 1;
        let by_index: BTreeMap<usize, &MatchResponse> =
            responses.iter().map(|(j, r)| (*j, r)).collect();
        let cells = (0..n)
            .map(|j| CellRecord {
                verdict: by_index.get(&j).map(|r| r.verdict),
                probability: by_index.get(&j).map(|r| r.probability),
                rank: rank_of(j),
                error: errors.get(&j).cloned(),
            })
            .collect();
        let truth_rank = rank_of(i);
        top1 += usize::from(truth_rank <= 1);
        top2 += usize::from(truth_rank <= 2);
        top3 += usize::from(truth_rank <= 3);
        rows.push(RowRecord {
            peg: peg_entry.peg.display_name(),
            cells,
            ranking,
            truth_rank,
        });
    }

    Ok(MatchingResults {
        strategy,
        confusion: ConfusionMatrix {
            holes: dataset
                .entries
                .iter()
                .map(|e| e.hole_shape.display_name())
                .collect(),
            rows,
        },
        top1,
        top2,
        top3,
        total: n,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub strategy: InputStrategy,
    pub top1: Option<usize>,
    pub top2: Option<usize>,
    pub top3: Option<usize>,
    pub total: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

/// One matching experiment per strategy; a failing strategy yields an error
/// row without aborting the others.
pub fn run_ablation(
    dataset: &MatchingDataset,
    strategies: &[InputStrategy],
    backend: &dyn MatcherBackend,
) -> Result<AblationReport, PipelineError> {
    if dataset.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let rows = strategies
        .iter()
        .map(
            |&strategy| match run_matching_experiment(dataset, backend, strategy) {
                Ok(r) => AblationRow {
                    strategy,
                    top1: Some(r.top1),
                    top2: Some(r.top2),
                    top3: Some(r.top3),
                    total: r.total,
                    error: None,
                },
                Err(e) => AblationRow {
                    strategy,
                    top1: None,
                    top2: None,
                    top3: None,
                    total: dataset.len(),
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    Ok(AblationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::OracleBackend;

    fn small_dataset() -> MatchingDataset {
        MatchingDataset {
            entries: crate::worldgen::standard_peg_set()
                .into_iter()
                .map(|peg| DatasetEntry {
                    hole_shape: peg.clone(),
                    peg,
                    clearance_mm: 0.5,
                })
                .collect(),
        }
    }

    #[test]
    fn single_matching_pair_is_top1() {
        let dataset = MatchingDataset {
            entries: vec![DatasetEntry {
                peg: ShapeSpec::Rectangle {
                    width_mm: 20.0,
                    height_mm: 10.0,
                },
                hole_shape: ShapeSpec::Rectangle {
                    width_mm: 20.0,
                    height_mm: 10.0,
                },
                clearance_mm: 0.5,
            }],
        };
        let r = run_matching_experiment(&dataset, &OracleBackend::new(), InputStrategy::TwoView)
            .unwrap();
        assert_eq!((r.top1, r.total), (1, 1));
    }

    #[test]
    fn standard_set_is_perfectly_identified() {
        let r = run_matching_experiment(
            &small_dataset(),
            &OracleBackend::new(),
            InputStrategy::TwoView,
        )
        .unwrap();
        assert_eq!(r.top1, r.total, "rows: {:#?}", r.confusion.rows);
        assert!(r.top1 <= r.top2 && r.top2 <= r.top3);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let empty = MatchingDataset { entries: vec![] };
        assert!(matches!(
            run_matching_experiment(&empty, &OracleBackend::new(), InputStrategy::TwoView),
            Err(PipelineError::EmptyDataset)
        ));
        assert!(matches!(
            run_ablation(&empty, &[InputStrategy::TwoView], &OracleBackend::new()),
            Err(PipelineError::EmptyDataset)
        ));
    }

    #[test]
    fn single_strategy_ablation_equals_standalone_run() {
        let dataset = small_dataset();
        let standalone =
            run_matching_experiment(&dataset, &OracleBackend::new(), InputStrategy::TwoView)
                .unwrap();
        let ablation =
            run_ablation(&dataset, &[InputStrategy::TwoView], &OracleBackend::new()).unwrap();
        assert_eq!(ablation.rows.len(), 1);
        assert_eq!(ablation.rows[0].top1, Some(standalone.top1));
    }

    #[test]
    fn two_view_dominates_single_views() {
        let dataset = small_dataset();
        let report = run_ablation(
            &dataset,
            &[
                InputStrategy::TwoView,
                InputStrategy::CrossSectionalOnly,
                InputStrategy::AngledOnly,
            ],
            &OracleBackend::new(),
        )
        .unwrap();
        let two_view = report.rows[0].top1.unwrap();
        for row in &report.rows[1..] {
            assert!(
                two_view >= row.top1.unwrap(),
                "{:?} beat two_view",
                row.strategy
            );
        }
    }
}
