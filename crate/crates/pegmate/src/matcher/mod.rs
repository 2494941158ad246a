//! Peg-hole matching: prompt construction, a pluggable backend (remote VLM
//! or deterministic geometric oracle), response parsing with generation
//! probabilities, and confidence ranking.

mod oracle;
mod parse;
mod prompt;
mod rank;
mod remote;

pub use oracle::OracleBackend;
pub use parse::{parse_name_response, parse_response, FirstTokenLogprobs, TokenLogprob};
pub use prompt::{build_prompt, PromptBundle, PromptImage, TWO_VIEW_TEMPLATE};
pub use rank::rank_candidates;
pub use remote::{RemoteBackend, RemoteConfig, TOKEN_ENV, URL_ENV};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Polygon2D};

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("{strategy:?} expects {expected_pegs} peg and {expected_holes} hole images, got {got_pegs}/{got_holes}")]
    ArityMismatch {
        strategy: InputStrategy,
        expected_pegs: usize,
        expected_holes: usize,
        got_pegs: usize,
        got_holes: usize,
    },
    #[error("unparseable response: {text:?}")]
    Unparseable { text: String },
    #[error("transport failure after {attempts} attempts: {detail}")]
    Transport { detail: String, attempts: u32 },
    #[error("endpoint returned status {status}: {body}")]
    BadStatus { status: u16, body: String },
    #[error("backend requires shape geometry but the query carries none")]
    MissingGeometry,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Binary verdict of one compatibility query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchVerdict {
    Yes,
    No,
}

/// Whether the probability came from real token logprobs or was pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    Logprob,
    /// No logprobs available; probability is pinned to 1.0.
    Degraded,
}

/// One backend answer: verdict plus the generation probability of the
/// emitted token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResponse {
    pub verdict: MatchVerdict,
    /// In (0, 1]; exactly 1.0 when fidelity is degraded.
    pub probability: f64,
    pub raw_text: String,
    pub fidelity: Fidelity,
}

/// How images are selected and the output is processed (the ablation axes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputStrategy {
    /// Cross-sectional plus angled view per part, probability ranking.
    #[default]
    TwoView,
    CrossSectionalOnly,
    AngledOnly,
    ThreeView,
    /// Ask for part names and match on string equality.
    Name,
    /// Binary output only; probabilities discarded.
    NoProbability,
}

impl InputStrategy {
    /// (peg images, hole images) expected by the prompt.
    pub fn image_arity(&self) -> (usize, usize) {
        match self {
            InputStrategy::TwoView | InputStrategy::NoProbability | InputStrategy::Name => (2, 2),
            InputStrategy::CrossSectionalOnly | InputStrategy::AngledOnly => (1, 1),
            InputStrategy::ThreeView => (3, 3),
        }
    }
}

/// Shape-level payload for the geometric oracle. Carried alongside the
/// prompt so the same query runs against either backend.
#[derive(Debug, Clone)]
pub struct GeometryQuery {
    pub peg: Polygon2D,
    pub hole: Polygon2D,
    pub clearance_mm: f64,
    pub peg_label: String,
    pub hole_label: String,
    /// When set, compatibility is judged at the orientation shown (no yaw
    /// sweep); this is how the four-rotation yaw queries are posed.
    pub orientation_locked: bool,
}

/// One compatibility question: the prompt the remote backend sends, plus
/// optional geometry for the oracle.
#[derive(Debug, Clone)]
pub struct MatchQuery {
    pub prompt: PromptBundle,
    pub geometry: Option<GeometryQuery>,
}

/// A backend that answers compatibility queries.
pub trait MatcherBackend: Sync {
    /// Whether responses carry real token logprobs.
    fn returns_logprobs(&self) -> bool;
    /// Backends that cannot tolerate concurrent calls declare themselves
    /// serial; callers must then issue queries from one thread.
    fn supports_concurrent_queries(&self) -> bool {
        true
    }
    fn answer(&self, query: &MatchQuery) -> Result<MatchResponse, MatchError>;
}

/// Query for one candidate hole, keyed by its candidate index.
#[derive(Debug, Clone)]
pub struct CandidateQuery {
    pub index: usize,
    pub query: MatchQuery,
}

/// Full matching outturn for one peg against all candidates.
#[derive(Debug, Clone)]
pub struct MatchOutcome {
    /// Candidate indices, best first. Failed candidates rank last.
    pub ranking: Vec<usize>,
    /// Successful responses in query order.
    pub responses: Vec<(usize, MatchResponse)>,
    /// Candidates whose query irrecoverably failed, with the error text.
    pub failures: Vec<(usize, String)>,
    /// No-probability mode produced multiple Yes answers; ranking fell back
    /// to candidate-index order within each verdict class.
    pub ambiguous: bool,
}

impl MatchOutcome {
    pub fn selected(&self) -> Option<usize> {
        self.ranking.first().copied()
    }
}

/// Queries every candidate and ranks them; the first element of the ranking
/// is the selected hole. Per-candidate failures are recorded and ranked
/// last rather than aborting the match.
pub fn match_hole(
    queries: &[CandidateQuery],
    backend: &dyn MatcherBackend,
) -> Result<MatchOutcome, MatchError> {
    if queries.is_empty() {
        return Err(MatchError::Unparseable {
            text: "no candidates to match".into(),
        });
    }
    let mut responses: Vec<(usize, MatchResponse)> = Vec::with_capacity(queries.len());
    let mut failures: Vec<(usize, String)> = Vec::new();
    for cq in queries {
        match backend.answer(&cq.query) {
            Ok(resp) => responses.push((cq.index, resp)),
            Err(e) => {
                log::warn!("candidate {}: query failed: {e}", cq.index);
                failures.push((cq.index, e.to_string()));
            }
        }
    }

    let no_probability = queries[0].query.prompt.strategy == InputStrategy::NoProbability;
    let ambiguous = no_probability
        && responses
            .iter()
            .filter(|(_, r)| r.verdict == MatchVerdict::Yes)
            .count()
            >= 2;

    let mut ranking = rank_candidates(&responses);
    let mut failed: Vec<usize> = failures.iter().map(|(i, _)| *i).collect();
    failed.sort_unstable();
    ranking.extend(failed);

    Ok(MatchOutcome {
        ranking,
        responses,
        failures,
        ambiguous,
    })
}
