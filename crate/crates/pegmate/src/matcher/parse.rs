//! Interpreting backend responses: verdict from the first word, probability
//! from the first generated token's logprob when available.

use serde::{Deserialize, Serialize};

use super::{Fidelity, MatchError, MatchResponse, MatchVerdict};

/// Logprob record of the first generated token, with top alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstTokenLogprobs {
    pub token: String,
    pub logprob: f64,
    #[serde(default)]
    pub top: Vec<TokenLogprob>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
}

fn normalize_word(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(1e-12, 1.0)
}

/// Parses a yes/no answer. The verdict comes from the case-insensitive,
/// punctuation-stripped first word. The probability is the matched token's
/// `exp(logprob)`, renormalized over the yes/no pair when the alternatives
/// list carries both; without logprobs it is pinned to 1.0 and flagged.
pub fn parse_response(
    raw_text: &str,
    logprobs: Option<&FirstTokenLogprobs>,
) -> Result<MatchResponse, MatchError> {
    let first = raw_text
        .split_whitespace()
        .next()
        .map(normalize_word)
        .unwrap_or_default();
    let verdict = match first.as_str() {
        "yes" => MatchVerdict::Yes,
        "no" => MatchVerdict::No,
        _ => {
            return Err(MatchError::Unparseable {
                text: raw_text.to_string(),
            })
        }
    };

    let (probability, fidelity) = match logprobs {
        Some(lp) => {
            let mut p = lp.logprob.exp();
            let mut yes_mass = None;
            let mut no_mass = None;
            for alt in &lp.top {
                match normalize_word(&alt.token).as_str() {
                    "yes" => {
                        yes_mass = Some(yes_mass.unwrap_or(f64::NEG_INFINITY).max(alt.logprob))
                    }
                    "no" => no_mass = Some(no_mass.unwrap_or(f64::NEG_INFINITY).max(alt.logprob)),
                    _ => {}
                }
            }
            if let (Some(y), Some(n)) = (yes_mass, no_mass) {
                let (py, pn) = (y.exp(), n.exp());
                p = match verdict {
                    MatchVerdict::Yes => py / (py + pn),
                    MatchVerdict::No => pn / (py + pn),
                };
            }
            (clamp_probability(p), Fidelity::Logprob)
        }
        None => (1.0, Fidelity::Degraded),
    };

    Ok(MatchResponse {
        verdict,
        probability,
        raw_text: raw_text.to_string(),
        fidelity,
    })
}

/// Parses a name-strategy answer (`"<peg name>, <hole name>"`): the verdict is
/// Yes exactly when the two names are equal, case-insensitively. No synonym
/// table, matching how a truck-vs-car label mismatch fails.
pub fn parse_name_response(raw_text: &str) -> Result<MatchResponse, MatchError> {
    let mut parts = raw_text.splitn(2, ',').map(str::trim);
    let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
        return Err(MatchError::Unparseable {
            text: raw_text.to_string(),
        });
    };
    if a.is_empty() || b.is_empty() {
        return Err(MatchError::Unparseable {
            text: raw_text.to_string(),
        });
    }
    let verdict = if a.eq_ignore_ascii_case(b) {
        MatchVerdict::Yes
    } else {
        MatchVerdict::No
    };
    Ok(MatchResponse {
        verdict,
        probability: 1.0,
        raw_text: raw_text.to_string(),
        fidelity: Fidelity::Degraded,
    })
}
