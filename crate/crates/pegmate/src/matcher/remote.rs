//! Remote VLM backend over a chat-completions-style wire contract.
//!
//! One request per candidate: a single user message whose content interleaves
//! base-64 PNG image segments and text segments in prompt order, `max_tokens`
//! of 1 for yes/no strategies, and logprobs requested with the top-5
//! alternatives. The verdict is read from the first choice's text and the
//! probability from its first generated token.

use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};

use super::parse::{parse_name_response, parse_response, FirstTokenLogprobs, TokenLogprob};
use super::{InputStrategy, MatchError, MatchQuery, MatchResponse, MatcherBackend, PromptBundle};

pub const URL_ENV: &str = "PEGMATE_VLM_URL";
pub const TOKEN_ENV: &str = "PEGMATE_VLM_TOKEN";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub url: String,
    pub token: Option<String>,
    pub model: String,
    /// Total attempts per query on transport failure.
    pub max_attempts: u32,
    /// Initial backoff; doubles per retry.
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token: None,
            model: "llava-onevision".to_string(),
            max_attempts: 3,
            backoff_ms: 250,
            timeout_ms: 30_000,
        }
    }

    /// Reads `PEGMATE_VLM_URL` / `PEGMATE_VLM_TOKEN`; `None` without a URL.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var(URL_ENV).ok()?;
        let mut cfg = Self::new(url);
        cfg.token = std::env::var(TOKEN_ENV).ok();
        Some(cfg)
    }
}

pub struct RemoteBackend {
    cfg: RemoteConfig,
    client: reqwest::blocking::Client,
}

// ── Wire types ────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage>,
    max_tokens: u32,
    logprobs: bool,
    top_logprobs: u32,
}

#[derive(Serialize)]
struct WireMessage {
    role: &'static str,
    content: Vec<WireSegment>,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum WireSegment {
    Text { text: String },
    ImageUrl { image_url: WireImageUrl },
}

#[derive(Serialize)]
struct WireImageUrl {
    url: String,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
    logprobs: Option<WireLogprobs>,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    content: String,
}

#[derive(Deserialize)]
struct WireLogprobs {
    content: Vec<WireTokenLogprob>,
}

#[derive(Deserialize)]
struct WireTokenLogprob {
    token: String,
    logprob: f64,
    #[serde(default)]
    top_logprobs: Vec<WireTopLogprob>,
}

#[derive(Deserialize)]
struct WireTopLogprob {
    token: String,
    logprob: f64,
}

/// Splits the prompt into wire segments: each `<imageN>` marker becomes an
/// image segment followed by that line's text, in prompt order.
fn interleave_segments(prompt: &PromptBundle) -> Vec<WireSegment> {
    let b64 = base64::engine::general_purpose::STANDARD;
    let mut segments = Vec::new();
    for line in prompt.text.lines() {
        if let Some(rest) = line.strip_prefix("<image") {
            if let Some(close) = rest.find('>') {
                if let Ok(slot) = rest[..close].parse::<usize>() {
                    if let Some(img) = prompt.images.iter().find(|i| i.slot == slot) {
                        segments.push(WireSegment::ImageUrl {
                            image_url: WireImageUrl {
                                url: format!("data:image/png;base64,{}", b64.encode(&img.png)),
                            },
                        });
                        let text = rest[close + 1..].trim_start();
                        if !text.is_empty() {
                            segments.push(WireSegment::Text {
                                text: text.to_string(),
                            });
                        }
                        continue;
                    }
                }
            }
        }
        segments.push(WireSegment::Text {
            text: line.to_string(),
        });
    }
    segments
}

impl RemoteBackend {
    pub fn new(cfg: RemoteConfig) -> Result<Self, MatchError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| MatchError::Transport {
                detail: e.to_string(),
                attempts: 0,
            })?;
        Ok(Self { cfg, client })
    }

    fn send(
        &self,
        body: &WireRequest,
        strategy: InputStrategy,
    ) -> Result<MatchResponse, MatchError> {
        let mut last_detail = String::new();
        for attempt in 1..=self.cfg.max_attempts {
            if attempt > 1 {
                let backoff = self.cfg.backoff_ms << (attempt - 2);
                std::thread::sleep(Duration::from_millis(backoff));
            }
            let mut req = self.client.post(&self.cfg.url).json(body);
            if let Some(token) = &self.cfg.token {
                req = req.bearer_auth(token);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let wire: WireResponse =
                            resp.json().map_err(|e| MatchError::Unparseable {
                                text: format!("bad response body: {e}"),
                            })?;
                        return interpret(wire, strategy);
                    }
                    if status.is_server_error() {
                        last_detail = format!("status {status}");
                        continue;
                    }
                    let body_text = resp.text().unwrap_or_default();
                    return Err(MatchError::BadStatus {
                        status: status.as_u16(),
                        body: body_text,
                    });
                }
                Err(e) => {
                    last_detail = e.to_string();
                    continue;
                }
            }
        }
        Err(MatchError::Transport {
            detail: last_detail,
            attempts: self.cfg.max_attempts,
        })
    }
}

fn interpret(wire: WireResponse, strategy: InputStrategy) -> Result<MatchResponse, MatchError> {
    let choice = wire
        .choices
        .into_iter()
        .next()
        .ok_or(MatchError::Unparseable {
            text: "response carried no choices".into(),
        })?;
    let text = choice.message.content;
    if strategy == InputStrategy::Name {
        return parse_name_response(&text);
    }
    let logprobs = choice
        .logprobs
        .and_then(|lp| lp.content.into_iter().next())
        .map(|t| FirstTokenLogprobs {
            token: t.token,
            logprob: t.logprob,
            top: t
                .top_logprobs
                .into_iter()
                .map(|a| TokenLogprob {
                    token: a.token,
                    logprob: a.logprob,
                })
                .collect(),
        });
    parse_response(&text, logprobs.as_ref())
}

impl MatcherBackend for RemoteBackend {
    fn returns_logprobs(&self) -> bool {
        true
    }

    fn answer(&self, query: &MatchQuery) -> Result<MatchResponse, MatchError> {
        let prompt = &query.prompt;
        let max_tokens = if prompt.strategy == InputStrategy::Name {
            24
        } else {
            1
        };
        let body = WireRequest {
            model: &self.cfg.model,
            messages: vec![WireMessage {
                role: "user",
                content: interleave_segments(prompt),
            }],
            max_tokens,
            logprobs: true,
            top_logprobs: 5,
        };
        self.send(&body, prompt.strategy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::build_prompt;

    #[test]
    fn segments_interleave_in_slot_order() {
        let prompt = build_prompt(
            &[vec![1], vec![2]],
            &[vec![3], vec![4]],
            InputStrategy::TwoView,
        )
        .unwrap();
        let segs = interleave_segments(&prompt);
        // 4 image+text line pairs plus 2 trailing text lines.
        assert_eq!(segs.len(), 10);
        let kinds: Vec<bool> = segs
            .iter()
            .map(|s| matches!(s, WireSegment::ImageUrl { .. }))
            .collect();
        assert_eq!(
            kinds,
            vec![true, false, true, false, true, false, true, false, false, false]
        );
    }

    #[test]
    fn image_segments_are_base64_data_urls() {
        let prompt = build_prompt(
            &[vec![0xAB]],
            &[vec![0xCD]],
            InputStrategy::CrossSectionalOnly,
        )
        .unwrap();
        let segs = interleave_segments(&prompt);
        let WireSegment::ImageUrl { image_url } = &segs[0] else {
            panic!("first segment must be the image");
        };
        assert!(image_url.url.starts_with("data:image/png;base64,"));
    }
}
