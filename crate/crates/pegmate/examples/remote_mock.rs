//! The remote wire contract end to end against a local mock server: one
//! chat-completions request per candidate with interleaved text and base-64
//! image segments, verdicts read back with first-token logprobs.
//!
//! Run with: cargo run --release --example remote_mock
//!
//! Point PEGMATE_VLM_URL at a real endpoint to exercise a live model with
//! the same code path.

use std::io::{Read, Write};
use std::net::TcpListener;

use pegmate::matcher::{
    build_prompt, InputStrategy, MatchQuery, MatcherBackend, RemoteBackend, RemoteConfig,
};
use pegmate::worldgen::{make_board, render_world, RenderConfig, ShapeSpec};

/// Minimal scripted responder: always answers "Yes" with 0.87 probability.
fn spawn_mock() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            // Read headers, then the Content-Length body.
            let header_end = loop {
                match stream.read(&mut chunk) {
                    Ok(0) | Err(_) => break None,
                    Ok(n) => {
                        buf.extend_from_slice(&chunk[..n]);
                        if let Some(p) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                            break Some(p);
                        }
                    }
                }
            };
            let Some(header_end) = header_end else {
                continue;
            };
            let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
            let len: usize = headers
                .lines()
                .find_map(|l| {
                    let (k, v) = l.split_once(':')?;
                    k.eq_ignore_ascii_case("content-length")
                        .then(|| v.trim().parse().ok())?
                })
                .unwrap_or(0);
            while buf.len() < header_end + 4 + len {
                match stream.read(&mut chunk) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => buf.extend_from_slice(&chunk[..n]),
                }
            }
            let body = serde_json::json!({
                "id": "mock", "object": "chat.completion", "model": "llava-onevision",
                "choices": [{
                    "index": 0,
                    "message": { "role": "assistant", "content": "Yes" },
                    "logprobs": { "content": [{
                        "token": "Yes", "logprob": 0.87f64.ln(),
                        "top_logprobs": [
                            { "token": "Yes", "logprob": 0.87f64.ln() },
                            { "token": "No", "logprob": 0.13f64.ln() }
                        ]
                    }]},
                    "finish_reason": "stop"
                }]
            })
            .to_string();
            let resp = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    format!("http://{addr}/v1/chat/completions")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = match RemoteConfig::from_env() {
        Some(cfg) => {
            println!("using endpoint from PEGMATE_VLM_URL: {}", cfg.url);
            cfg
        }
        None => {
            let url = spawn_mock();
            println!("no PEGMATE_VLM_URL set; started a local mock at {url}");
            RemoteConfig::new(url)
        }
    };
    let backend = RemoteBackend::new(cfg)?;

    // Real prompt images from a rendered scene.
    let world = make_board(&ShapeSpec::DShape { diameter_mm: 22.0 }, 0, 0.5, 8)?;
    let scene = render_world(&world, &RenderConfig::default())?;
    let peg_top = scene.peg_views["top"].to_png();
    let peg_angled = scene.peg_views["angled"].to_png();
    let hole_top = scene.views["top"].to_png();
    let hole_angled = scene.views["angled"].to_png();

    let prompt = build_prompt(
        &[peg_top, peg_angled],
        &[hole_top, hole_angled],
        InputStrategy::TwoView,
    )?;
    println!("\nprompt sent to the endpoint:\n---\n{}\n---", prompt.text);

    let response = backend.answer(&MatchQuery {
        prompt,
        geometry: None,
    })?;
    println!(
        "\nresponse: {:?} with p(o_m) = {:.4} ({:?}), raw text {:?}",
        response.verdict, response.probability, response.fidelity, response.raw_text
    );
    Ok(())
}
