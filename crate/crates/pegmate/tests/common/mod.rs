//! Minimal scripted HTTP server standing in for a chat-completions endpoint.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

#[derive(Clone)]
pub enum MockReply {
    /// 200 with this JSON body.
    Json(serde_json::Value),
    /// Bare status code with an empty JSON body.
    Status(u16),
}

pub struct MockVlm {
    addr: SocketAddr,
    /// Captured request bodies. Not every test binary inspects them.
    #[allow(dead_code)]
    pub requests: Arc<Mutex<Vec<serde_json::Value>>>,
    hits: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockVlm {
    /// Serves the scripted replies in order; the last entry repeats.
    pub fn start(script: Vec<MockReply>) -> Self {
        assert!(!script.is_empty());
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
        let addr = listener.local_addr().unwrap();
        listener.set_nonblocking(true).unwrap();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let hits = Arc::new(AtomicUsize::new(0));
        let stop = Arc::new(AtomicBool::new(false));

        let thread_requests = requests.clone();
        let thread_hits = hits.clone();
        let thread_stop = stop.clone();
        let handle = std::thread::spawn(move || {
            while !thread_stop.load(Ordering::Relaxed) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let n = thread_hits.fetch_add(1, Ordering::SeqCst);
                        let reply = script[n.min(script.len() - 1)].clone();
                        handle_connection(stream, reply, &thread_requests);
                    }
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(std::time::Duration::from_millis(2));
                    }
                    Err(_) => break,
                }
            }
        });

        Self {
            addr,
            requests,
            hits,
            stop,
            handle: Some(handle),
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for MockVlm {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn handle_connection(
    mut stream: TcpStream,
    reply: MockReply,
    requests: &Arc<Mutex<Vec<serde_json::Value>>>,
) {
    stream
        .set_read_timeout(Some(std::time::Duration::from_secs(5)))
        .ok();
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end = loop {
        match stream.read(&mut chunk) {
            Ok(0) => return,
            Ok(n) => {
                buf.extend_from_slice(&chunk[..n]);
                if let Some(pos) = find_header_end(&buf) {
                    break pos;
                }
            }
            Err(_) => return,
        }
    };
    let header_text = String::from_utf8_lossy(&buf[..header_end]).to_string();
    let content_length = header_text
        .lines()
        .find_map(|l| {
            let (k, v) = l.split_once(':')?;
            k.eq_ignore_ascii_case("content-length")
                .then(|| v.trim().parse::<usize>().ok())?
        })
        .unwrap_or(0);
    let body_start = header_end + 4;
    while buf.len() < body_start + content_length {
        match stream.read(&mut chunk) {
            Ok(0) => break,
            Ok(n) => buf.extend_from_slice(&chunk[..n]),
            Err(_) => return,
        }
    }
    if let Ok(v) = serde_json::from_slice(&buf[body_start..body_start + content_length]) {
        requests.lock().unwrap().push(v);
    }

    let (status_line, body) = match reply {
        MockReply::Json(v) => ("HTTP/1.1 200 OK".to_string(), v.to_string()),
        MockReply::Status(code) => (format!("HTTP/1.1 {code} Mock"), "{}".to_string()),
    };
    let response = format!(
        "{status_line}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}

fn find_header_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

/// Standard success body for a yes/no answer with first-token logprobs.
pub fn completion_body(text: &str, logprob: Option<f64>, top: &[(&str, f64)]) -> serde_json::Value {
    let mut choice = serde_json::json!({
        "index": 0,
        "message": { "role": "assistant", "content": text },
        "finish_reason": "stop"
    });
    if let Some(lp) = logprob {
        choice["logprobs"] = serde_json::json!({
            "content": [{
                "token": text.split_whitespace().next().unwrap_or(text),
                "logprob": lp,
                "top_logprobs": top
                    .iter()
                    .map(|(t, l)| serde_json::json!({ "token": t, "logprob": l }))
                    .collect::<Vec<_>>(),
            }]
        });
    }
    serde_json::json!({
        "id": "mock-1",
        "object": "chat.completion",
        "model": "llava-onevision",
        "choices": [choice]
    })
}
