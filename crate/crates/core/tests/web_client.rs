//! WebClient against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use law_core::attribution::{CachedClient, LlmClient, LlmError, ReferenceSource, RetryPolicy, WebClient, WebConfig};

#[derive(Clone)]
struct Reply {
    status: u16,
    body: String,
}

fn ok(content: &str) -> Reply {
    Reply {
        status: 200,
        body: serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string(),
    }
}

fn status(code: u16) -> Reply {
    Reply {
        status: code,
        body: r#"{"error":"nope"}"#.into(),
    }
}

struct Recorded {
    headers: Vec<String>,
    body: serde_json::Value,
}

#[derive(Default)]
struct State {
    requests: Mutex<Vec<Recorded>>,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

struct MockServer {
    url: String,
    state: Arc<State>,
}

impl MockServer {
    /// Serves `script` in order; the last reply repeats once the script
    /// runs out.
    fn start(script: Vec<Reply>, latency: Duration) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let state = Arc::new(State::default());
        let script = Arc::new(Mutex::new((script, 0usize)));
        let st = state.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (st, script) = (st.clone(), script.clone());
                thread::spawn(move || handle(stream, &st, &script, latency));
            }
        });
        Self { url, state }
    }

    fn request_count(&self) -> usize {
        self.state.requests.lock().unwrap().len()
    }
}

fn handle(stream: TcpStream, st: &State, script: &Mutex<(Vec<Reply>, usize)>, latency: Duration) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut headers = Vec::new();
    let mut len = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end().to_string();
        if line.is_empty() {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        headers.push(line);
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();

    let now = st.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    st.max_in_flight.fetch_max(now, Ordering::SeqCst);
    let reply = {
        let mut s = script.lock().unwrap();
        let idx = s.1.min(s.0.len() - 1);
        s.1 += 1;
        s.0[idx].clone()
    };
    st.requests.lock().unwrap().push(Recorded {
        headers,
        body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
    });
    thread::sleep(latency);
    st.in_flight.fetch_sub(1, Ordering::SeqCst);

    let mut out = stream;
    let _ = write!(
        out,
        "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        reply.body.len(),
        reply.body
    );
}

fn client(url: &str, max_in_flight: usize) -> WebClient {
    WebClient::new(WebConfig {
        endpoint: url.to_string(),
        api_key: Some("sk-test".into()),
        model: "test-model".into(),
        max_in_flight,
        retry: RetryPolicy {
            base_delay: Duration::from_millis(5),
            factor: 2,
            max_retries: 3,
        },
        timeout: Duration::from_secs(10),
    })
    .unwrap()
}

#[test]
fn sends_single_user_message_at_temperature_zero() {
    let server = MockServer::start(vec![ok("Generated manuscript. It is long.")], Duration::ZERO);
    let c = client(&server.url, 1);
    let out = c.complete("d1", "the prompt").unwrap();
    assert_eq!(out.text, "Generated manuscript. It is long.");
    assert_eq!(out.source, ReferenceSource::WebApi);

    let reqs = server.state.requests.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    let body = &reqs[0].body;
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0);
    assert_eq!(body["messages"].as_array().unwrap().len(), 1);
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "the prompt");
    assert!(reqs[0]
        .headers
        .iter()
        .any(|h| h.eq_ignore_ascii_case("authorization: Bearer sk-test")));
}

#[test]
fn transient_failures_are_retried() {
    let server = MockServer::start(vec![status(503), status(429), ok("fine.")], Duration::ZERO);
    let out = client(&server.url, 1).complete("d", "p").unwrap();
    assert_eq!(out.text, "fine.");
    assert_eq!(server.request_count(), 3);
}

#[test]
fn retries_are_bounded() {
    let server = MockServer::start(vec![status(500)], Duration::ZERO);
    match client(&server.url, 1).complete("d", "p") {
        Err(LlmError::ApiError { status, attempts, .. }) => {
            assert_eq!(status, Some(500));
            assert_eq!(attempts, 4);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(server.request_count(), 4);
}

#[test]
fn client_errors_are_not_retried() {
    let server = MockServer::start(vec![status(401)], Duration::ZERO);
    match client(&server.url, 1).complete("d", "p") {
        Err(LlmError::ApiError { status, attempts, .. }) => {
            assert_eq!(status, Some(401));
            assert_eq!(attempts, 1);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(server.request_count(), 1);
}

#[test]
fn unreachable_endpoint_exhausts_retries() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let c = client(&format!("http://127.0.0.1:{port}/v1"), 1);
    match c.complete("d", "p") {
        Err(LlmError::ApiError {
            status: None,
            attempts: 4,
            ..
        }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn empty_completion_is_an_error() {
    let server = MockServer::start(vec![ok("")], Duration::ZERO);
    assert!(matches!(
        client(&server.url, 1).complete("d", "p"),
        Err(LlmError::EmptyCompletion)
    ));
}

#[test]
fn in_flight_requests_are_capped() {
    let server = MockServer::start(vec![ok("text.")], Duration::from_millis(60));
    let c = Arc::new(client(&server.url, 2));
    let handles: Vec<_> = (0..6)
        .map(|i| {
            let c = c.clone();
            thread::spawn(move || c.complete(&format!("d{i}"), "p").unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(server.request_count(), 6);
    let max = server.state.max_in_flight.load(Ordering::SeqCst);
    assert!(max <= 2, "observed {max} concurrent requests");
}

#[test]
fn cache_serves_repeat_requests_offline() {
    let server = MockServer::start(vec![ok("Cached body.")], Duration::ZERO);
    let dir = tempfile::tempdir().unwrap();
    let c = CachedClient::new(client(&server.url, 1), dir.path());
    assert!(!c.is_cached("doc-1"));
    let first = c.complete("doc-1", "p").unwrap();
    assert_eq!(first.source, ReferenceSource::WebApi);
    assert!(c.is_cached("doc-1"));
    let second = c.complete("doc-1", "p").unwrap();
    assert_eq!(second.source, ReferenceSource::Fixture);
    assert_eq!(second.text, "Cached body.");
    assert_eq!(server.request_count(), 1);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("doc-1.txt")).unwrap(),
        "Cached body."
    );
    assert!(matches!(c.complete("../escape", "p"), Err(LlmError::InvalidDocId(_))));
}

#[test]
fn cache_does_not_store_failures() {
    let server = MockServer::start(vec![status(400)], Duration::ZERO);
    let dir = tempfile::tempdir().unwrap();
    let c = CachedClient::new(client(&server.url, 1), dir.path());
    assert!(c.complete("doc-1", "p").is_err());
    assert!(!c.is_cached("doc-1"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
