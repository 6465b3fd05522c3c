//! Reference-manuscript backends: a directory of cached completions and a
//! chat-completion web endpoint, plus a read-through cache that combines
//! the two.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::Duration;
use thiserror::Error;

pub const ENV_ENDPOINT: &str = "LAW_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "LAW_LLM_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    WebApi,
    Fixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub source: ReferenceSource,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no fixture reference for document \"{0}\"")]
    FixtureMissing(String),
    #[error("completion API failed after {attempts} attempt(s){}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    ApiError {
        status: Option<u16>,
        attempts: u32,
        message: String,
    },
    #[error("LLM returned an empty completion")]
    EmptyCompletion,
    #[error("doc_id \"{0}\" cannot be used as a fixture file name")]
    InvalidDocId(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("LLM backend misconfigured: {0}")]
    Config(String),
}

impl LlmError {
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::FixtureMissing(_) => "FixtureMissing",
            LlmError::ApiError { .. } => "ApiError",
            LlmError::EmptyCompletion => "EmptyCompletion",
            LlmError::InvalidDocId(_) => "InvalidDocId",
            LlmError::Io { .. } => "Io",
            LlmError::Config(_) => "Config",
        }
    }
}

/// Produces the reference manuscript for a prompt. `doc_id` keys the
/// fixture cache; web backends ignore it.
pub trait LlmClient: Send + Sync {
    fn complete(&self, doc_id: &str, prompt: &str) -> Result<Completion, LlmError>;
}

impl<T: LlmClient + ?Sized> LlmClient for Box<T> {
    fn complete(&self, doc_id: &str, prompt: &str) -> Result<Completion, LlmError> {
        (**self).complete(doc_id, prompt)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for std::sync::Arc<T> {
    fn complete(&self, doc_id: &str, prompt: &str) -> Result<Completion, LlmError> {
        (**self).complete(doc_id, prompt)
    }
}

fn fixture_path(dir: &Path, doc_id: &str) -> Result<PathBuf, LlmError> {
    if doc_id.is_empty() || doc_id.contains(['/', '\\']) || doc_id == "." || doc_id == ".." {
        return Err(LlmError::InvalidDocId(doc_id.to_string()));
    }
    Ok(dir.join(format!("{doc_id}.txt")))
}

fn read_fixture(dir: &Path, doc_id: &str) -> Result<Option<String>, LlmError> {
    let path = fixture_path(dir, doc_id)?;
    match fs::read(&path) {
        Ok(bytes) => String::from_utf8(bytes).map(Some).map_err(|e| LlmError::Io {
            path,
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(LlmError::Io { path, source }),
    }
}

/// Serves `<doc_id>.txt` from a directory.
#[derive(Debug, Clone)]
pub struct FixtureClient {
    dir: PathBuf,
}

impl FixtureClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl LlmClient for FixtureClient {
    fn complete(&self, doc_id: &str, _prompt: &str) -> Result<Completion, LlmError> {
        match read_fixture(&self.dir, doc_id)? {
            Some(text) => Ok(Completion {
                text,
                source: ReferenceSource::Fixture,
            }),
            None => Err(LlmError::FixtureMissing(doc_id.to_string())),
        }
    }
}

/// Exponential backoff for transient API failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub base_delay: Duration,
    pub factor: u32,
    pub max_retries: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            base_delay: Duration::from_secs(1),
            factor: 2,
            max_retries: 3,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based).
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay * self.factor.pow(retry)
    }
}

/// Counting semaphore capping in-flight requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(cap: usize) -> Self {
        Self {
            free: Mutex::new(cap.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone)]
pub struct WebConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl WebConfig {
    /// Endpoint and key from `LAW_LLM_ENDPOINT` / `LAW_LLM_API_KEY`.
    pub fn from_env(model: &str, max_in_flight: usize) -> Result<Self, LlmError> {
        let endpoint =
            std::env::var(ENV_ENDPOINT).map_err(|_| LlmError::Config(format!("{ENV_ENDPOINT} is not set")))?;
        let api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        Ok(Self {
            endpoint,
            api_key,
            model: model.to_string(),
            max_in_flight,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(600),
        })
    }
}

/// Chat-completion client: one user message, temperature 0.
pub struct WebClient {
    cfg: WebConfig,
    http: reqwest::blocking::Client,
    gate: Gate,
}

enum Attempt {
    Done(String),
    Transient(Option<u16>, String),
    Fatal(Option<u16>, String),
}

impl WebClient {
    pub fn new(cfg: WebConfig) -> Result<Self, LlmError> {
        if cfg.model.is_empty() {
            return Err(LlmError::Config("model name is empty".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        let gate = Gate::new(cfg.max_in_flight);
        Ok(Self { cfg, http, gate })
    }

    pub fn request_body(&self, prompt: &str) -> serde_json::Value {
        json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        })
    }

    fn attempt(&self, body: &serde_json::Value) -> Attempt {
        let mut req = self.http.post(&self.cfg.endpoint).json(body);
        if let Some(key) = &self.cfg.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) if e.is_builder() => return Attempt::Fatal(None, e.to_string()),
            Err(e) => return Attempt::Transient(None, e.to_string()),
        };
        let status = resp.status();
        let code = Some(status.as_u16());
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Transient(code, e.to_string()),
        };
        if status.is_success() {
            return match completion_text(&text) {
                Some(content) => Attempt::Done(content),
                None => Attempt::Fatal(code, "response has no choices[0].message.content".into()),
            };
        }
        let transient = status.is_server_error() || status.as_u16() == 429 || status.as_u16() == 408;
        let message = text.chars().take(500).collect();
        if transient {
            Attempt::Transient(code, message)
        } else {
            Attempt::Fatal(code, message)
        }
    }
}

fn completion_text(body: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(body).ok()?;
    let content = v.get("choices")?.get(0)?.get("message")?.get("content")?;
    Some(content.as_str().unwrap_or_default().to_string())
}

impl LlmClient for WebClient {
    fn complete(&self, _doc_id: &str, prompt: &str) -> Result<Completion, LlmError> {
        let body = self.request_body(prompt);
        let _permit = self.gate.acquire();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Attempt::Done(text) if text.is_empty() => return Err(LlmError::EmptyCompletion),
                Attempt::Done(text) => {
                    return Ok(Completion {
                        text,
                        source: ReferenceSource::WebApi,
                    })
                }
                Attempt::Fatal(status, message) => {
                    return Err(LlmError::ApiError {
                        status,
                        attempts,
                        message,
                    })
                }
                Attempt::Transient(status, message) => {
                    let retry = attempts - 1;
                    if retry >= self.cfg.retry.max_retries {
                        return Err(LlmError::ApiError {
                            status,
                            attempts,
                            message,
                        });
                    }
                    std::thread::sleep(self.cfg.retry.delay(retry));
                }
            }
        }
    }
}

/// Read-through cache: serves `<doc_id>.txt` when present, otherwise asks
/// the inner client and stores the completion atomically.
pub struct CachedClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: LlmClient> CachedClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        Self { inner, dir: dir.into() }
    }

    pub fn is_cached(&self, doc_id: &str) -> bool {
        fixture_path(&self.dir, doc_id).map(|p| p.is_file()).unwrap_or(false)
    }
}

impl<C: LlmClient> LlmClient for CachedClient<C> {
    fn complete(&self, doc_id: &str, prompt: &str) -> Result<Completion, LlmError> {
        if let Some(text) = read_fixture(&self.dir, doc_id)? {
            return Ok(Completion {
                text,
                source: ReferenceSource::Fixture,
            });
        }
        let completion = self.inner.complete(doc_id, prompt)?;
        if completion.text.is_empty() {
            return Err(LlmError::EmptyCompletion);
        }
        write_atomic(&fixture_path(&self.dir, doc_id)?, completion.text.as_bytes())?;
        Ok(completion)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LlmError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |source| LlmError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
