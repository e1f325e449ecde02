//! Uniform access to chat generation, text embedding and passage reranking.
//!
//! The [`Gateway`] wraps a [`ModelBackend`] (a live HTTP inference server or
//! the deterministic mock) and adds the cross-cutting behavior every caller
//! relies on: bounded retries with backoff for transport and schema
//! failures, strict JSON validation of structured replies, unit
//! normalization and dimension checking of embeddings, a total ordering on
//! rerank results, an in-flight concurrency cap, and call metrics.

pub mod http;
pub mod mock;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingVector;
use crate::error::{Error, Result};

pub use http::{HttpBackend, HttpEndpoint};
pub use mock::{MockBackend, MockPlaybook, RecordedCall};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub text: String,
}

impl ChatMessage {
    pub fn system(text: impl Into<String>) -> Self {
        Self { role: Role::System, text: text.into() }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self { role: Role::User, text: text.into() }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Self { role: Role::Assistant, text: text.into() }
    }
}

/// A single chat call. `tag` routes the request in the mock playbook and
/// labels it in logs; `response_schema` names the JSON shape the reply must
/// parse under (the prompt itself recites the shape).
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub tag: String,
    pub messages: Vec<ChatMessage>,
    /// Sampling temperature; `None` means the configured default (0.1).
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub response_schema: Option<String>,
}

impl ChatRequest {
    pub fn new(tag: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self {
            tag: tag.into(),
            messages,
            temperature: None,
            max_tokens: None,
            response_schema: None,
        }
    }

    pub fn with_schema(mut self, schema: impl Into<String>) -> Self {
        self.response_schema = Some(schema.into());
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(Error::InvalidRequest("chat request has no messages".into()));
        }
        if self.messages[0].role == Role::Assistant {
            return Err(Error::InvalidRequest(
                "first message must be system or user".into(),
            ));
        }
        if let Some(t) = self.temperature {
            if !(0.0..=2.0).contains(&t) {
                return Err(Error::InvalidRequest(format!(
                    "temperature {t} outside [0, 2]"
                )));
            }
        }
        if self.max_tokens == Some(0) {
            return Err(Error::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

/// One reranked candidate. Ordering is total: score descending, ties broken
/// by candidate id ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankScore {
    pub candidate_id: String,
    pub score: f64,
}

/// Backend capability surface. Implementations must be deterministic for a
/// fixed identity (the mock is bitwise so; live servers are expected to be
/// run with deterministic decoding).
pub trait ModelBackend: Send + Sync {
    fn chat(&self, req: &ChatRequest, temperature: f64) -> Result<String>;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
    /// One raw score per candidate, in input order.
    fn rerank(&self, query: &str, candidates: &[(String, String)]) -> Result<Vec<f64>>;
    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub temperature_default: f64,
    /// Maximum attempts per call (transport and schema failures alike).
    pub retry_cap: u32,
    pub backoff_base_ms: u64,
    /// Maximum in-flight backend calls across all threads.
    pub concurrency_cap: usize,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            temperature_default: 0.1,
            retry_cap: 3,
            backoff_base_ms: 200,
            concurrency_cap: 8,
        }
    }
}

#[derive(Debug, Default)]
pub struct GatewayMetrics {
    pub chat_calls: AtomicU64,
    pub embed_calls: AtomicU64,
    pub rerank_calls: AtomicU64,
    pub retries: AtomicU64,
    pub failures: AtomicU64,
}

impl GatewayMetrics {
    pub fn snapshot(&self) -> (u64, u64, u64, u64, u64) {
        (
            self.chat_calls.load(Ordering::Relaxed),
            self.embed_calls.load(Ordering::Relaxed),
            self.rerank_calls.load(Ordering::Relaxed),
            self.retries.load(Ordering::Relaxed),
            self.failures.load(Ordering::Relaxed),
        )
    }
}

struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Self {
            permits: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut p = self.permits.lock().unwrap();
        while *p == 0 {
            p = self.cv.wait(p).unwrap();
        }
        *p -= 1;
        SemaphoreGuard { sem: self }
    }
}

struct SemaphoreGuard<'a> {
    sem: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        let mut p = self.sem.permits.lock().unwrap();
        *p += 1;
        self.sem.cv.notify_one();
    }
}

/// Shared, thread-safe front door to the configured model backend.
pub struct Gateway {
    backend: std::sync::Arc<dyn ModelBackend>,
    // Kept separately so tests can inspect recorded mock traffic.
    mock: Option<std::sync::Arc<MockBackend>>,
    config: GatewayConfig,
    metrics: GatewayMetrics,
    semaphore: Semaphore,
    // First embedding dimension seen this run; later batches must match.
    embed_dim: Mutex<Option<usize>>,
    // embed is a pure function of (text, backend identity); the cache both
    // enforces that for live backends and avoids re-embedding dossier chunks.
    embed_cache: Mutex<HashMap<String, EmbeddingVector>>,
}

impl Gateway {
    pub fn new(backend: std::sync::Arc<dyn ModelBackend>, config: GatewayConfig) -> Self {
        let cap = config.concurrency_cap;
        Self {
            backend,
            mock: None,
            config,
            metrics: GatewayMetrics::default(),
            semaphore: Semaphore::new(cap),
            embed_dim: Mutex::new(None),
            embed_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_mock(playbook: MockPlaybook) -> Self {
        Self::with_mock_config(
            playbook,
            GatewayConfig {
                backoff_base_ms: 1,
                ..GatewayConfig::default()
            },
        )
    }

    pub fn with_mock_config(playbook: MockPlaybook, config: GatewayConfig) -> Self {
        let mock = std::sync::Arc::new(MockBackend::new(playbook));
        let mut gw = Self::new(mock.clone(), config);
        gw.mock = Some(mock);
        gw
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.name()
    }

    pub fn metrics(&self) -> &GatewayMetrics {
        &self.metrics
    }

    /// Recorded calls, when the backend is the mock. Used by isolation tests.
    pub fn recorded_calls(&self) -> Vec<RecordedCall> {
        self.mock.as_ref().map(|m| m.recorded()).unwrap_or_default()
    }

    /// Chat completion. With a `response_schema` set the reply must contain a
    /// parseable JSON object; malformed replies are retried up to the cap and
    /// then fail with a schema violation. The returned string is the raw
    /// reply (schema'd calls return the extracted JSON text).
    pub fn chat(&self, req: &ChatRequest) -> Result<String> {
        self.chat_raw_validated(req).map(|(text, _)| text)
    }

    /// Chat completion parsed into `T`. Parse failures count as schema
    /// violations and are retried like transport errors.
    pub fn chat_json<T: DeserializeOwned>(&self, req: &ChatRequest) -> Result<T> {
        self.chat_json_raw(req).map(|(value, _)| value)
    }

    /// Like [`chat_json`](Self::chat_json) but also returns the raw reply
    /// text for provenance.
    pub fn chat_json_raw<T: DeserializeOwned>(&self, req: &ChatRequest) -> Result<(T, String)> {
        req.validate()?;
        let temperature = req.temperature.unwrap_or(self.config.temperature_default);
        self.metrics.chat_calls.fetch_add(1, Ordering::Relaxed);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let raw = {
                let _permit = self.semaphore.acquire();
                self.backend.chat(req, temperature)
            };
            match raw {
                Ok(reply) => match extract_json(&reply)
                    .and_then(|v| {
                        serde_json::from_value::<T>(v)
                            .map_err(|e| Error::malformed("structured reply", e.to_string()))
                    }) {
                    Ok(value) => return Ok((value, reply)),
                    Err(e) if attempt < self.config.retry_cap => {
                        self.note_retry(&req.tag, attempt, &e);
                    }
                    Err(e) => {
                        self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                        return Err(Error::SchemaViolation {
                            tag: req.tag.clone(),
                            attempts: attempt,
                            message: e.to_string(),
                        });
                    }
                },
                Err(e) if e.is_retryable() && attempt < self.config.retry_cap => {
                    self.note_retry(&req.tag, attempt, &e);
                }
                Err(e) => {
                    self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(match e {
                        Error::Transport { message, .. } => Error::Transport {
                            attempts: attempt,
                            message,
                        },
                        other => other,
                    });
                }
            }
        }
    }

    fn chat_raw_validated(&self, req: &ChatRequest) -> Result<(String, String)> {
        if req.response_schema.is_some() {
            // Structured call: the extracted JSON text is the reply.
            let (value, raw): (serde_json::Value, String) = self.chat_json_raw(req)?;
            if !value.is_object() {
                return Err(Error::SchemaViolation {
                    tag: req.tag.clone(),
                    attempts: self.config.retry_cap,
                    message: "reply is valid JSON but not an object".into(),
                });
            }
            Ok((value.to_string(), raw))
        } else {
            req.validate()?;
            let temperature = req.temperature.unwrap_or(self.config.temperature_default);
            self.metrics.chat_calls.fetch_add(1, Ordering::Relaxed);
            let mut attempt = 0u32;
            loop {
                attempt += 1;
                let raw = {
                    let _permit = self.semaphore.acquire();
                    self.backend.chat(req, temperature)
                };
                match raw {
                    Ok(reply) => return Ok((reply.clone(), reply)),
                    Err(e) if e.is_retryable() && attempt < self.config.retry_cap => {
                        self.note_retry(&req.tag, attempt, &e);
                    }
                    Err(e) => {
                        self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                        return Err(match e {
                            Error::Transport { message, .. } => Error::Transport {
                                attempts: attempt,
                                message,
                            },
                            other => other,
                        });
                    }
                }
            }
        }
    }

    fn note_retry(&self, tag: &str, attempt: u32, err: &Error) {
        self.metrics.retries.fetch_add(1, Ordering::Relaxed);
        tracing::warn!(tag, attempt, error = %err, "model call failed, retrying");
        let delay = self.config.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(8));
        if delay > 0 {
            std::thread::sleep(Duration::from_millis(delay));
        }
    }

    /// Embed texts, one unit vector per input, order preserved. Identical
    /// texts always yield identical vectors.
    pub fn embed<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<EmbeddingVector>> {
        if texts.is_empty() {
            return Err(Error::InvalidRequest("embed called with no texts".into()));
        }
        for t in texts {
            if t.as_ref().trim().is_empty() {
                return Err(Error::BlankInput("cannot embed blank text".into()));
            }
        }

        // Resolve what is already cached, keeping input order.
        let mut missing: Vec<String> = Vec::new();
        {
            let cache = self.embed_cache.lock().unwrap();
            for t in texts {
                let t = t.as_ref();
                if !cache.contains_key(t) && !missing.iter().any(|m| m == t) {
                    missing.push(t.to_string());
                }
            }
        }

        if !missing.is_empty() {
            self.metrics.embed_calls.fetch_add(1, Ordering::Relaxed);
            let mut attempt = 0u32;
            let raw = loop {
                attempt += 1;
                let res = {
                    let _permit = self.semaphore.acquire();
                    self.backend.embed(&missing)
                };
                match res {
                    Ok(v) => break v,
                    Err(e) if e.is_retryable() && attempt < self.config.retry_cap => {
                        self.note_retry("embed", attempt, &e);
                    }
                    Err(e) => {
                        self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                        return Err(e);
                    }
                }
            };
            if raw.len() != missing.len() {
                return Err(Error::malformed(
                    "embedding batch",
                    format!("asked for {} vectors, got {}", missing.len(), raw.len()),
                ));
            }
            let mut cache = self.embed_cache.lock().unwrap();
            let mut dim_guard = self.embed_dim.lock().unwrap();
            for (text, values) in missing.into_iter().zip(raw) {
                let vector = EmbeddingVector::new(values)?;
                match *dim_guard {
                    Some(dim) if dim != vector.dim() => {
                        return Err(Error::malformed(
                            "embedding batch",
                            format!("dimension changed mid-run: {} vs {}", dim, vector.dim()),
                        ));
                    }
                    None => *dim_guard = Some(vector.dim()),
                    _ => {}
                }
                cache.insert(text, vector);
            }
        }

        let cache = self.embed_cache.lock().unwrap();
        Ok(texts
            .iter()
            .map(|t| cache.get(t.as_ref()).expect("just inserted").clone())
            .collect())
    }

    /// Rerank candidates against a query. One score per candidate; output is
    /// sorted by score descending with ties broken by candidate id ascending.
    pub fn rerank(&self, query: &str, candidates: &[(String, String)]) -> Result<Vec<RerankScore>> {
        if candidates.is_empty() {
            return Err(Error::InvalidRequest("rerank called with no candidates".into()));
        }
        self.metrics.rerank_calls.fetch_add(1, Ordering::Relaxed);
        let mut attempt = 0u32;
        let scores = loop {
            attempt += 1;
            let res = {
                let _permit = self.semaphore.acquire();
                self.backend.rerank(query, candidates)
            };
            match res {
                Ok(v) => break v,
                Err(e) if e.is_retryable() && attempt < self.config.retry_cap => {
                    self.note_retry("rerank", attempt, &e);
                }
                Err(e) => {
                    self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(e);
                }
            }
        };
        if scores.len() != candidates.len() {
            return Err(Error::malformed(
                "rerank reply",
                format!("asked for {} scores, got {}", candidates.len(), scores.len()),
            ));
        }
        let mut out: Vec<RerankScore> = candidates
            .iter()
            .zip(scores)
            .map(|((id, _), score)| RerankScore {
                candidate_id: id.clone(),
                score,
            })
            .collect();
        out.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.candidate_id.cmp(&b.candidate_id))
        });
        Ok(out)
    }
}

/// Pull a JSON value out of a model reply: the whole trimmed reply, a fenced
/// ```json block, or the outermost brace-delimited span.
pub fn extract_json(reply: &str) -> Result<serde_json::Value> {
    let trimmed = reply.trim();
    if let Ok(v) = serde_json::from_str(trimmed) {
        return Ok(v);
    }
    if let Some(start) = trimmed.find("```") {
        let after = &trimmed[start + 3..];
        let after = after.strip_prefix("json").unwrap_or(after);
        if let Some(end) = after.find("```") {
            if let Ok(v) = serde_json::from_str(after[..end].trim()) {
                return Ok(v);
            }
        }
    }
    if let (Some(start), Some(end)) = (trimmed.find('{'), trimmed.rfind('}')) {
        if start < end {
            if let Ok(v) = serde_json::from_str(&trimmed[start..=end]) {
                return Ok(v);
            }
        }
    }
    Err(Error::malformed("structured reply", "no parseable JSON found"))
}
