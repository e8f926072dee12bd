//! Model service boundaries: chat LLM, named-entity recognizer and NLI
//! classifier.
//!
//! Chat backends only perform single attempts; [`ChatClient`] wraps one with
//! the retry policy, the in-flight limiter and the request log.

mod http;
pub mod mock;

use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use http::{HttpChat, HttpChatConfig, HttpSidecar};

/// Short stable hash of a prompt (first 16 hex digits of SHA-256).
pub fn prompt_hash(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_message: Option<String>,
    pub user_message: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model_name: String,
}

impl ChatRequest {
    pub fn new(user_message: impl Into<String>, temperature: f64, model_name: impl Into<String>) -> Result<Self> {
        let req = ChatRequest {
            system_message: None,
            user_message: user_message.into(),
            temperature,
            max_output_tokens: 512,
            model_name: model_name.into(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_max_output_tokens(mut self, tokens: u32) -> Self {
        self.max_output_tokens = tokens;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.user_message.is_empty() {
            return Err(Error::Contract("user message must be non-empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Contract(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_output_tokens == 0 {
            return Err(Error::Contract("max_output_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Hash of the full prompt (system message, if any, then user message).
    pub fn prompt_hash(&self) -> String {
        match &self.system_message {
            Some(sys) => prompt_hash(&format!("{sys}\n\n{}", self.user_message)),
            None => prompt_hash(&self.user_message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub text: String,
    pub token_usage: Option<(u32, u32)>,
    pub latency: Duration,
}

/// Outcome of a single backend attempt.
#[derive(Debug)]
pub enum AttemptError {
    /// Transport failures, 429 and 5xx: worth another attempt.
    Retryable(String),
    /// Anything else, surfaced as-is.
    Fatal(Error),
}

/// A chat completion service, one attempt per call.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, AttemptError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Total attempts per call, including the first.
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_secs(1),
            max_delay: Duration::from_secs(30),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_attempts: u32) -> Self {
        RetryPolicy {
            max_attempts,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
            jitter: false,
        }
    }

    fn delay(&self, retry: u32) -> Duration {
        let exp = self
            .base_delay
            .saturating_mul(1u32 << retry.min(16))
            .min(self.max_delay);
        if self.jitter && !exp.is_zero() {
            let factor: f64 = rand::thread_rng().gen_range(0.5..1.0);
            exp.mul_f64(factor)
        } else {
            exp
        }
    }
}

/// Counting semaphore bounding requests in flight.
#[derive(Debug)]
pub struct Limiter {
    max: usize,
    in_flight: Mutex<usize>,
    cv: Condvar,
}

pub struct Permit<'a> {
    limiter: &'a Limiter,
}

impl Limiter {
    pub fn new(max: usize) -> Self {
        Limiter {
            max: max.max(1),
            in_flight: Mutex::new(0),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().unwrap();
        while *n >= self.max {
            n = self.cv.wait(n).unwrap();
        }
        *n += 1;
        Permit { limiter: self }
    }

    pub fn max(&self) -> usize {
        self.max
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.limiter.in_flight.lock().unwrap() -= 1;
        self.limiter.cv.notify_one();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub prompt_hash: String,
    pub model: String,
    pub temperature: f64,
    pub attempts: u32,
    pub ok: bool,
    pub error: Option<String>,
    /// Offsets from log creation; not part of the serialized audit form.
    #[serde(skip)]
    pub started: Duration,
    #[serde(skip)]
    pub finished: Duration,
}

impl LogEntry {
    pub fn retries(&self) -> u32 {
        self.attempts.saturating_sub(1)
    }
}

/// Append-only record of every chat call.
#[derive(Debug)]
pub struct RequestLog {
    epoch: Instant,
    entries: Mutex<Vec<LogEntry>>,
}

impl Default for RequestLog {
    fn default() -> Self {
        RequestLog {
            epoch: Instant::now(),
            entries: Mutex::new(Vec::new()),
        }
    }
}

impl RequestLog {
    fn push(&self, mut entry: LogEntry) {
        let mut entries = self.entries.lock().unwrap();
        entry.seq = entries.len() as u64;
        entries.push(entry);
    }

    pub fn entries(&self) -> Vec<LogEntry> {
        self.entries.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.entries.lock().unwrap().clear();
    }

    /// Largest number of calls whose [started, finished) intervals overlap.
    pub fn max_concurrency(&self) -> usize {
        let entries = self.entries.lock().unwrap();
        let mut events: Vec<(Duration, i32)> = entries
            .iter()
            .flat_map(|e| [(e.started, 1), (e.finished, -1)])
            .collect();
        // Ends sort before starts at equal instants.
        events.sort();
        let (mut cur, mut best) = (0i32, 0i32);
        for (_, delta) in events {
            cur += delta;
            best = best.max(cur);
        }
        best as usize
    }

    /// Audit form: one JSON line per call, ordered by prompt hash so that
    /// parallel scheduling does not change the bytes.
    pub fn to_jsonl(&self) -> String {
        let mut entries = self.entries();
        entries.sort_by(|a, b| {
            (&a.prompt_hash, a.attempts, &a.error).cmp(&(&b.prompt_hash, b.attempts, &b.error))
        });
        let mut out = String::new();
        for mut e in entries {
            e.seq = 0;
            out.push_str(&serde_json::to_string(&AuditEntry::from(e)).unwrap());
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct AuditEntry {
    prompt_hash: String,
    model: String,
    temperature: f64,
    attempts: u32,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl From<LogEntry> for AuditEntry {
    fn from(e: LogEntry) -> Self {
        AuditEntry {
            prompt_hash: e.prompt_hash,
            model: e.model,
            temperature: e.temperature,
            attempts: e.attempts,
            ok: e.ok,
            error: e.error,
        }
    }
}

/// Shareable chat client: retries, bounded concurrency, request log.
#[derive(Clone)]
pub struct ChatClient {
    backend: Arc<dyn ChatBackend>,
    model_name: String,
    retry: RetryPolicy,
    limiter: Arc<Limiter>,
    log: Arc<RequestLog>,
}

impl ChatClient {
    pub fn new(backend: Arc<dyn ChatBackend>, model_name: impl Into<String>) -> Self {
        ChatClient {
            backend,
            model_name: model_name.into(),
            retry: RetryPolicy::default(),
            limiter: Arc::new(Limiter::new(4)),
            log: Arc::new(RequestLog::default()),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_parallelism(mut self, max_in_flight: usize) -> Self {
        self.limiter = Arc::new(Limiter::new(max_in_flight));
        self
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn log(&self) -> &RequestLog {
        &self.log
    }

    pub fn parallelism(&self) -> usize {
        self.limiter.max()
    }

    /// Build a request for this client's model.
    pub fn request(&self, prompt: impl Into<String>, temperature: f64) -> Result<ChatRequest> {
        ChatRequest::new(prompt, temperature, self.model_name.clone())
    }

    pub fn chat(&self, request: &ChatRequest) -> Result<ChatResponse> {
        request.validate()?;
        let hash = request.prompt_hash();
        let _permit = self.limiter.acquire();
        let started = self.log.epoch.elapsed();
        let mut attempts = 0;
        let outcome = loop {
            attempts += 1;
            let t0 = Instant::now();
            match self.backend.complete(request) {
                Ok(mut resp) => {
                    if resp.latency.is_zero() {
                        resp.latency = t0.elapsed();
                    }
                    if resp.text.trim().is_empty() {
                        break Err(Error::EmptyOutput);
                    }
                    break Ok(resp);
                }
                Err(AttemptError::Fatal(e)) => break Err(e),
                Err(AttemptError::Retryable(msg)) => {
                    if attempts >= self.retry.max_attempts {
                        break Err(Error::Transport(format!(
                            "{msg} (gave up after {attempts} attempts)"
                        )));
                    }
                    log::debug!("prompt {hash}: attempt {attempts} failed: {msg}");
                    thread::sleep(self.retry.delay(attempts - 1));
                }
            }
        };
        self.log.push(LogEntry {
            seq: 0,
            prompt_hash: hash,
            model: request.model_name.clone(),
            temperature: request.temperature,
            attempts,
            ok: outcome.is_ok(),
            error: outcome.as_ref().err().map(ToString::to_string),
            started,
            finished: self.log.epoch.elapsed(),
        });
        outcome
    }

    /// Convenience: prompt in, completion text out.
    pub fn complete_text(&self, prompt: &str, temperature: f64) -> Result<String> {
        Ok(self.chat(&self.request(prompt, temperature)?)?.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityCategory {
    Person,
    Date,
    Numeric,
    Organization,
    Location,
    Other,
}

impl EntityCategory {
    /// The five categories answers are grouped into.
    pub const TYPED: [EntityCategory; 5] = [
        EntityCategory::Person,
        EntityCategory::Date,
        EntityCategory::Numeric,
        EntityCategory::Organization,
        EntityCategory::Location,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub surface: String,
    pub category: EntityCategory,
    /// Character (Unicode scalar) offsets, end exclusive.
    pub char_start: usize,
    pub char_end: usize,
}

impl EntitySpan {
    /// Build a span, checking the offsets against the source text.
    pub fn new(text: &str, category: EntityCategory, char_start: usize, char_end: usize) -> Result<Self> {
        if char_start >= char_end {
            return Err(Error::Contract(format!("empty span {char_start}..{char_end}")));
        }
        let surface: String = text.chars().skip(char_start).take(char_end - char_start).collect();
        if surface.chars().count() != char_end - char_start {
            return Err(Error::Contract(format!("span {char_start}..{char_end} past end of text")));
        }
        Ok(EntitySpan {
            surface,
            category,
            char_start,
            char_end,
        })
    }
}

/// Sort by start and drop spans overlapping an earlier one.
pub(crate) fn tidy_spans(mut spans: Vec<EntitySpan>) -> Vec<EntitySpan> {
    spans.sort_by_key(|s| (s.char_start, std::cmp::Reverse(s.char_end)));
    let mut out: Vec<EntitySpan> = Vec::with_capacity(spans.len());
    for s in spans {
        if out.last().is_none_or(|prev| s.char_start >= prev.char_end) {
            out.push(s);
        }
    }
    out
}

/// Native NER label to category. Unknown labels map to `Other`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelMap {
    pub labels: HashMap<String, EntityCategory>,
}

impl Default for LabelMap {
    /// spaCy OntoNotes label set.
    fn default() -> Self {
        use EntityCategory::*;
        let pairs = [
            ("PERSON", Person),
            ("DATE", Date),
            ("TIME", Date),
            ("CARDINAL", Numeric),
            ("QUANTITY", Numeric),
            ("MONEY", Numeric),
            ("PERCENT", Numeric),
            ("ORDINAL", Numeric),
            ("ORG", Organization),
            ("GPE", Location),
            ("LOC", Location),
            ("FAC", Location),
            ("NORP", Other),
            ("EVENT", Other),
            ("WORK_OF_ART", Other),
            ("LAW", Other),
            ("LANGUAGE", Other),
            ("PRODUCT", Other),
        ];
        LabelMap {
            labels: pairs.iter().map(|(l, c)| (l.to_string(), *c)).collect(),
        }
    }
}

impl LabelMap {
    pub fn category(&self, label: &str) -> EntityCategory {
        match self.labels.get(label) {
            Some(c) => *c,
            None => {
                log::warn!("unknown NER label {label:?}, mapped to Other");
                EntityCategory::Other
            }
        }
    }
}

pub trait EntityRecognizer: Send + Sync {
    /// Spans sorted by start, non-overlapping.
    fn ner(&self, text: &str) -> Result<Vec<EntitySpan>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NliLabel {
    Entailment,
    Contradiction,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliVerdict {
    pub label: NliLabel,
    /// Entailment, contradiction, neutral.
    pub scores: [f64; 3],
}

impl NliVerdict {
    pub fn new(label: NliLabel, scores: [f64; 3]) -> Result<Self> {
        let sum: f64 = scores.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Contract(format!("NLI scores sum to {sum}")));
        }
        let argmax = NliVerdict::label_of(&scores);
        if argmax != label {
            return Err(Error::Contract(format!("label {label:?} but argmax {argmax:?}")));
        }
        Ok(NliVerdict { label, scores })
    }

    /// Verdict whose label is the argmax of the scores.
    pub fn from_scores(scores: [f64; 3]) -> Result<Self> {
        NliVerdict::new(NliVerdict::label_of(&scores), scores)
    }

    fn label_of(scores: &[f64; 3]) -> NliLabel {
        let labels = [NliLabel::Entailment, NliLabel::Contradiction, NliLabel::Neutral];
        let mut best = 0;
        for i in 1..3 {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        labels[best]
    }

    pub fn entailment() -> Self {
        NliVerdict {
            label: NliLabel::Entailment,
            scores: [0.98, 0.01, 0.01],
        }
    }

    pub fn contradiction() -> Self {
        NliVerdict {
            label: NliLabel::Contradiction,
            scores: [0.02, 0.95, 0.03],
        }
    }

    pub fn neutral() -> Self {
        NliVerdict {
            label: NliLabel::Neutral,
            scores: [0.05, 0.05, 0.90],
        }
    }
}

pub trait NliModel: Send + Sync {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict>;
}
