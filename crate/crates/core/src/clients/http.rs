use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    tidy_spans, AttemptError, ChatBackend, ChatRequest, ChatResponse, EntityRecognizer, EntitySpan,
    LabelMap, NliLabel, NliModel, NliVerdict,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpChatConfig {
    /// Full chat-completions URL, e.g. `https://api.openai.com/v1/chat/completions`.
    pub endpoint: String,
    /// Environment variable holding the bearer token; `None` sends no auth header.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
}

impl Default for HttpChatConfig {
    fn default() -> Self {
        HttpChatConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: Some("OPENAI_API_KEY".into()),
            timeout_secs: 120,
        }
    }
}

/// Chat-completions JSON over HTTP(S).
pub struct HttpChat {
    client: Client,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpChat {
    pub fn new(config: &HttpChatConfig) -> Result<Self> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::Config(format!("credential variable {var} is not set"))
            })?),
            None => None,
        };
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(HttpChat {
            client,
            endpoint: config.endpoint.clone(),
            api_key,
        })
    }

    pub(crate) fn body(request: &ChatRequest) -> serde_json::Value {
        let mut messages = Vec::new();
        if let Some(sys) = &request.system_message {
            messages.push(json!({"role": "system", "content": sys}));
        }
        messages.push(json!({"role": "user", "content": request.user_message}));
        json!({
            "model": request.model_name,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        })
    }
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: u32,
    completion_tokens: u32,
}

impl ChatBackend for HttpChat {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, AttemptError> {
        let started = Instant::now();
        let mut builder = self.client.post(&self.endpoint).json(&HttpChat::body(request));
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder
            .send()
            .map_err(|e| AttemptError::Retryable(e.to_string()))?;
        let status = resp.status();
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Err(AttemptError::Retryable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let detail = resp.text().unwrap_or_default();
            return Err(AttemptError::Fatal(Error::Config(format!(
                "HTTP {status}: {detail}"
            ))));
        }
        let body: CompletionBody = resp
            .json()
            .map_err(|e| AttemptError::Fatal(Error::Transport(format!("bad completion body: {e}"))))?;
        let text = body
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        Ok(ChatResponse {
            text,
            token_usage: body.usage.map(|u| (u.prompt_tokens, u.completion_tokens)),
            latency: started.elapsed(),
        })
    }
}

/// Client for the NER/NLI sidecar (`POST /ner`, `POST /nli`).
pub struct HttpSidecar {
    client: Client,
    base_url: String,
    labels: LabelMap,
}

#[derive(Deserialize)]
struct NerBody {
    entities: Vec<NerEntity>,
}

#[derive(Deserialize)]
struct NerEntity {
    surface: String,
    label: String,
    start: usize,
    end: usize,
}

#[derive(Deserialize)]
struct NliBody {
    label: String,
    scores: [f64; 3],
}

impl HttpSidecar {
    pub fn new(base_url: impl Into<String>, labels: LabelMap) -> Result<Self> {
        let client = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(HttpSidecar {
            client,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            labels,
        })
    }

    fn post<T: serde::de::DeserializeOwned>(&self, path: &str, body: serde_json::Value) -> Result<T> {
        let url = format!("{}{path}", self.base_url);
        let resp = self
            .client
            .post(&url)
            .json(&body)
            .send()
            .map_err(|e| Error::Transport(format!("{url}: {e}")))?;
        let status = resp.status();
        if status != StatusCode::OK {
            return Err(Error::Transport(format!("{url}: HTTP {status}")));
        }
        resp.json()
            .map_err(|e| Error::Transport(format!("{url}: bad body: {e}")))
    }
}

impl EntityRecognizer for HttpSidecar {
    fn ner(&self, text: &str) -> Result<Vec<EntitySpan>> {
        if text.is_empty() {
            return Err(Error::Contract("NER input must be non-empty".into()));
        }
        let body: NerBody = self.post("/ner", json!({ "text": text }))?;
        let mut spans = Vec::with_capacity(body.entities.len());
        for e in body.entities {
            let span = EntitySpan::new(text, self.labels.category(&e.label), e.start, e.end)?;
            if span.surface != e.surface {
                return Err(Error::Transport(format!(
                    "sidecar span {}..{} is {:?}, reported {:?}",
                    e.start, e.end, span.surface, e.surface
                )));
            }
            spans.push(span);
        }
        Ok(tidy_spans(spans))
    }
}

impl NliModel for HttpSidecar {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict> {
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(Error::Contract("NLI inputs must be non-empty".into()));
        }
        let body: NliBody = self.post("/nli", json!({ "premise": premise, "hypothesis": hypothesis }))?;
        let label = match body.label.to_ascii_lowercase().as_str() {
            "entailment" => NliLabel::Entailment,
            "contradiction" => NliLabel::Contradiction,
            "neutral" => NliLabel::Neutral,
            other => return Err(Error::Transport(format!("unknown NLI label {other:?}"))),
        };
        // The sidecar guarantees a 1e-4 sum; renormalize to the tighter in-process bound.
        let sum: f64 = body.scores.iter().sum();
        if (sum - 1.0).abs() > 1e-4 {
            return Err(Error::Transport(format!("NLI scores sum to {sum}")));
        }
        let scores = body.scores.map(|s| s / sum);
        NliVerdict::new(label, scores)
    }
}
