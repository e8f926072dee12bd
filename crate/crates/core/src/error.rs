use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: missing field \"{field}\"")]
    MissingField { line: usize, field: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("backend returned an empty completion")]
    EmptyOutput,

    #[error("no scripted response for prompt {0}")]
    NoScript(String),

    #[error("question {question_id}: run has {available} entries, {required} required")]
    Shortfall {
        question_id: String,
        available: usize,
        required: usize,
    },

    #[error("no eligible counter-answer for \"{answer}\" ({mode})")]
    Exhausted { answer: String, mode: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("question {question_id}: cannot assemble candidates: {reason}")]
    Assembly { question_id: String, reason: String },

    #[error("lookup failed: {0}")]
    Lookup(String),

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_step(self, step: &'static str) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
