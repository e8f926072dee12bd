//! Benchmark construction and evaluation for LLM utility judgments in
//! retrieval-augmented QA.
//!
//! * [`corpus`]: questions, passages, retrieval runs, candidate sets
//! * [`synth`]: GTU/GTI candidate-set construction
//! * [`judge`]: pointwise, pairwise and listwise judges, k-sampling
//! * [`qa`]: answer generation over an evidence source
//! * [`metrics`]: set, ranking and answer metrics
//! * [`clients`]: chat, NER and NLI backends (HTTP and mock)
//! * [`pipeline`]: config-driven build/judge/qa/report runs
//! * [`fixture`]: a synthetic benchmark for demos and tests

pub mod clients;
pub mod corpus;
pub mod error;
pub mod fixture;
pub mod judge;
pub mod metrics;
pub mod pipeline;
pub mod qa;
pub mod seeding;
pub mod synth;

pub use error::{Error, Result};
