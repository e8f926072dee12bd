//! Deterministic in-process backends.
//!
//! The oracle backends are told out-of-band which passages are ground-truth
//! evidence for which question and answer judge and QA prompts from that
//! knowledge alone. The noisy oracle perturbs listwise answers with an error
//! rate that depends on where the evidence sits in the prompt.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    prompt_hash, tidy_spans, AttemptError, ChatBackend, ChatRequest, ChatResponse, EntityCategory,
    EntityRecognizer, EntitySpan, NliModel, NliVerdict,
};
use crate::corpus::{CandidateSet, Question};
use crate::error::{Error, Result};
use crate::judge::prompt::{inspect_prompt, one_line};
use crate::judge::Form;
use crate::qa::inspect_qa_prompt;
use crate::seeding::derive_seed;

fn reply(text: impl Into<String>) -> std::result::Result<ChatResponse, AttemptError> {
    Ok(ChatResponse {
        text: text.into(),
        token_usage: None,
        latency: Duration::ZERO,
    })
}

/// Responses looked up by prompt hash.
#[derive(Debug, Default)]
pub struct ScriptedChat {
    responses: HashMap<String, String>,
    fallback: Option<String>,
}

impl ScriptedChat {
    /// Strict: unscripted prompts fail with [`Error::NoScript`].
    pub fn strict() -> Self {
        Self::default()
    }

    /// Unscripted prompts get `fallback`.
    pub fn with_fallback(fallback: impl Into<String>) -> Self {
        ScriptedChat {
            responses: HashMap::new(),
            fallback: Some(fallback.into()),
        }
    }

    pub fn insert_hash(&mut self, hash: impl Into<String>, response: impl Into<String>) {
        self.responses.insert(hash.into(), response.into());
    }

    pub fn insert_prompt(&mut self, prompt: &str, response: impl Into<String>) {
        self.insert_hash(prompt_hash(prompt), response);
    }

    pub fn from_map(responses: HashMap<String, String>) -> Self {
        ScriptedChat {
            responses,
            fallback: None,
        }
    }
}

impl ChatBackend for ScriptedChat {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, AttemptError> {
        let hash = request.prompt_hash();
        match self.responses.get(&hash).or(self.fallback.as_ref()) {
            Some(text) => reply(text.clone()),
            None => Err(AttemptError::Fatal(Error::NoScript(hash))),
        }
    }
}

/// Backend driven by a closure.
pub struct FnChat<F>(pub F);

impl<F> ChatBackend for FnChat<F>
where
    F: Fn(&ChatRequest) -> Result<String> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, AttemptError> {
        (self.0)(request).map_err(AttemptError::Fatal).and_then(reply)
    }
}

/// What the oracle knows about one question.
#[derive(Debug, Clone, Default)]
struct Knowledge {
    gold_answers: Vec<String>,
    evidence: HashSet<String>,
}

/// Perfect utility judge and evidence-bound answerer.
#[derive(Debug, Default, Clone)]
pub struct OracleModel {
    questions: HashMap<String, Knowledge>,
}

impl OracleModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a question and the passage texts that count as its evidence.
    pub fn add_question<'a>(&mut self, question: &Question, evidence: impl IntoIterator<Item = &'a str>) {
        let entry = self.questions.entry(one_line(&question.text)).or_default();
        entry.gold_answers = question.gold_answers.clone();
        entry.evidence.extend(evidence.into_iter().map(one_line));
    }

    /// Register the ground-truth passages of a candidate set.
    pub fn add_candidates(&mut self, question: &Question, candidates: &CandidateSet) {
        let truth = candidates.truth_indices(question);
        self.add_question(question, truth.iter().map(|&i| candidates.passages[i].text.as_str()));
    }

    fn knowledge(&self, question: &str) -> std::result::Result<&Knowledge, AttemptError> {
        self.questions.get(question).ok_or_else(|| {
            AttemptError::Fatal(Error::NoScript(format!("oracle has no question {question:?}")))
        })
    }

    fn useful(&self, question: &str, passages: &[String]) -> std::result::Result<Vec<bool>, AttemptError> {
        let k = self.knowledge(question)?;
        Ok(passages.iter().map(|p| k.evidence.contains(p)).collect())
    }

    fn answer(&self, prompt: &str) -> Option<std::result::Result<String, AttemptError>> {
        let (question, passages) = inspect_qa_prompt(prompt)?;
        Some(self.knowledge(&question).map(|k| {
            if passages.iter().any(|p| k.evidence.contains(p)) {
                k.gold_answers[0].clone()
            } else {
                "unknown".to_string()
            }
        }))
    }
}

fn tags(indices: impl IntoIterator<Item = usize>, sep: &str) -> String {
    indices
        .into_iter()
        .map(|i| format!("Passage-{}", i + 1))
        .collect::<Vec<_>>()
        .join(sep)
}

fn render_verdict(form: Form, useful: &[bool]) -> String {
    match form {
        Form::Pointwise => {
            if useful[0] {
                "Judgment: Yes".into()
            } else {
                "Judgment: No".into()
            }
        }
        Form::Pairwise => {
            let winner = if !useful[0] && useful[1] { 2 } else { 1 };
            format!("Judgment: Passage-{winner}")
        }
        Form::ListwiseSet => {
            let chosen: Vec<usize> = (0..useful.len()).filter(|&i| useful[i]).collect();
            if chosen.is_empty() {
                "Judgment: none".into()
            } else {
                format!("Judgment: {}", tags(chosen, ", "))
            }
        }
        Form::ListwiseRank => {
            let order = (0..useful.len())
                .filter(|&i| useful[i])
                .chain((0..useful.len()).filter(|&i| !useful[i]));
            format!("Judgment: {}", tags(order, " > "))
        }
    }
}

impl ChatBackend for OracleModel {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, AttemptError> {
        let prompt = &request.user_message;
        if let Some(view) = inspect_prompt(prompt) {
            let useful = self.useful(&view.question, &view.passages)?;
            return reply(render_verdict(view.form, &useful));
        }
        match self.answer(prompt) {
            Some(answer) => reply(answer?),
            None => Err(AttemptError::Fatal(Error::NoScript(format!(
                "oracle cannot interpret prompt {}",
                request.prompt_hash()
            )))),
        }
    }
}

/// Position-dependent error rates for the noisy oracle.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    /// Probability that evidence at position p is missed; the last entry
    /// covers every later position.
    pub miss: Vec<f64>,
    /// Probability that a non-evidence passage at position p is picked.
    pub false_pick: Vec<f64>,
}

impl Default for NoiseModel {
    /// Evidence in the middle of a ten-passage list is missed most often and
    /// the first few slots attract spurious picks.
    fn default() -> Self {
        NoiseModel {
            miss: vec![0.10, 0.20, 0.35, 0.50, 0.60, 0.60, 0.50, 0.35, 0.20, 0.10],
            false_pick: vec![0.20, 0.15, 0.10, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05],
        }
    }
}

impl NoiseModel {
    fn at(rates: &[f64], position: usize) -> f64 {
        rates
            .get(position)
            .or_else(|| rates.last())
            .copied()
            .unwrap_or(0.0)
    }
}

/// Oracle whose judgments are corrupted by a seeded, position-keyed error
/// model. Answers to QA prompts are left exact.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    oracle: OracleModel,
    noise: NoiseModel,
    seed: u64,
}

impl NoisyOracle {
    pub fn new(oracle: OracleModel, noise: NoiseModel, seed: u64) -> Self {
        NoisyOracle { oracle, noise, seed }
    }
}

impl ChatBackend for NoisyOracle {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, AttemptError> {
        let prompt = &request.user_message;
        let Some(view) = inspect_prompt(prompt) else {
            return self.oracle.complete(request);
        };
        let truth = self.oracle.useful(&view.question, &view.passages)?;
        // Same prompt, same draw: the error is a function of the prompt.
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &prompt_hash(prompt)));
        let noisy: Vec<bool> = match view.form {
            Form::Pairwise => {
                let flip = rng.gen_bool(NoiseModel::at(&self.noise.miss, 0));
                let winner_second = !truth[0] && truth[1];
                let second = winner_second != flip;
                vec![!second, second]
            }
            _ => truth
                .iter()
                .enumerate()
                .map(|(pos, &is_evidence)| {
                    if is_evidence {
                        !rng.gen_bool(NoiseModel::at(&self.noise.miss, pos))
                    } else {
                        rng.gen_bool(NoiseModel::at(&self.noise.false_pick, pos))
                    }
                })
                .collect(),
        };
        reply(render_verdict(view.form, &noisy))
    }
}

/// Dictionary-lookup entity recognizer.
#[derive(Debug, Clone, Default)]
pub struct GazetteerNer {
    entries: Vec<(String, EntityCategory)>,
}

impl GazetteerNer {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, EntityCategory)>,
        S: Into<String>,
    {
        GazetteerNer {
            entries: entries.into_iter().map(|(s, c)| (s.into(), c)).collect(),
        }
    }
}

impl EntityRecognizer for GazetteerNer {
    fn ner(&self, text: &str) -> Result<Vec<EntitySpan>> {
        if text.is_empty() {
            return Err(Error::Contract("NER input must be non-empty".into()));
        }
        let mut spans = Vec::new();
        for (surface, category) in &self.entries {
            if surface.is_empty() {
                continue;
            }
            for (byte_start, _) in text.match_indices(surface.as_str()) {
                let start = text[..byte_start].chars().count();
                let end = start + surface.chars().count();
                spans.push(EntitySpan::new(text, *category, start, end)?);
            }
        }
        Ok(tidy_spans(spans))
    }
}

/// NLI verdicts from a table. Identical premise and hypothesis entail.
/// A pair scripted with several verdicts yields them in sequence, repeating
/// the last one.
#[derive(Debug, Default)]
pub struct TableNli {
    table: HashMap<(String, String), Vec<NliVerdict>>,
    cursor: Mutex<HashMap<(String, String), usize>>,
    fallback: Option<NliVerdict>,
    calls: AtomicUsize,
}

impl TableNli {
    /// Untabled pairs fail.
    pub fn strict() -> Self {
        Self::default()
    }

    /// Untabled pairs get `fallback`.
    pub fn with_fallback(fallback: NliVerdict) -> Self {
        TableNli {
            fallback: Some(fallback),
            ..Self::default()
        }
    }

    pub fn insert(&mut self, premise: &str, hypothesis: &str, verdict: NliVerdict) {
        self.insert_sequence(premise, hypothesis, vec![verdict]);
    }

    pub fn insert_sequence(&mut self, premise: &str, hypothesis: &str, verdicts: Vec<NliVerdict>) {
        assert!(!verdicts.is_empty());
        self.table
            .insert((premise.to_string(), hypothesis.to_string()), verdicts);
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl NliModel for TableNli {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict> {
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(Error::Contract("NLI inputs must be non-empty".into()));
        }
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = (premise.to_string(), hypothesis.to_string());
        if let Some(seq) = self.table.get(&key) {
            let mut cursor = self.cursor.lock().unwrap();
            let i = cursor.entry(key).or_insert(0);
            let v = seq[(*i).min(seq.len() - 1)].clone();
            *i += 1;
            return Ok(v);
        }
        if premise == hypothesis {
            return Ok(NliVerdict::entailment());
        }
        self.fallback
            .clone()
            .ok_or_else(|| Error::NoScript(format!("no NLI entry for ({premise:?}, {hypothesis:?})")))
    }
}

/// NLI driven by a closure.
pub struct FnNli<F>(pub F);

impl<F> NliModel for FnNli<F>
where
    F: Fn(&str, &str) -> Result<NliVerdict> + Send + Sync,
{
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict> {
        (self.0)(premise, hypothesis)
    }
}

/// Oracle knowledge for a batch of candidate sets, keyed by question id.
pub fn oracle_for(questions: &[Question], sets: &[CandidateSet]) -> OracleModel {
    let by_id: HashMap<&str, &Question> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut oracle = OracleModel::new();
    for set in sets {
        if let Some(q) = by_id.get(set.question_id.as_str()) {
            oracle.add_candidates(q, set);
        }
    }
    oracle
}
