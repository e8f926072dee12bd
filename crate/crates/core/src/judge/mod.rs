//! Utility and relevance judges: pointwise, pairwise, listwise-set,
//! listwise-rank, and k-sampling voting over shuffled listwise-set runs.

pub mod parse;
pub mod prompt;

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::clients::{prompt_hash, ChatClient};
use crate::corpus::{CandidateSet, Question};
use crate::error::{Error, Result};
use crate::seeding::rng_for;

pub use parse::{parse_output, Parsed, Verdict};
pub use prompt::{inspect_prompt, render_prompt, PromptView};

/// Judge calls are made at temperature 0.
pub const JUDGE_TEMPERATURE: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Form {
    Pointwise,
    Pairwise,
    ListwiseSet,
    ListwiseRank,
}

impl Form {
    pub const ALL: [Form; 4] = [Form::Pointwise, Form::Pairwise, Form::ListwiseSet, Form::ListwiseRank];

    /// Whether the form produces a ranking rather than a set.
    pub fn is_rank(self) -> bool {
        matches!(self, Form::Pairwise | Form::ListwiseRank)
    }

    pub fn label(self) -> &'static str {
        match self {
            Form::Pointwise => "pointwise",
            Form::Pairwise => "pairwise",
            Form::ListwiseSet => "listwise-set",
            Form::ListwiseRank => "listwise-rank",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Judgment {
    Utility,
    Relevance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Requirement {
    None,
    Cot,
    Reasoning,
    Answer,
}

impl Requirement {
    pub const ALL: [Requirement; 4] = [
        Requirement::None,
        Requirement::Cot,
        Requirement::Reasoning,
        Requirement::Answer,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputOrder {
    QuestionFirst,
    PassagesFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JudgeConfig {
    pub form: Form,
    pub judgment: Judgment,
    pub requirement: Requirement,
    pub order: InputOrder,
    pub k_samples: usize,
    pub seed: u64,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        JudgeConfig {
            form: Form::ListwiseSet,
            judgment: Judgment::Utility,
            requirement: Requirement::None,
            order: InputOrder::QuestionFirst,
            k_samples: 1,
            seed: 0,
        }
    }
}

impl JudgeConfig {
    pub fn new(form: Form, judgment: Judgment) -> Self {
        JudgeConfig {
            form,
            judgment,
            ..JudgeConfig::default()
        }
    }

    pub fn with_requirement(mut self, requirement: Requirement) -> Self {
        self.requirement = requirement;
        self
    }

    pub fn with_order(mut self, order: InputOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k_samples = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.judgment == Judgment::Relevance && !matches!(self.form, Form::ListwiseSet | Form::ListwiseRank) {
            return Err(Error::Contract(format!(
                "relevance judgments are listwise only, got {}",
                self.form.label()
            )));
        }
        if self.k_samples == 0 {
            return Err(Error::Contract("k_samples must be at least 1".into()));
        }
        if self.k_samples > 1 && self.form != Form::ListwiseSet {
            return Err(Error::Contract(format!(
                "k-sampling needs listwise-set, got {}",
                self.form.label()
            )));
        }
        Ok(())
    }

    /// Supported but unusual combinations.
    pub fn flag(&self) -> Option<&'static str> {
        (self.form == Form::Pairwise && self.requirement == Requirement::Answer)
            .then_some("answer requirement on pairwise comparisons")
    }

    /// Stable short name, used for file names and table rows.
    pub fn key(&self) -> String {
        let judgment = match self.judgment {
            Judgment::Utility => "utility",
            Judgment::Relevance => "relevance",
        };
        let req = match self.requirement {
            Requirement::None => "none",
            Requirement::Cot => "cot",
            Requirement::Reasoning => "reasoning",
            Requirement::Answer => "answer",
        };
        let order = match self.order {
            InputOrder::QuestionFirst => "qf",
            InputOrder::PassagesFirst => "pf",
        };
        format!("{judgment}-{}-{req}-{order}-k{}", self.form.label(), self.k_samples)
    }

    /// The set-form run whose size bounds this rank-form run at answer time.
    pub fn paired_set_config(&self) -> JudgeConfig {
        JudgeConfig {
            form: Form::ListwiseSet,
            k_samples: 1,
            ..*self
        }
    }
}

impl fmt::Display for JudgeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgmentResult {
    /// 0-based candidate indices, ascending.
    SelectedSet(Vec<usize>),
    /// 0-based candidate indices, best first.
    Ranking(Vec<usize>),
}

impl JudgmentResult {
    pub fn indices(&self) -> &[usize] {
        match self {
            JudgmentResult::SelectedSet(v) | JudgmentResult::Ranking(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub question_id: String,
    pub config: JudgeConfig,
    pub prompt_hashes: Vec<String>,
    pub raw_outputs: Vec<String>,
    pub result: JudgmentResult,
    /// Judging calls, not counting format re-prompts.
    pub call_count: usize,
    pub reprompts: usize,
    pub parse_failures: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Per-candidate votes (k-sampling only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<u32>>,
}

impl JudgmentRecord {
    fn new(question_id: &str, config: &JudgeConfig, result: JudgmentResult) -> Self {
        JudgmentRecord {
            question_id: question_id.to_string(),
            config: *config,
            prompt_hashes: Vec::new(),
            raw_outputs: Vec::new(),
            result,
            call_count: 0,
            reprompts: 0,
            parse_failures: 0,
            warnings: Vec::new(),
            votes: None,
        }
    }

    fn absorb(&mut self, asked: Asked) -> Option<Verdict> {
        self.call_count += 1;
        self.reprompts += asked.outputs.len() - 1;
        for (hash, raw) in asked.outputs {
            self.prompt_hashes.push(hash);
            self.raw_outputs.push(raw);
        }
        match asked.parsed {
            Some(p) => {
                self.warnings.extend(p.warnings);
                Some(p.verdict)
            }
            None => {
                self.parse_failures += 1;
                None
            }
        }
    }
}

struct Asked {
    outputs: Vec<(String, String)>,
    parsed: Option<Parsed>,
}

/// One judging call, with a single format re-prompt if the first reply
/// cannot be parsed.
fn ask(client: &ChatClient, prompt: &str, form: Form, n: usize) -> Result<Asked> {
    let first = client.chat(&client.request(prompt, JUDGE_TEMPERATURE)?)?;
    let mut outputs = vec![(prompt_hash(prompt), first.text.clone())];
    if let Some(parsed) = parse_output(form, &first.text, n) {
        return Ok(Asked {
            outputs,
            parsed: Some(parsed),
        });
    }
    let retry_prompt = prompt::reprompt(prompt);
    let second = client.chat(&client.request(retry_prompt.as_str(), JUDGE_TEMPERATURE)?)?;
    let parsed = parse_output(form, &second.text, n);
    outputs.push((prompt_hash(&retry_prompt), second.text));
    Ok(Asked { outputs, parsed })
}

fn expect_form(config: &JudgeConfig, allowed: &[Form]) -> Result<()> {
    config.validate()?;
    if !allowed.contains(&config.form) {
        return Err(Error::Contract(format!(
            "judge called with form {}",
            config.form.label()
        )));
    }
    if let Some(flag) = config.flag() {
        log::warn!("{}: {flag}", config.key());
    }
    Ok(())
}

/// Each candidate judged on its own; selected set = passages answered "yes".
pub fn judge_pointwise(
    question: &Question,
    candidates: &CandidateSet,
    client: &ChatClient,
    config: &JudgeConfig,
) -> Result<JudgmentRecord> {
    expect_form(config, &[Form::Pointwise])?;
    let mut record = JudgmentRecord::new(&question.id, config, JudgmentResult::SelectedSet(vec![]));
    let mut selected = Vec::new();
    for (i, passage) in candidates.passages.iter().enumerate() {
        let prompt = render_prompt(config, question, std::slice::from_ref(passage))?;
        let asked = ask(client, &prompt, Form::Pointwise, 1)?;
        if let Some(Verdict::Point(true)) = record.absorb(asked) {
            selected.push(i);
        }
    }
    record.result = JudgmentResult::SelectedSet(selected);
    Ok(record)
}

/// Rank by pairwise wins: one comparison per unordered pair, lower index
/// presented first; ties go to the lower index. An unparseable comparison
/// counts as a win for the lower index.
pub fn judge_pairwise(
    question: &Question,
    candidates: &CandidateSet,
    client: &ChatClient,
    config: &JudgeConfig,
) -> Result<JudgmentRecord> {
    expect_form(config, &[Form::Pairwise])?;
    let n = candidates.len();
    let mut record = JudgmentRecord::new(&question.id, config, JudgmentResult::Ranking(vec![]));
    let mut wins = vec![0u32; n];
    for i in 0..n {
        for j in i + 1..n {
            let pair = [candidates.passages[i].clone(), candidates.passages[j].clone()];
            let prompt = render_prompt(config, question, &pair)?;
            let asked = ask(client, &prompt, Form::Pairwise, 2)?;
            match record.absorb(asked) {
                Some(Verdict::PairWinner(1)) => wins[j] += 1,
                _ => wins[i] += 1,
            }
        }
    }
    record.result = JudgmentResult::Ranking(copeland_order(&wins));
    Ok(record)
}

/// Indices sorted by wins descending, ties by index.
pub fn copeland_order(wins: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..wins.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(wins[i]), i));
    order
}

/// All candidates in one prompt; a selected set or a ranking back.
pub fn judge_listwise(
    question: &Question,
    candidates: &CandidateSet,
    client: &ChatClient,
    config: &JudgeConfig,
) -> Result<JudgmentRecord> {
    expect_form(config, &[Form::ListwiseSet, Form::ListwiseRank])?;
    let n = candidates.len();
    let prompt = render_prompt(config, question, &candidates.passages)?;
    let empty = match config.form {
        Form::ListwiseRank => JudgmentResult::Ranking(vec![]),
        _ => JudgmentResult::SelectedSet(vec![]),
    };
    let mut record = JudgmentRecord::new(&question.id, config, empty);
    let asked = ask(client, &prompt, config.form, n)?;
    match record.absorb(asked) {
        Some(Verdict::Set(set)) => record.result = JudgmentResult::SelectedSet(set),
        Some(Verdict::Ranking(r)) => record.result = JudgmentResult::Ranking(r),
        _ => {}
    }
    Ok(record)
}

/// Candidate order used by k-sampling iteration `t` (1-based): entry `pos`
/// is the original index shown at position `pos`.
pub fn sampling_permutation(seed: u64, t: usize, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_for(seed, &format!("k-sampling/{t}")));
    perm
}

/// Tally k selected sets (over original indices) into a final set: its
/// size is the most common set size (ties to the smaller size) and its
/// members are the most-voted indices (ties to the lower index).
pub fn vote(sets: &[Vec<usize>], n: usize) -> (Vec<usize>, Vec<u32>) {
    let mut votes = vec![0u32; n];
    for set in sets {
        for &i in set {
            votes[i] += 1;
        }
    }
    if sets.is_empty() {
        return (vec![], votes);
    }
    let mut size_counts = vec![0usize; n + 1];
    for set in sets {
        size_counts[set.len()] += 1;
    }
    // max_by_key keeps the last maximum; scan sizes from large to small.
    let modal = (0..=n).rev().max_by_key(|&s| size_counts[s]).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(votes[i]), i));
    let mut chosen: Vec<usize> = order.into_iter().take(modal).collect();
    chosen.sort_unstable();
    (chosen, votes)
}

/// Shuffle the candidates k times, judge each shuffle listwise-set, vote.
pub fn k_sampling_judge(
    question: &Question,
    candidates: &CandidateSet,
    client: &ChatClient,
    config: &JudgeConfig,
) -> Result<JudgmentRecord> {
    expect_form(config, &[Form::ListwiseSet])?;
    let n = candidates.len();
    let single = JudgeConfig { k_samples: 1, ..*config };
    let mut record = JudgmentRecord::new(&question.id, config, JudgmentResult::SelectedSet(vec![]));
    let mut sets = Vec::with_capacity(config.k_samples);
    for t in 1..=config.k_samples {
        let perm = sampling_permutation(config.seed, t, n);
        let shuffled: Vec<_> = perm.iter().map(|&i| candidates.passages[i].clone()).collect();
        let prompt = render_prompt(&single, question, &shuffled)?;
        let asked = ask(client, &prompt, Form::ListwiseSet, n)?;
        if let Some(Verdict::Set(positions)) = record.absorb(asked) {
            sets.push(positions.into_iter().map(|pos| perm[pos]).collect::<Vec<_>>());
        }
    }
    let (chosen, votes) = vote(&sets, n);
    record.result = JudgmentResult::SelectedSet(chosen);
    record.votes = Some(votes);
    Ok(record)
}

/// Dispatch on the configured form. Listwise-set with k > 1 is k-sampling.
pub fn run_judge(
    question: &Question,
    candidates: &CandidateSet,
    client: &ChatClient,
    config: &JudgeConfig,
) -> Result<JudgmentRecord> {
    match config.form {
        Form::Pointwise => judge_pointwise(question, candidates, client, config),
        Form::Pairwise => judge_pairwise(question, candidates, client, config),
        Form::ListwiseSet if config.k_samples > 1 => k_sampling_judge(question, candidates, client, config),
        Form::ListwiseSet | Form::ListwiseRank => judge_listwise(question, candidates, client, config),
    }
}
