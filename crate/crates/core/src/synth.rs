//! Benchmark construction.
//!
//! GTU sets are the retriever's top N. GTI sets combine the ground-truth
//! evidence with three kinds of distractors: counterfactual passages (answer
//! entities swapped out, or evidence fabricated for a contradicting claim),
//! highly relevant noisy passages mined from the top of the run and weakly
//! relevant ones mined from the bottom.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clients::{prompt_hash, ChatClient, EntityCategory, EntityRecognizer, NliLabel, NliModel};
use crate::corpus::{
    contains_answer, normalize_text, text_contains_answer, CandidateSet, Origin, Passage, PassageStore,
    Question, RetrievalRun,
};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// Default candidate-set size.
pub const DEFAULT_N: usize = 10;
/// Outputs per substitution mode.
pub const REPEATS_PER_MODE: u8 = 5;
/// Draws allowed to find a counter-answer not used before in the same mode.
pub const DEDUP_DRAW_CAP: usize = 10;
/// Extra fabrication attempts after a failed support check.
pub const SUPPORT_RETRY_CAP: u32 = 3;
pub const FABRICATION_TEMPERATURE: f64 = 0.7;
pub const FABRICATION_WORD_LIMIT: usize = 100;

pub fn fabrication_prompt(claim: &str) -> String {
    format!(
        "Given a claim, please write a short piece of evidence to support it. The maximum length of the generated evidence is 100 words. You can fabricate content, but it should be as realistic as possible. Claim: {claim} Evidence:"
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubstitutionMode {
    /// Counter-answer of the same entity category.
    CorpusSubstitution,
    /// Counter-answer of a different entity category.
    TypeSwap,
}

impl SubstitutionMode {
    pub const BOTH: [SubstitutionMode; 2] = [SubstitutionMode::CorpusSubstitution, SubstitutionMode::TypeSwap];

    fn short(self) -> &'static str {
        match self {
            SubstitutionMode::CorpusSubstitution => "cs",
            SubstitutionMode::TypeSwap => "ts",
        }
    }
}

impl fmt::Display for SubstitutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstitutionMode::CorpusSubstitution => f.write_str("corpus substitution"),
            SubstitutionMode::TypeSwap => f.write_str("type swap"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualSpec {
    pub mode: SubstitutionMode,
    pub original_answer: String,
    pub counter_answer: String,
    pub original_category: EntityCategory,
    pub counter_category: EntityCategory,
    /// 1..=5 within its mode.
    pub repeat_index: u8,
}

impl CounterfactualSpec {
    pub fn is_consistent(&self) -> bool {
        let same = self.original_category == self.counter_category;
        let mode_ok = match self.mode {
            SubstitutionMode::CorpusSubstitution => same,
            SubstitutionMode::TypeSwap => !same,
        };
        mode_ok
            && normalize_text(&self.original_answer) != normalize_text(&self.counter_answer)
            && (1..=REPEATS_PER_MODE).contains(&self.repeat_index)
    }
}

/// Answer entities grouped by category, deduplicated, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityCorpus {
    entities: BTreeMap<EntityCategory, Vec<String>>,
}

impl EntityCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add an entity; returns false for duplicates, empty strings and `Other`.
    pub fn insert(&mut self, category: EntityCategory, surface: &str) -> bool {
        let surface = surface.trim();
        if surface.is_empty() || category == EntityCategory::Other {
            return false;
        }
        let list = self.entities.entry(category).or_default();
        if list.iter().any(|s| s == surface) {
            return false;
        }
        list.push(surface.to_string());
        true
    }

    pub fn get(&self, category: EntityCategory) -> &[String] {
        self.entities.get(&category).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entities.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Category of a known entity, matched after normalization.
    pub fn category_of(&self, surface: &str) -> Option<EntityCategory> {
        let norm = normalize_text(surface);
        self.entities
            .iter()
            .find(|(_, list)| list.iter().any(|s| normalize_text(s) == norm))
            .map(|(c, _)| *c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntityCategory, &str)> {
        self.entities
            .iter()
            .flat_map(|(c, list)| list.iter().map(move |s| (*c, s.as_str())))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntityCorpusReport {
    pub corpus: EntityCorpus,
    /// Answers the recognizer could not place in one of the five categories.
    pub skipped: usize,
}

/// Categorize every gold answer with the recognizer. An answer takes the
/// category of its longest recognized span.
pub fn build_entity_corpus(questions: &[Question], ner: &dyn EntityRecognizer) -> Result<EntityCorpusReport> {
    let mut report = EntityCorpusReport::default();
    for q in questions {
        for answer in &q.gold_answers {
            if answer.trim().is_empty() {
                report.skipped += 1;
                continue;
            }
            let spans = ner.ner(answer)?;
            let category = spans
                .iter()
                .max_by_key(|s| (s.char_end - s.char_start, std::cmp::Reverse(s.char_start)))
                .map(|s| s.category)
                .unwrap_or(EntityCategory::Other);
            if category == EntityCategory::Other {
                report.skipped += 1;
            } else {
                report.corpus.insert(category, answer);
            }
        }
    }
    Ok(report)
}

/// Case-insensitive occurrences of `needle` not embedded in a longer
/// alphanumeric run, as byte ranges.
pub fn find_occurrences(text: &str, needle: &str) -> Vec<Range<usize>> {
    let needle: Vec<char> = needle.trim().chars().collect();
    if needle.is_empty() {
        return Vec::new();
    }
    let same = |a: char, b: char| a == b || a.to_lowercase().eq(b.to_lowercase());
    let mut out = Vec::new();
    let mut prev: Option<char> = None;
    let mut skip_to = 0;
    for (start, c) in text.char_indices() {
        if start >= skip_to && !prev.is_some_and(char::is_alphanumeric) && same(c, needle[0]) {
            let mut chars = text[start..].char_indices();
            let matched = needle.iter().all(|&n| chars.next().is_some_and(|(_, t)| same(t, n)));
            if matched {
                let end = chars.next().map_or(text.len(), |(off, _)| start + off);
                if !text[end..].chars().next().is_some_and(char::is_alphanumeric) {
                    out.push(start..end);
                    skip_to = end;
                }
            }
        }
        prev = Some(c);
    }
    out
}

fn replace_ranges(text: &str, ranges: &[Range<usize>], with: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for r in ranges {
        out.push_str(&text[last..r.start]);
        out.push_str(with);
        last = r.end;
    }
    out.push_str(&text[last..]);
    out
}

/// Counter-answers eligible for `mode`: they must differ from the answer and
/// must not already appear in the text being rewritten.
fn eligible<'c>(
    corpus: &'c EntityCorpus,
    answer: &str,
    category: EntityCategory,
    mode: SubstitutionMode,
    text: &str,
) -> Vec<(EntityCategory, &'c str)> {
    let norm_answer = normalize_text(answer);
    corpus
        .iter()
        .filter(|(c, _)| match mode {
            SubstitutionMode::CorpusSubstitution => *c == category,
            SubstitutionMode::TypeSwap => *c != category,
        })
        .filter(|(_, s)| normalize_text(s) != norm_answer && find_occurrences(text, s).is_empty())
        .collect()
}

/// Replace every occurrence of `answer` in the evidence with one entity drawn
/// from the corpus (seeded).
pub fn substitute_entities(
    evidence: &Passage,
    answer: &str,
    corpus: &EntityCorpus,
    mode: SubstitutionMode,
    seed: u64,
) -> Result<(Passage, CounterfactualSpec)> {
    if !text_contains_answer(&evidence.text, &[answer.to_string()]) {
        return Err(Error::Precondition(format!(
            "answer {answer:?} does not occur in passage {}",
            evidence.id
        )));
    }
    let occurrences = find_occurrences(&evidence.text, answer);
    if occurrences.is_empty() {
        return Err(Error::Precondition(format!(
            "answer {answer:?} has no whole occurrence in passage {}",
            evidence.id
        )));
    }
    let category = corpus.category_of(answer).ok_or_else(|| {
        Error::Precondition(format!("answer {answer:?} is not in the entity corpus"))
    })?;
    let pool = eligible(corpus, answer, category, mode, &evidence.text);
    if pool.is_empty() {
        return Err(Error::Exhausted {
            answer: answer.to_string(),
            mode: mode.to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (counter_category, counter) = pool[rng.gen_range(0..pool.len())];
    let spec = CounterfactualSpec {
        mode,
        original_answer: answer.to_string(),
        counter_answer: counter.to_string(),
        original_category: category,
        counter_category,
        repeat_index: 1,
    };
    let text = replace_ranges(&evidence.text, &occurrences, counter);
    let id = format!("{}#{}1", evidence.id, mode.short());
    let passage = Passage::counterfactual(id, text, spec.clone(), &evidence.id)?;
    Ok((passage, spec))
}

/// Counterfactuals plus any conditions worth reporting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CounterfactualBatch {
    pub passages: Vec<Passage>,
    pub warnings: Vec<String>,
}

/// First gold answer that occurs in the evidence and is a known entity.
fn usable_answer<'q>(question: &'q Question, evidence: &Passage, corpus: &EntityCorpus) -> Option<&'q str> {
    question.gold_answers.iter().map(String::as_str).find(|a| {
        corpus.category_of(a).is_some() && !find_occurrences(&evidence.text, a).is_empty()
    })
}

/// Up to five counterfactuals per substitution mode from one evidence passage.
pub fn make_counterfactuals_substitution(
    question: &Question,
    evidence: &Passage,
    corpus: &EntityCorpus,
    seed: u64,
) -> Result<CounterfactualBatch> {
    let mut batch = CounterfactualBatch::default();
    let Some(answer) = usable_answer(question, evidence, corpus) else {
        batch.warnings.push(format!(
            "question {}: no gold answer of a known category occurs in {}",
            question.id, evidence.id
        ));
        return Ok(batch);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for mode in SubstitutionMode::BOTH {
        let mut used = HashSet::new();
        'repeats: for repeat in 1..=REPEATS_PER_MODE {
            for _ in 0..DEDUP_DRAW_CAP {
                match substitute_entities(evidence, answer, corpus, mode, rng.next_u64()) {
                    Ok((mut passage, mut spec)) => {
                        if !used.insert(normalize_text(&spec.counter_answer)) {
                            continue;
                        }
                        spec.repeat_index = repeat;
                        passage.id = format!("{}#{}{repeat}", evidence.id, mode.short());
                        passage.provenance.substitution = Some(spec);
                        batch.passages.push(passage);
                        continue 'repeats;
                    }
                    Err(Error::Exhausted { .. }) => {
                        batch.warnings.push(format!(
                            "question {}: no {mode} counter-answer for {answer:?}",
                            question.id
                        ));
                        break 'repeats;
                    }
                    Err(e) => return Err(e),
                }
            }
            batch.warnings.push(format!(
                "question {}: {mode} repeat {repeat} dropped after {DEDUP_DRAW_CAP} duplicate draws",
                question.id
            ));
        }
    }
    Ok(batch)
}

/// Trim to at most `limit` words, ending at the last sentence boundary inside
/// the limit when there is one.
pub fn truncate_words(text: &str, limit: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= limit {
        return words.join(" ");
    }
    let head = &words[..limit];
    match head
        .iter()
        .rposition(|w| w.ends_with(['.', '!', '?']) || w.ends_with(".\"") || w.ends_with(".)"))
    {
        Some(i) => head[..=i].join(" "),
        None => head.join(" "),
    }
}

/// How one claim fared in the generation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub claim: String,
    pub spec: CounterfactualSpec,
    pub contradicts_answer: bool,
    /// Fabrication attempts made (0 when the claim was filtered out).
    pub attempts: u32,
    pub supported: bool,
}

impl ClaimOutcome {
    pub fn retries(&self) -> u32 {
        self.attempts.saturating_sub(1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratedBatch {
    pub passages: Vec<Passage>,
    pub claims: Vec<ClaimOutcome>,
    pub warnings: Vec<String>,
}

/// Counterfactuals for sentence-level answers: rewrite the answer into
/// contradicting claims, keep those the NLI model says contradict it, have
/// the LLM fabricate supporting evidence for each, and keep evidence the NLI
/// model says entails its claim.
#[allow(clippy::too_many_arguments)]
pub fn make_counterfactuals_generated(
    question: &Question,
    evidence: &Passage,
    answer: &str,
    corpus: &EntityCorpus,
    chat: &ChatClient,
    nli: &dyn NliModel,
    seed: u64,
) -> Result<GeneratedBatch> {
    let mut batch = GeneratedBatch::default();
    let question_norm = normalize_text(&question.text);

    // (i) entities of the answer that the question does not mention.
    let targets: Vec<&str> = corpus
        .iter()
        .map(|(_, s)| s)
        .filter(|s| !find_occurrences(answer, s).is_empty())
        .filter(|s| !question_norm.contains(&normalize_text(s)))
        .collect();
    if targets.is_empty() {
        batch.warnings.push(format!(
            "question {}: answer mentions no substitutable entity",
            question.id
        ));
        return Ok(batch);
    }
    let answer_passage = Passage::new(format!("{}#answer", question.id), answer, Origin::GroundTruth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut claims: Vec<(String, CounterfactualSpec)> = Vec::new();
    for mode in SubstitutionMode::BOTH {
        let mut used = HashSet::new();
        'repeats: for repeat in 1..=REPEATS_PER_MODE {
            for _ in 0..DEDUP_DRAW_CAP {
                let target = targets[rng.gen_range(0..targets.len())];
                match substitute_entities(&answer_passage, target, corpus, mode, rng.next_u64()) {
                    Ok((claim, mut spec)) => {
                        if !used.insert(normalize_text(&spec.counter_answer)) {
                            continue;
                        }
                        spec.repeat_index = repeat;
                        claims.push((claim.text, spec));
                        continue 'repeats;
                    }
                    Err(Error::Exhausted { .. }) | Err(Error::Precondition(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            batch.warnings.push(format!(
                "question {}: {mode} claim {repeat} dropped after {DEDUP_DRAW_CAP} draws",
                question.id
            ));
        }
    }

    for (claim, spec) in claims {
        // (ii) keep claims contradicting the correct answer.
        let verdict = nli.nli(answer, &claim).map_err(|e| e.at_step("claim contradiction check"))?;
        let mut outcome = ClaimOutcome {
            claim: claim.clone(),
            spec: spec.clone(),
            contradicts_answer: verdict.label == NliLabel::Contradiction,
            attempts: 0,
            supported: false,
        };
        if !outcome.contradicts_answer {
            batch.claims.push(outcome);
            continue;
        }
        // (iii) fabricate, (iv) support-check, retrying failed checks.
        let prompt = fabrication_prompt(&claim);
        let request = chat
            .request(prompt.as_str(), FABRICATION_TEMPERATURE)?
            .with_max_output_tokens(256);
        while outcome.attempts <= SUPPORT_RETRY_CAP {
            outcome.attempts += 1;
            let generated = chat.chat(&request).map_err(|e| e.at_step("evidence fabrication"))?;
            let text = truncate_words(&generated.text, FABRICATION_WORD_LIMIT);
            if text.is_empty() {
                continue;
            }
            let support = nli.nli(&text, &claim).map_err(|e| e.at_step("support check"))?;
            if support.label == NliLabel::Entailment {
                outcome.supported = true;
                let id = format!("{}#gen-{}{}", evidence.id, spec.mode.short(), spec.repeat_index);
                let mut passage = Passage::counterfactual(id, text, spec.clone(), &evidence.id)?;
                passage.provenance.claim = Some(claim.clone());
                passage.provenance.generation_prompt_hash = Some(prompt_hash(&prompt));
                passage.provenance.support_retries = Some(outcome.retries());
                batch.passages.push(passage);
                break;
            }
        }
        batch.claims.push(outcome);
    }
    if batch.passages.is_empty() {
        batch.warnings.push(format!(
            "question {}: no generated counterfactual survived",
            question.id
        ));
    }
    Ok(batch)
}

/// The retriever's top `n` passages, in rank order.
pub fn build_gtu(run: &RetrievalRun, store: &PassageStore, question: &Question, n: usize) -> Result<CandidateSet> {
    let entries = run.get(&question.id);
    if entries.len() < n {
        return Err(Error::Shortfall {
            question_id: question.id.clone(),
            available: entries.len(),
            required: n,
        });
    }
    let passages = entries[..n]
        .iter()
        .map(|e| {
            store
                .passage(&e.passage_id, Origin::Retrieved)
                .ok_or_else(|| Error::Lookup(format!("passage {} not in corpus", e.passage_id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidateSet::new(&question.id, 0, passages))
}

fn noisy_candidate(store: &PassageStore, question: &Question, passage_id: &str, origin: Origin) -> Option<Passage> {
    let Some(passage) = store.passage(passage_id, origin) else {
        log::warn!("question {}: run passage {passage_id} not in corpus", question.id);
        return None;
    };
    (!contains_answer(&passage, &question.gold_answers)).then_some(passage)
}

/// Top-down scan for passages that do not mention the answer and are not
/// ground truth (restricted to annotated-unused passages when the question
/// carries that annotation). Most relevant first.
pub fn select_hrnp(run: &RetrievalRun, question: &Question, store: &PassageStore, k: usize) -> Vec<Passage> {
    let entries = run.get(&question.id);
    entries
        .iter()
        .take(RetrievalRun::MAX_DEPTH)
        .filter(|e| !question.ground_truth_ids.contains(&e.passage_id))
        .filter(|e| question.unselected_ids.is_empty() || question.unselected_ids.contains(&e.passage_id))
        .filter_map(|e| noisy_candidate(store, question, &e.passage_id, Origin::Hrnp))
        .take(k)
        .collect()
}

/// Bottom-up scan with the same filter, skipping `exclude`. Least relevant
/// first.
pub fn select_wrnp(
    run: &RetrievalRun,
    question: &Question,
    store: &PassageStore,
    exclude: &HashSet<String>,
    k: usize,
) -> Vec<Passage> {
    let entries = run.get(&question.id);
    let depth = entries.len().min(RetrievalRun::MAX_DEPTH);
    entries[..depth]
        .iter()
        .rev()
        .filter(|e| !exclude.contains(&e.passage_id) && !question.ground_truth_ids.contains(&e.passage_id))
        .filter_map(|e| noisy_candidate(store, question, &e.passage_id, Origin::Wrnp))
        .take(k)
        .collect()
}

/// Where ground truth goes in an assembled set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Placement {
    #[default]
    Shuffled,
    /// Shuffle, then move the ground truth to start at this 0-based index.
    GroundTruthAt(usize),
}

const CP: usize = 0;
const HRNP: usize = 1;
const WRNP: usize = 2;

/// Which other pools cover a shortfall, in order.
const BACKFILL: [[usize; 2]; 3] = [[HRNP, WRNP], [WRNP, CP], [HRNP, CP]];

/// Combine ground truth with distractors into an N-passage set. The non-GT
/// slots are split evenly over CP/HRNP/WRNP, leftover slots go to randomly
/// chosen categories, and a short pool borrows from the others.
#[allow(clippy::too_many_arguments)]
pub fn assemble_candidates(
    question_id: &str,
    ground_truth: &[Passage],
    cp_pool: &[Passage],
    hrnp_pool: &[Passage],
    wrnp_pool: &[Passage],
    n: usize,
    seed: u64,
    placement: Placement,
) -> Result<CandidateSet> {
    let fail = |reason: String| Error::Assembly {
        question_id: question_id.to_string(),
        reason,
    };
    if ground_truth.is_empty() {
        return Err(fail("no ground-truth passage".into()));
    }
    if ground_truth.len() >= n {
        return Err(fail(format!("{} ground-truth passages leave no room in {n}", ground_truth.len())));
    }
    let m = n - ground_truth.len();
    let base = m / 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut targets = [base; 3];
    for _ in 0..m - 3 * base {
        targets[rng.gen_range(0..3)] += 1;
    }

    let available = [cp_pool.len(), hrnp_pool.len(), wrnp_pool.len()];
    let mut counts = targets;
    for cat in [HRNP, WRNP, CP] {
        let mut deficit = counts[cat].saturating_sub(available[cat]);
        counts[cat] -= deficit;
        for donor in BACKFILL[cat] {
            let spare = available[donor].saturating_sub(counts[donor]);
            let moved = spare.min(deficit);
            counts[donor] += moved;
            deficit -= moved;
        }
        if deficit > 0 {
            return Err(fail(format!(
                "pools hold {} CP, {} HRNP, {} WRNP for {m} slots",
                available[CP], available[HRNP], available[WRNP]
            )));
        }
    }

    let mut cp: Vec<&Passage> = cp_pool.iter().collect();
    cp.shuffle(&mut rng);
    let mut others: Vec<Passage> = Vec::with_capacity(m);
    others.extend(cp.into_iter().take(counts[CP]).cloned());
    others.extend(hrnp_pool.iter().take(counts[HRNP]).cloned());
    others.extend(wrnp_pool.iter().take(counts[WRNP]).cloned());

    let passages = match placement {
        Placement::Shuffled => {
            let mut all: Vec<Passage> = ground_truth.iter().cloned().chain(others).collect();
            all.shuffle(&mut rng);
            all
        }
        Placement::GroundTruthAt(p) => {
            if p + ground_truth.len() > n {
                return Err(fail(format!("ground truth cannot start at position {p}")));
            }
            others.shuffle(&mut rng);
            let tail = others.split_off(p);
            others.extend(ground_truth.iter().cloned());
            others.extend(tail);
            others
        }
    };
    Ok(CandidateSet::new(question_id, seed, passages))
}

/// Everything needed to build one GTI instance.
pub struct GtiSources<'a> {
    pub run: &'a RetrievalRun,
    pub store: &'a PassageStore,
    pub entities: &'a EntityCorpus,
    /// Needed for non-factoid questions (generated counterfactuals).
    pub generator: Option<(&'a ChatClient, &'a dyn NliModel)>,
}

/// Build one GTI candidate set; the question's generator is seeded by
/// (global seed, question id).
pub fn build_gti(
    question: &Question,
    sources: &GtiSources<'_>,
    n: usize,
    global_seed: u64,
    placement: Placement,
) -> Result<(CandidateSet, Vec<String>)> {
    let seed = derive_seed(global_seed, &question.id);
    let mut warnings = Vec::new();
    let ground_truth = question
        .ground_truth_ids
        .iter()
        .map(|id| {
            sources
                .store
                .passage(id, Origin::GroundTruth)
                .ok_or_else(|| Error::Lookup(format!("ground-truth passage {id} not in corpus")))
        })
        .collect::<Result<Vec<_>>>()?;
    if ground_truth.is_empty() {
        return Err(Error::Precondition(format!("question {} has no ground-truth ids", question.id)));
    }

    let mut cp_pool = Vec::new();
    for (i, evidence) in ground_truth.iter().enumerate() {
        let cp_seed = derive_seed(seed, &format!("cp/{i}"));
        match question.dataset_kind {
            crate::corpus::DatasetKind::Fqa => {
                let batch = make_counterfactuals_substitution(question, evidence, sources.entities, cp_seed)?;
                warnings.extend(batch.warnings);
                cp_pool.extend(batch.passages);
            }
            crate::corpus::DatasetKind::Nfqa => {
                let (chat, nli) = sources.generator.ok_or_else(|| {
                    Error::Config("non-factoid GTI construction needs an LLM and an NLI model".into())
                })?;
                for answer in &question.gold_answers {
                    let batch = make_counterfactuals_generated(
                        question,
                        evidence,
                        answer,
                        sources.entities,
                        chat,
                        nli,
                        derive_seed(cp_seed, answer),
                    )?;
                    warnings.extend(batch.warnings);
                    cp_pool.extend(batch.passages);
                }
            }
        }
    }

    let hrnp = select_hrnp(sources.run, question, sources.store, DEFAULT_N);
    let mut exclude: HashSet<String> = hrnp.iter().map(|p| p.id.clone()).collect();
    exclude.extend(question.ground_truth_ids.iter().cloned());
    let wrnp = select_wrnp(sources.run, question, sources.store, &exclude, DEFAULT_N);

    let set = assemble_candidates(
        &question.id,
        &ground_truth,
        &cp_pool,
        &hrnp,
        &wrnp,
        n,
        derive_seed(seed, "assemble"),
        placement,
    )?;
    Ok((set, warnings))
}
