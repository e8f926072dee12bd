//! Questions, passages, retrieval runs and candidate sets, plus the text
//! normalization shared by answer matching and the QA metrics.
//!
//! Input files are line-delimited JSON records. Blank lines are skipped and
//! a leading `{"_meta": ...}` header record (as written by the pipeline) is
//! ignored by every loader.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::synth::CounterfactualSpec;

/// Factoid (short span answers) or non-factoid (sentence answers) dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetKind {
    #[serde(rename = "FQA")]
    Fqa,
    #[serde(rename = "NFQA")]
    Nfqa,
}

impl DatasetKind {
    pub fn label(self) -> &'static str {
        match self {
            DatasetKind::Fqa => "FQA",
            DatasetKind::Nfqa => "NFQA",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub gold_answers: Vec<String>,
    pub ground_truth_ids: Vec<String>,
    pub dataset_kind: DatasetKind,
    /// Passages annotated as retrieved-but-unused (MSMARCO `is_selected: 0`).
    /// When non-empty, highly relevant noise is restricted to these ids.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unselected_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    GroundTruth,
    Counterfactual,
    #[serde(rename = "HRNP")]
    Hrnp,
    #[serde(rename = "WRNP")]
    Wrnp,
    Retrieved,
}

impl Origin {
    pub const ALL: [Origin; 5] = [
        Origin::GroundTruth,
        Origin::Counterfactual,
        Origin::Hrnp,
        Origin::Wrnp,
        Origin::Retrieved,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Origin::GroundTruth => "GT",
            Origin::Counterfactual => "CP",
            Origin::Hrnp => "HRNP",
            Origin::Wrnp => "WRNP",
            Origin::Retrieved => "Retrieved",
        }
    }
}

/// Where a passage came from. Empty for passages taken verbatim from the corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_passage_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitution: Option<CounterfactualSpec>,
    /// Claim the passage was fabricated to support (generation pipeline).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_prompt_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_retries: Option<u32>,
}

impl Provenance {
    pub fn is_empty(&self) -> bool {
        *self == Provenance::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub text: String,
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Provenance::is_empty")]
    pub provenance: Provenance,
}

impl Passage {
    pub fn new(id: impl Into<String>, text: impl Into<String>, origin: Origin) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::Contract("passage text must be non-empty".into()));
        }
        Ok(Passage {
            id: id.into(),
            text,
            origin,
            provenance: Provenance::default(),
        })
    }

    /// A counterfactual passage always records the counter-answer it carries.
    pub fn counterfactual(
        id: impl Into<String>,
        text: impl Into<String>,
        spec: CounterfactualSpec,
        source_passage_id: &str,
    ) -> Result<Self> {
        let mut passage = Passage::new(id, text, Origin::Counterfactual)?;
        passage.provenance.source_passage_id = Some(source_passage_id.to_string());
        passage.provenance.substitution = Some(spec);
        Ok(passage)
    }

    pub fn with_origin(&self, origin: Origin) -> Self {
        Passage {
            origin,
            ..self.clone()
        }
    }
}

/// Passage corpus keyed by id.
#[derive(Debug, Clone, Default)]
pub struct PassageStore {
    texts: HashMap<String, String>,
}

impl PassageStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, text: impl Into<String>) {
        self.texts.insert(id.into(), text.into());
    }

    pub fn text(&self, id: &str) -> Option<&str> {
        self.texts.get(id).map(String::as_str)
    }

    /// Materialize a stored passage with the given origin.
    pub fn passage(&self, id: &str, origin: Origin) -> Option<Passage> {
        self.texts.get(id).map(|text| Passage {
            id: id.to_string(),
            text: text.clone(),
            origin,
            provenance: Provenance::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }
}

impl FromIterator<(String, String)> for PassageStore {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        PassageStore {
            texts: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub passage_id: String,
    pub rank: u32,
    pub score: f64,
}

/// Ranked retrieval results per question, ranks contiguous from 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetrievalRun {
    entries: BTreeMap<String, Vec<RunEntry>>,
}

impl RetrievalRun {
    /// Deepest rank considered when mining noisy passages.
    pub const MAX_DEPTH: usize = 100;

    pub fn get(&self, question_id: &str) -> &[RunEntry] {
        self.entries
            .get(question_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn question_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Build from per-question lists that are already ordered by rank.
    pub fn from_ranked(lists: BTreeMap<String, Vec<RunEntry>>) -> Result<Self> {
        for (qid, list) in &lists {
            let mut seen = HashSet::new();
            for (i, entry) in list.iter().enumerate() {
                if entry.rank as usize != i + 1 {
                    return Err(Error::Contract(format!(
                        "question {qid}: rank {} at position {}",
                        entry.rank,
                        i + 1
                    )));
                }
                if !seen.insert(entry.passage_id.as_str()) {
                    return Err(Error::Contract(format!(
                        "question {qid}: duplicate passage {}",
                        entry.passage_id
                    )));
                }
            }
        }
        Ok(RetrievalRun { entries: lists })
    }

    /// TREC six-column layout, questions in id order.
    pub fn to_trec(&self, tag: &str) -> String {
        let mut out = String::new();
        for (qid, list) in &self.entries {
            for e in list {
                let _ = writeln!(out, "{qid} Q0 {} {} {} {tag}", e.passage_id, e.rank, e.score);
            }
        }
        out
    }
}

/// Count of passages per origin in a candidate set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub ground_truth: usize,
    pub counterfactual: usize,
    pub hrnp: usize,
    pub wrnp: usize,
    pub retrieved: usize,
}

impl Composition {
    pub fn of(passages: &[Passage]) -> Self {
        let mut c = Composition::default();
        for p in passages {
            *c.slot(p.origin) += 1;
        }
        c
    }

    pub fn get(&self, origin: Origin) -> usize {
        match origin {
            Origin::GroundTruth => self.ground_truth,
            Origin::Counterfactual => self.counterfactual,
            Origin::Hrnp => self.hrnp,
            Origin::Wrnp => self.wrnp,
            Origin::Retrieved => self.retrieved,
        }
    }

    fn slot(&mut self, origin: Origin) -> &mut usize {
        match origin {
            Origin::GroundTruth => &mut self.ground_truth,
            Origin::Counterfactual => &mut self.counterfactual,
            Origin::Hrnp => &mut self.hrnp,
            Origin::Wrnp => &mut self.wrnp,
            Origin::Retrieved => &mut self.retrieved,
        }
    }

    pub fn total(&self) -> usize {
        Origin::ALL.iter().map(|&o| self.get(o)).sum()
    }
}

/// The size-N candidate list handed to a judge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub question_id: String,
    pub seed: u64,
    pub passages: Vec<Passage>,
    pub composition: Composition,
}

impl CandidateSet {
    pub fn new(question_id: impl Into<String>, seed: u64, passages: Vec<Passage>) -> Self {
        let composition = Composition::of(&passages);
        CandidateSet {
            question_id: question_id.into(),
            seed,
            passages,
            composition,
        }
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    /// Indices of passages that count as ground-truth evidence: either built
    /// as such, or retrieved passages the question lists as gold.
    pub fn truth_indices(&self, question: &Question) -> Vec<usize> {
        self.passages
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                p.origin == Origin::GroundTruth || question.ground_truth_ids.contains(&p.id)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Reorder so the ground-truth passages start at `position`, keeping the
    /// relative order of everything else.
    pub fn with_ground_truth_at(&self, position: usize, question: &Question) -> Result<Self> {
        let truth = self.truth_indices(question);
        if truth.is_empty() {
            return Err(Error::Contract(format!(
                "question {}: no ground truth to place",
                self.question_id
            )));
        }
        if position + truth.len() > self.passages.len() {
            return Err(Error::Contract(format!(
                "position {position} out of range for {} passages",
                self.passages.len()
            )));
        }
        let gold: Vec<Passage> = truth.iter().map(|&i| self.passages[i].clone()).collect();
        let mut rest: Vec<Passage> = self
            .passages
            .iter()
            .enumerate()
            .filter(|(i, _)| !truth.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        let tail = rest.split_off(position);
        rest.extend(gold);
        rest.extend(tail);
        Ok(CandidateSet {
            passages: rest,
            ..self.clone()
        })
    }
}

/// Lowercase, strip ASCII punctuation, drop the articles "a", "an", "the",
/// and collapse whitespace. Non-ASCII characters other than whitespace are
/// kept as-is.
pub fn normalize_text(s: &str) -> String {
    let lowered: String = s
        .to_lowercase()
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    let mut out = String::with_capacity(lowered.len());
    for token in lowered.split_whitespace() {
        if matches!(token, "a" | "an" | "the") {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Normalized whitespace tokens.
pub fn normalized_tokens(s: &str) -> Vec<String> {
    normalize_text(s)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Whether the passage mentions any of the answers after normalization.
pub fn contains_answer(passage: &Passage, answers: &[String]) -> bool {
    text_contains_answer(&passage.text, answers)
}

pub fn text_contains_answer(text: &str, answers: &[String]) -> bool {
    let haystack = normalize_text(text);
    answers.iter().any(|a| {
        let needle = normalize_text(a);
        !needle.is_empty() && haystack.contains(&needle)
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank, non-header lines with 1-based line numbers.
fn records(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("{\"_meta\""))
}

fn parse_object(line_no: usize, line: &str) -> Result<serde_json::Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::Parse {
            line: line_no,
            message: "expected a JSON object".into(),
        }),
        Err(e) => Err(Error::Parse {
            line: line_no,
            message: e.to_string(),
        }),
    }
}

fn string_field(map: &serde_json::Map<String, Value>, line: usize, field: &str) -> Result<String> {
    match map.get(field) {
        None | Some(Value::Null) => Err(Error::MissingField {
            line,
            field: field.into(),
        }),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(Error::Parse {
            line,
            message: format!("field \"{field}\" must be a string"),
        }),
    }
}

fn string_list(
    map: &serde_json::Map<String, Value>,
    line: usize,
    field: &str,
    required: bool,
) -> Result<Vec<String>> {
    match map.get(field) {
        None | Some(Value::Null) if required => Err(Error::MissingField {
            line,
            field: field.into(),
        }),
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                other => Ok(other.to_string()),
            })
            .collect(),
        Some(_) => Err(Error::Parse {
            line,
            message: format!("field \"{field}\" must be an array"),
        }),
    }
}

/// Parse a questions file: one `{id, question, answers, ground_truth_ids}`
/// record per line (optional `unselected_ids`).
pub fn parse_questions(content: &str, kind: DatasetKind) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (line, raw) in records(content) {
        let map = parse_object(line, raw)?;
        let id = string_field(&map, line, "id")?;
        let text = string_field(&map, line, "question")?;
        let gold_answers = string_list(&map, line, "answers", true)?;
        let ground_truth_ids = string_list(&map, line, "ground_truth_ids", true)?;
        let unselected_ids = string_list(&map, line, "unselected_ids", false)?;
        if id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty question id".into(),
            });
        }
        if gold_answers.is_empty() {
            return Err(Error::Parse {
                line,
                message: "\"answers\" must hold at least one answer".into(),
            });
        }
        if !ids.insert(id.clone()) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate question id {id}"),
            });
        }
        out.push(Question {
            id,
            text,
            gold_answers,
            ground_truth_ids,
            dataset_kind: kind,
            unselected_ids,
        });
    }
    Ok(out)
}

pub fn load_questions(path: impl AsRef<Path>, kind: DatasetKind) -> Result<Vec<Question>> {
    parse_questions(&read_to_string(path.as_ref())?, kind)
}

/// Parse a passage corpus of `{id, text}` records.
pub fn parse_passages(content: &str) -> Result<PassageStore> {
    let mut store = PassageStore::new();
    for (line, raw) in records(content) {
        let map = parse_object(line, raw)?;
        let id = string_field(&map, line, "id")?;
        let text = string_field(&map, line, "text")?;
        if text.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("passage {id} has empty text"),
            });
        }
        store.insert(id, text);
    }
    Ok(store)
}

pub fn load_passages(path: impl AsRef<Path>) -> Result<PassageStore> {
    parse_passages(&read_to_string(path.as_ref())?)
}

/// Parse TREC run lines `qid Q0 pid rank score tag`. Lists deeper than
/// [`RetrievalRun::MAX_DEPTH`] are cut at that depth.
pub fn parse_run(content: &str) -> Result<RetrievalRun> {
    let mut lists: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 6 {
            return Err(Error::Parse {
                line,
                message: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let rank: u32 = fields[3].parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-integer rank \"{}\"", fields[3]),
        })?;
        let score: f64 = fields[4].parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-numeric score \"{}\"", fields[4]),
        })?;
        let list = lists.entry(fields[0].to_string()).or_default();
        if list.iter().any(|(_, e)| e.passage_id == fields[2]) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate passage {} for question {}", fields[2], fields[0]),
            });
        }
        list.push((
            line,
            RunEntry {
                passage_id: fields[2].to_string(),
                rank,
                score,
            },
        ));
    }

    let mut entries = BTreeMap::new();
    for (qid, mut list) in lists {
        list.sort_by_key(|(_, e)| e.rank);
        for (i, (line, e)) in list.iter().enumerate() {
            if e.rank as usize != i + 1 {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("rank gap at line {line}"),
                });
            }
        }
        list.truncate(RetrievalRun::MAX_DEPTH);
        entries.insert(qid, list.into_iter().map(|(_, e)| e).collect());
    }
    Ok(RetrievalRun { entries })
}

pub fn load_run(path: impl AsRef<Path>) -> Result<RetrievalRun> {
    parse_run(&read_to_string(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("The Cat!"), "cat");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("An  apple, a day."), "apple day");
    }

    #[test]
    fn normalize_keeps_non_ascii_punctuation() {
        assert_eq!(normalize_text("«Café»  Über"), "«café» über");
    }

    #[test]
    fn contains_answer_examples() {
        let p = |t: &str| Passage::new("p", t, Origin::Retrieved).unwrap();
        assert!(contains_answer(&p("born in 1987."), &["1987".into()]));
        assert!(!contains_answer(&p("no dates here"), &["1987".into()]));
        // "the hamlet play" vs "hamlet": articles go on both sides.
        assert!(contains_answer(&p("The Hamlet play"), &["the hamlet".into()]));
    }

    #[test]
    fn empty_answer_never_matches() {
        let p = Passage::new("p", "anything", Origin::Retrieved).unwrap();
        assert!(!contains_answer(&p, &["the".into()]));
    }

    #[test]
    fn questions_parse_and_errors() {
        let line = r#"{"id":"q1","question":"who wrote hamlet","answers":["Shakespeare"],"ground_truth_ids":["p9"]}"#;
        let qs = parse_questions(line, DatasetKind::Fqa).unwrap();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].id, "q1");
        assert_eq!(qs[0].text, "who wrote hamlet");
        assert_eq!(qs[0].gold_answers, vec!["Shakespeare"]);
        assert_eq!(qs[0].ground_truth_ids, vec!["p9"]);

        assert!(parse_questions("", DatasetKind::Fqa).unwrap().is_empty());

        let missing = r#"{"id":"q1","question":"x","ground_truth_ids":[]}"#;
        match parse_questions(missing, DatasetKind::Fqa) {
            Err(Error::MissingField { line, field }) => {
                assert_eq!(line, 1);
                assert_eq!(field, "answers");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_question_ids_rejected() {
        let body = concat!(
            r#"{"id":"q1","question":"a","answers":["x"],"ground_truth_ids":[]}"#,
            "\n",
            r#"{"id":"q1","question":"b","answers":["y"],"ground_truth_ids":[]}"#
        );
        assert!(matches!(
            parse_questions(body, DatasetKind::Fqa),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn run_single_and_ordered() {
        let run = parse_run("q1 Q0 p7 1 12.3 sys\n").unwrap();
        assert_eq!(
            run.get("q1"),
            &[RunEntry {
                passage_id: "p7".into(),
                rank: 1,
                score: 12.3
            }]
        );
        let run = parse_run("q1 Q0 b 2 1.0 s\nq1 Q0 a 1 2.0 s\n").unwrap();
        let ids: Vec<_> = run.get("q1").iter().map(|e| e.passage_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn run_errors() {
        let gap = parse_run("q1 Q0 a 1 1.0 s\nq1 Q0 b 3 0.5 s\n").unwrap_err();
        assert!(gap.to_string().contains("rank gap at line 2"), "{gap}");
        assert!(matches!(
            parse_run("q1 Q0 a one 1.0 s"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_run("q1 Q0 a 1 1.0 s\nq1 Q0 a 2 0.5 s"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn run_truncated_at_max_depth() {
        let body: String = (1..=150)
            .map(|r| format!("q Q0 p{r} {r} {} s\n", 200 - r))
            .collect();
        let run = parse_run(&body).unwrap();
        assert_eq!(run.get("q").len(), RetrievalRun::MAX_DEPTH);
    }

    #[test]
    fn ground_truth_placement() {
        let q = Question {
            id: "q".into(),
            text: "t".into(),
            gold_answers: vec!["x".into()],
            ground_truth_ids: vec![],
            dataset_kind: DatasetKind::Fqa,
            unselected_ids: vec![],
        };
        let mut passages: Vec<Passage> = (0..4)
            .map(|i| Passage::new(format!("n{i}"), "t", Origin::Hrnp).unwrap())
            .collect();
        passages.insert(1, Passage::new("g", "t", Origin::GroundTruth).unwrap());
        let set = CandidateSet::new("q", 0, passages);
        for p in 0..5 {
            let moved = set.with_ground_truth_at(p, &q).unwrap();
            assert_eq!(moved.truth_indices(&q), vec![p]);
            assert_eq!(moved.composition, set.composition);
        }
        assert!(set.with_ground_truth_at(5, &q).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_is_idempotent(s in "\\PC{0,40}") {
                let once = normalize_text(&s);
                prop_assert_eq!(normalize_text(&once), once);
            }

            #[test]
            fn containment_distributes_over_union(
                text in "[a-c ]{0,30}",
                a in proptest::collection::vec("[a-c]{1,3}", 1..3),
                b in proptest::collection::vec("[a-c]{1,3}", 1..3),
            ) {
                let p = Passage { id: "p".into(), text, origin: Origin::Retrieved, provenance: Provenance::default() };
                let union: Vec<String> = a.iter().chain(b.iter()).cloned().collect();
                prop_assert_eq!(
                    contains_answer(&p, &union),
                    contains_answer(&p, &a) || contains_answer(&p, &b)
                );
            }

            #[test]
            fn run_roundtrip(depths in proptest::collection::vec(1usize..8, 1..4)) {
                let body: String = depths.iter().enumerate().flat_map(|(q, &d)| {
                    (1..=d).map(move |r| format!("q{q} Q0 p{q}_{r} {r} {}.5 tag\n", 10 - r))
                }).collect();
                let run = parse_run(&body).unwrap();
                let again = parse_run(&run.to_trec("tag")).unwrap();
                prop_assert_eq!(run, again);
            }
        }
    }
}
