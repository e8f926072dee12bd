//! Downstream answer generation over a chosen evidence source, and answer
//! scoring.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clients::{prompt_hash, ChatClient};
use crate::corpus::{CandidateSet, DatasetKind, Passage, Question};
use crate::error::{Error, Result};
use crate::judge::prompt::{one_line, question_and_passages};
use crate::judge::{JudgeConfig, Judgment, JudgmentRecord, JudgmentResult};
use crate::metrics::AnswerScore;

pub const QA_TEMPERATURE: f64 = 0.0;

const FQA_WITH_EVIDENCE: &str = "Answer the question based on the given passages. Only give me the answer and do not output any other words.";
const FQA_CLOSED_BOOK: &str = "Answer the question. Only give me the answer and do not output any other words.";
const NFQA_WITH_EVIDENCE: &str =
    "Answer the question based on the given passages. Write the answer in a few complete sentences.";
const NFQA_CLOSED_BOOK: &str = "Answer the question. Write the answer in a few complete sentences.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EvidenceKind {
    None,
    Dense,
    GroundTruth,
    RelevanceJudged,
    UtilityJudged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSource {
    pub kind: EvidenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judgment_config: Option<JudgeConfig>,
}

impl EvidenceSource {
    pub const NONE: EvidenceSource = EvidenceSource { kind: EvidenceKind::None, judgment_config: None };
    pub const DENSE: EvidenceSource = EvidenceSource { kind: EvidenceKind::Dense, judgment_config: None };
    pub const GROUND_TRUTH: EvidenceSource = EvidenceSource { kind: EvidenceKind::GroundTruth, judgment_config: None };

    /// Evidence chosen by a judge; the kind follows the config's judgment.
    pub fn judged(config: JudgeConfig) -> Self {
        let kind = match config.judgment {
            Judgment::Utility => EvidenceKind::UtilityJudged,
            Judgment::Relevance => EvidenceKind::RelevanceJudged,
        };
        EvidenceSource { kind, judgment_config: Some(config) }
    }

    pub fn validate(&self) -> Result<()> {
        let judged = matches!(self.kind, EvidenceKind::RelevanceJudged | EvidenceKind::UtilityJudged);
        match (judged, self.judgment_config) {
            (true, None) => Err(Error::Config(format!("{:?} evidence needs a judge config", self.kind))),
            (false, Some(_)) => Err(Error::Config(format!("{:?} evidence takes no judge config", self.kind))),
            (true, Some(c)) => {
                let expected = match c.judgment {
                    Judgment::Utility => EvidenceKind::UtilityJudged,
                    Judgment::Relevance => EvidenceKind::RelevanceJudged,
                };
                if expected != self.kind {
                    return Err(Error::Config(format!("{:?} evidence with a {} judge", self.kind, c.key())));
                }
                c.validate()
            }
            (false, None) => Ok(()),
        }
    }

    /// Row label for reports.
    pub fn label(&self) -> String {
        match (self.kind, self.judgment_config) {
            (EvidenceKind::None, _) => "None".into(),
            (EvidenceKind::Dense, _) => "Dense".into(),
            (EvidenceKind::GroundTruth, _) => "Ground-truth".into(),
            (_, Some(c)) if c.k_samples > 1 && c.judgment == Judgment::Utility => format!("{}-sampling", c.k_samples),
            (_, Some(c)) if c.k_samples > 1 => format!("relevance {}-sampling", c.k_samples),
            (_, Some(c)) => c.key(),
            (kind, None) => format!("{kind:?}"),
        }
    }
}

impl fmt::Display for EvidenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Judgment records indexed by (config key, question id).
#[derive(Debug, Clone, Default)]
pub struct JudgmentStore {
    records: BTreeMap<(String, String), JudgmentRecord>,
}

impl JudgmentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: JudgmentRecord) {
        self.records
            .insert((record.config.key(), record.question_id.clone()), record);
    }

    pub fn get(&self, config: &JudgeConfig, question_id: &str) -> Option<&JudgmentRecord> {
        self.records.get(&(config.key(), question_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &JudgmentRecord> {
        self.records.values()
    }
}

impl Extend<JudgmentRecord> for JudgmentStore {
    fn extend<I: IntoIterator<Item = JudgmentRecord>>(&mut self, iter: I) {
        for r in iter {
            self.insert(r);
        }
    }
}

/// QA prompt: instruction, passages in the given order, then the question.
pub fn render_qa_prompt(kind: DatasetKind, question: &Question, evidence: &[Passage]) -> String {
    let intro = match (kind, evidence.is_empty()) {
        (DatasetKind::Fqa, false) => FQA_WITH_EVIDENCE,
        (DatasetKind::Fqa, true) => FQA_CLOSED_BOOK,
        (DatasetKind::Nfqa, false) => NFQA_WITH_EVIDENCE,
        (DatasetKind::Nfqa, true) => NFQA_CLOSED_BOOK,
    };
    let mut sections = vec![intro.to_string()];
    if !evidence.is_empty() {
        let block: Vec<String> = evidence
            .iter()
            .enumerate()
            .map(|(i, p)| format!("Passage-{}: {}", i + 1, one_line(&p.text)))
            .collect();
        sections.push(block.join("\n"));
    }
    sections.push(format!("Question: {}", one_line(&question.text)));
    sections.push("Answer:".into());
    sections.join("\n\n")
}

/// Question and passage texts of a prompt made by [`render_qa_prompt`].
pub fn inspect_qa_prompt(prompt: &str) -> Option<(String, Vec<String>)> {
    let first = prompt.lines().next()?;
    if ![FQA_WITH_EVIDENCE, FQA_CLOSED_BOOK, NFQA_WITH_EVIDENCE, NFQA_CLOSED_BOOK].contains(&first) {
        return None;
    }
    question_and_passages(prompt)
}

/// Evidence passages for one question under `source`.
///
/// Rank-form judgments contribute as many passages as the paired set-form
/// judgment selected for the same question.
pub fn select_evidence(
    source: &EvidenceSource,
    candidates: &CandidateSet,
    ground_truth: &[Passage],
    judgments: &JudgmentStore,
) -> Result<Vec<Passage>> {
    source.validate()?;
    let qid = &candidates.question_id;
    let config = match (source.kind, source.judgment_config) {
        (EvidenceKind::None, _) => return Ok(Vec::new()),
        (EvidenceKind::Dense, _) => return Ok(candidates.passages.clone()),
        (EvidenceKind::GroundTruth, _) => return Ok(ground_truth.to_vec()),
        (_, Some(c)) => c,
        (_, None) => unreachable!("validated"),
    };
    let record = judgments
        .get(&config, qid)
        .ok_or_else(|| Error::Lookup(format!("no {} judgment for question {qid}", config.key())))?;
    let pick = |indices: &[usize]| -> Result<Vec<Passage>> {
        indices
            .iter()
            .map(|&i| {
                candidates.passages.get(i).cloned().ok_or_else(|| {
                    Error::Contract(format!("judgment index {i} outside {} candidates", candidates.len()))
                })
            })
            .collect()
    };
    match &record.result {
        JudgmentResult::SelectedSet(indices) => {
            let mut sorted = indices.clone();
            sorted.sort_unstable();
            pick(&sorted)
        }
        JudgmentResult::Ranking(order) => {
            let paired = config.paired_set_config();
            let set = judgments.get(&paired, qid).ok_or_else(|| {
                Error::Lookup(format!(
                    "no {} judgment for question {qid} to size the {} evidence",
                    paired.key(),
                    config.key()
                ))
            })?;
            let s = set.result.indices().len().min(order.len());
            pick(&order[..s])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_id: String,
    pub dataset_kind: DatasetKind,
    pub source: EvidenceSource,
    pub evidence_ids: Vec<String>,
    pub prompt_hash: String,
    pub answer_text: String,
    pub scores: AnswerScore,
}

/// One temperature-0 call; the answer is stored verbatim and scored.
pub fn generate_answer(
    question: &Question,
    source: EvidenceSource,
    evidence: &[Passage],
    client: &ChatClient,
) -> Result<AnswerRecord> {
    let prompt = render_qa_prompt(question.dataset_kind, question, evidence);
    let response = client.chat(&client.request(prompt.as_str(), QA_TEMPERATURE)?)?;
    let scores = AnswerScore::compute(&response.text, &question.gold_answers)?;
    Ok(AnswerRecord {
        question_id: question.id.clone(),
        dataset_kind: question.dataset_kind,
        source,
        evidence_ids: evidence.iter().map(|p| p.id.clone()).collect(),
        prompt_hash: prompt_hash(&prompt),
        answer_text: response.text,
        scores,
    })
}

/// Means ×100 over factoid questions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FqaScores {
    pub em: f64,
    pub f1: f64,
}

/// Means ×100 over non-factoid questions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NfqaScores {
    pub rouge_l: f64,
    pub bleu: [f64; 4],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fqa_count: usize,
    pub nfqa_count: usize,
    pub fqa: Option<FqaScores>,
    pub nfqa: Option<NfqaScores>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Aggregate scores per dataset kind, in question-id order.
pub fn evaluate_answers(records: &[AnswerRecord], questions: &[Question]) -> Result<EvalReport> {
    let by_id: BTreeMap<&str, &Question> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut sorted: Vec<&AnswerRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.question_id.cmp(&b.question_id));

    let mut report = EvalReport::default();
    let (mut em, mut f1, mut rouge, mut bleu) = (0.0, 0.0, 0.0, [0.0; 4]);
    for r in sorted {
        let q = by_id
            .get(r.question_id.as_str())
            .ok_or_else(|| Error::Lookup(format!("answer for unknown question {}", r.question_id)))?;
        if q.dataset_kind != r.dataset_kind {
            return Err(Error::Contract(format!(
                "answer for {} scored as {} but the question is {}",
                r.question_id,
                r.dataset_kind.label(),
                q.dataset_kind.label()
            )));
        }
        match r.dataset_kind {
            DatasetKind::Fqa => {
                report.fqa_count += 1;
                em += f64::from(r.scores.em);
                f1 += r.scores.token_f1;
            }
            DatasetKind::Nfqa => {
                report.nfqa_count += 1;
                rouge += r.scores.rouge_l;
                for (acc, b) in bleu.iter_mut().zip(r.scores.bleu) {
                    *acc += b;
                }
            }
        }
    }
    if report.fqa_count > 0 {
        let n = report.fqa_count as f64;
        report.fqa = Some(FqaScores {
            em: round2(100.0 * em / n),
            f1: round2(100.0 * f1 / n),
        });
    }
    if report.nfqa_count > 0 {
        let n = report.nfqa_count as f64;
        report.nfqa = Some(NfqaScores {
            rouge_l: round2(100.0 * rouge / n),
            bleu: bleu.map(|b| round2(100.0 * b / n)),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::mock::{OracleModel, ScriptedChat};
    use crate::corpus::Origin;
    use crate::judge::Form;
    use std::sync::Arc;

    fn question(kind: DatasetKind) -> Question {
        Question {
            id: "q1".into(),
            text: "where is the tower".into(),
            gold_answers: vec!["Paris".into()],
            ground_truth_ids: vec!["p0".into()],
            dataset_kind: kind,
            unselected_ids: vec![],
        }
    }

    fn candidates() -> CandidateSet {
        let passages = (0..10)
            .map(|i| {
                let origin = if i == 0 { Origin::GroundTruth } else { Origin::Hrnp };
                Passage::new(format!("p{i}"), format!("text {i}"), origin).unwrap()
            })
            .collect();
        CandidateSet::new("q1", 0, passages)
    }

    fn record(config: JudgeConfig, result: JudgmentResult) -> JudgmentRecord {
        JudgmentRecord {
            question_id: "q1".into(),
            config,
            prompt_hashes: vec![],
            raw_outputs: vec![],
            result,
            call_count: 1,
            reprompts: 0,
            parse_failures: 0,
            warnings: vec![],
            votes: None,
        }
    }

    #[test]
    fn prompt_shapes() {
        let q = question(DatasetKind::Fqa);
        let closed = render_qa_prompt(DatasetKind::Fqa, &q, &[]);
        assert!(closed.contains("Question: where is the tower"));
        assert!(!closed.contains("Passage-"));
        let set = candidates();
        let open = render_qa_prompt(DatasetKind::Nfqa, &q, &set.passages[..3]);
        let p3 = open.find("Passage-3").unwrap();
        assert!(open.find("Passage-1").unwrap() < p3 && p3 < open.find("Question:").unwrap());
        assert_eq!(open, render_qa_prompt(DatasetKind::Nfqa, &q, &set.passages[..3]));
        let (qt, texts) = inspect_qa_prompt(&open).unwrap();
        assert_eq!(qt, "where is the tower");
        assert_eq!(texts, ["text 0", "text 1", "text 2"]);
        assert!(inspect_qa_prompt("Question: x").is_none());
    }

    #[test]
    fn evidence_selection() {
        let set = candidates();
        let gt = vec![set.passages[0].clone(), set.passages[4].clone()];
        let store = JudgmentStore::new();
        assert!(select_evidence(&EvidenceSource::NONE, &set, &gt, &store).unwrap().is_empty());
        assert_eq!(select_evidence(&EvidenceSource::DENSE, &set, &gt, &store).unwrap().len(), 10);
        assert_eq!(select_evidence(&EvidenceSource::GROUND_TRUTH, &set, &gt, &store).unwrap(), gt);

        let rank = JudgeConfig::new(Form::ListwiseRank, Judgment::Utility);
        let source = EvidenceSource::judged(rank);
        assert!(matches!(select_evidence(&source, &set, &gt, &store), Err(Error::Lookup(_))));

        let mut store = JudgmentStore::new();
        store.insert(record(rank, JudgmentResult::Ranking(vec![3, 0, 7, 1, 2, 4, 5, 6, 8, 9])));
        assert!(matches!(select_evidence(&source, &set, &gt, &store), Err(Error::Lookup(_))));
        store.insert(record(rank.paired_set_config(), JudgmentResult::SelectedSet(vec![5, 2])));
        let ev = select_evidence(&source, &set, &gt, &store).unwrap();
        assert_eq!(ev.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(), ["p3", "p0"]);

        let set_source = EvidenceSource::judged(rank.paired_set_config());
        let ev = select_evidence(&set_source, &set, &gt, &store).unwrap();
        assert_eq!(ev.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(), ["p2", "p5"]);
    }

    #[test]
    fn source_validation_and_labels() {
        let bad = EvidenceSource { kind: EvidenceKind::UtilityJudged, judgment_config: None };
        assert!(bad.validate().is_err());
        let c = JudgeConfig::new(Form::ListwiseSet, Judgment::Utility).with_k(5);
        assert_eq!(EvidenceSource::judged(c).label(), "5-sampling");
        assert_eq!(EvidenceSource::GROUND_TRUTH.label(), "Ground-truth");
    }

    #[test]
    fn scripted_and_oracle_answers() {
        let q = question(DatasetKind::Fqa);
        let set = candidates();
        let prompt = render_qa_prompt(DatasetKind::Fqa, &q, &set.passages[..1]);
        let mut scripted = ScriptedChat::strict();
        scripted.insert_prompt(&prompt, "Paris");
        let client = ChatClient::new(Arc::new(scripted), "m");
        let rec = generate_answer(&q, EvidenceSource::GROUND_TRUTH, &set.passages[..1], &client).unwrap();
        assert_eq!(rec.answer_text, "Paris");
        assert_eq!(client.log().len(), 1);

        let mut oracle = OracleModel::new();
        oracle.add_candidates(&q, &set);
        let client = ChatClient::new(Arc::new(oracle), "oracle");
        let with = generate_answer(&q, EvidenceSource::GROUND_TRUTH, &set.passages[..1], &client).unwrap();
        assert_eq!(with.scores.em, 1);
        let without = generate_answer(&q, EvidenceSource::NONE, &[], &client).unwrap();
        assert_eq!(without.answer_text, "unknown");
        assert_eq!(without.scores.em, 0);
        assert!(without.evidence_ids.is_empty());

        let report = evaluate_answers(&[with.clone(), without], std::slice::from_ref(&q)).unwrap();
        assert_eq!(report.fqa_count, 2);
        assert_eq!(report.fqa.unwrap().em, 50.0);
        assert!(report.nfqa.is_none());

        let mut wrong_kind = with;
        wrong_kind.dataset_kind = DatasetKind::Nfqa;
        assert!(matches!(evaluate_answers(&[wrong_kind], &[q]), Err(Error::Contract(_))));
    }

    #[test]
    fn empty_report() {
        let r = evaluate_answers(&[], &[]).unwrap();
        assert_eq!((r.fqa_count, r.nfqa_count), (0, 0));
        assert!(r.fqa.is_none() && r.nfqa.is_none());
    }
}
