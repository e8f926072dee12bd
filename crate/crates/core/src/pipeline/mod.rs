//! Config-driven runs: build candidate sets, run a judge grid, answer
//! questions over evidence sources, and emit reports.
//!
//! Every command reads its inputs from the paths in [`RunConfig`] and the
//! output directory, and writes JSONL records plus CSV/text tables there.

mod output;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{cell, read_jsonl, write_atomic, write_jsonl, Meta, Table};

use crate::clients::mock::{FnChat, FnNli, GazetteerNer, NoiseModel, NoisyOracle, OracleModel, ScriptedChat};
use crate::clients::{
    prompt_hash, ChatBackend, ChatClient, EntityCategory, EntityRecognizer, HttpChat, HttpChatConfig,
    HttpSidecar, LabelMap, NliModel, NliVerdict,
};
use crate::corpus::{
    load_passages, load_questions, load_run, normalize_text, CandidateSet, Composition, DatasetKind, Origin,
    Passage, PassageStore, Question, RetrievalRun,
};
use crate::error::{Error, Result};
use crate::judge::{run_judge, Form, InputOrder, JudgeConfig, Judgment, JudgmentRecord, JudgmentResult, Requirement};
use crate::metrics::{mrr_at_k, ndcg_at_k, set_metrics};
use crate::qa::{evaluate_answers, generate_answer, select_evidence, AnswerRecord, EvidenceSource, JudgmentStore};
use crate::synth::{build_entity_corpus, build_gti, build_gtu, EntityCorpus, GtiSources, Placement};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CANDIDATES_FILE: &str = "candidates.jsonl";
pub const JUDGMENTS_DIR: &str = "judgments";
pub const ANSWERS_DIR: &str = "answers";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BenchmarkMode {
    /// Ground truth guaranteed in every candidate set.
    #[default]
    Gti,
    /// Retriever top-N, ground truth not guaranteed.
    Gtu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Backend {
    Http,
    #[default]
    MockOracle,
    MockNoisy,
    MockScripted,
}

impl Backend {
    pub fn is_mock(self) -> bool {
        self != Backend::Http
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "http" => Ok(Backend::Http),
            "mock:oracle" => Ok(Backend::MockOracle),
            "mock:noisy" => Ok(Backend::MockNoisy),
            "mock:scripted" => Ok(Backend::MockScripted),
            other => Err(Error::Config(format!(
                "unknown backend {other:?} (expected http, mock:oracle, mock:noisy or mock:scripted)"
            ))),
        }
    }
}

impl TryFrom<String> for Backend {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Http => "http",
            Backend::MockOracle => "mock:oracle",
            Backend::MockNoisy => "mock:noisy",
            Backend::MockScripted => "mock:scripted",
        })
    }
}

impl From<Backend> for String {
    fn from(b: Backend) -> String {
        b.to_string()
    }
}

/// Axes of the judge grid; invalid combinations are skipped on expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub forms: Vec<Form>,
    pub judgments: Vec<Judgment>,
    pub requirements: Vec<Requirement>,
    pub orders: Vec<InputOrder>,
    pub k_samples: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            forms: Form::ALL.to_vec(),
            judgments: vec![Judgment::Utility],
            requirements: vec![Requirement::None],
            orders: vec![InputOrder::QuestionFirst],
            k_samples: vec![1],
        }
    }
}

impl GridSpec {
    /// Valid configs, plus the set-form partner of every rank-form config,
    /// sorted by key.
    pub fn expand(&self, seed: u64) -> Vec<JudgeConfig> {
        let mut out: BTreeMap<String, JudgeConfig> = BTreeMap::new();
        for &form in &self.forms {
            for &judgment in &self.judgments {
                for &requirement in &self.requirements {
                    for &order in &self.orders {
                        for &k in &self.k_samples {
                            let c = JudgeConfig {
                                form,
                                judgment,
                                requirement,
                                order,
                                k_samples: k,
                                seed,
                            };
                            if c.validate().is_err() {
                                continue;
                            }
                            if form.is_rank() {
                                let p = c.paired_set_config();
                                out.insert(p.key(), p);
                            }
                            out.insert(c.key(), c);
                        }
                    }
                }
            }
        }
        out.into_values().collect()
    }
}

/// Evidence sources for the QA step; `Judged` stands for every grid config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EvidenceChoice {
    None,
    Dense,
    GroundTruth,
    Judged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub questions: PathBuf,
    pub dataset_kind: DatasetKind,
    pub corpus: PathBuf,
    pub run: PathBuf,
    /// Output directory; not part of the config hash.
    pub out: PathBuf,
    pub mode: BenchmarkMode,
    pub n: usize,
    /// Fixed 0-based ground-truth position for GTI sets; shuffled when unset.
    pub ground_truth_position: Option<usize>,
    pub grid: GridSpec,
    pub evidence: Vec<EvidenceChoice>,
    pub backend: Backend,
    pub model: String,
    pub seed: u64,
    pub parallelism: usize,
    /// Responses keyed by prompt hash, for `mock:scripted`.
    pub scripts: Option<PathBuf>,
    /// `{surface: category}` entity list used as the recognizer under mocks.
    pub gazetteer: Option<PathBuf>,
    /// Base URL of an NER/NLI service (`/ner`, `/nli`).
    pub sidecar_url: Option<String>,
    pub http: HttpChatConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            questions: PathBuf::from("questions.jsonl"),
            dataset_kind: DatasetKind::Fqa,
            corpus: PathBuf::from("passages.jsonl"),
            run: PathBuf::from("run.trec"),
            out: PathBuf::from("out"),
            mode: BenchmarkMode::Gti,
            n: crate::synth::DEFAULT_N,
            ground_truth_position: None,
            grid: GridSpec::default(),
            evidence: vec![
                EvidenceChoice::None,
                EvidenceChoice::Dense,
                EvidenceChoice::GroundTruth,
                EvidenceChoice::Judged,
            ],
            backend: Backend::MockOracle,
            model: "gpt-3.5-turbo".into(),
            seed: 0,
            parallelism: 4,
            scripts: None,
            gazetteer: None,
            sidecar_url: None,
            http: HttpChatConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub backend: Option<Backend>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parse TOML; relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {}", e.message())))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut config.questions);
        resolve(&mut config.corpus);
        resolve(&mut config.run);
        resolve(&mut config.out);
        for p in [&mut config.scripts, &mut config.gazetteer].into_iter().flatten() {
            resolve(p);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(backend) = o.backend {
            self.backend = backend;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be positive".into()));
        }
        if self.backend == Backend::MockScripted && self.scripts.is_none() {
            return Err(Error::Config("mock:scripted needs a scripts file".into()));
        }
        if let Some(p) = self.ground_truth_position {
            if p >= self.n {
                return Err(Error::Config(format!("ground-truth position {p} outside {} slots", self.n)));
            }
        }
        Ok(())
    }

    /// Hash of everything except the output directory.
    pub fn config_hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.out = PathBuf::new();
        prompt_hash(&serde_json::to_string(&hashed).expect("config serializes"))
    }

    pub fn meta(&self) -> Meta {
        Meta {
            seed: self.seed,
            config_hash: self.config_hash(),
            version: VERSION.to_string(),
        }
    }

    pub fn judge_grid(&self) -> Vec<JudgeConfig> {
        self.grid.expand(self.seed)
    }

    pub fn evidence_sources(&self) -> Vec<EvidenceSource> {
        let mut out = Vec::new();
        for choice in BTreeSet::from_iter(self.evidence.iter().copied()) {
            match choice {
                EvidenceChoice::None => out.push(EvidenceSource::NONE),
                EvidenceChoice::Dense => out.push(EvidenceSource::DENSE),
                EvidenceChoice::GroundTruth => out.push(EvidenceSource::GROUND_TRUTH),
                EvidenceChoice::Judged => out.extend(self.judge_grid().into_iter().map(EvidenceSource::judged)),
            }
        }
        out
    }
}

/// Loaded inputs shared by the commands.
pub struct Inputs {
    pub questions: Vec<Question>,
    pub store: PassageStore,
    pub run: RetrievalRun,
}

impl Inputs {
    pub fn load(config: &RunConfig) -> Result<Self> {
        let questions = load_questions(&config.questions, config.dataset_kind)?;
        let store = load_passages(&config.corpus)?;
        let run = load_run(&config.run)?;
        Ok(Inputs { questions, store, run })
    }

    pub fn ground_truth(&self, question: &Question) -> Vec<Passage> {
        question
            .ground_truth_ids
            .iter()
            .filter_map(|id| self.store.passage(id, Origin::GroundTruth))
            .collect()
    }
}

fn load_scripts(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Chat client for the configured backend. Mock oracles learn each
/// question's ground-truth texts from the inputs and the candidate sets.
pub fn chat_client(config: &RunConfig, inputs: &Inputs, sets: &[CandidateSet]) -> Result<ChatClient> {
    let backend: Arc<dyn ChatBackend> = match config.backend {
        Backend::Http => Arc::new(HttpChat::new(&config.http)?),
        Backend::MockScripted => {
            let path = config
                .scripts
                .as_ref()
                .ok_or_else(|| Error::Config("mock:scripted needs a scripts file".into()))?;
            Arc::new(ScriptedChat::from_map(load_scripts(path)?))
        }
        Backend::MockOracle | Backend::MockNoisy => {
            let by_id: HashMap<&str, &CandidateSet> = sets.iter().map(|s| (s.question_id.as_str(), s)).collect();
            let mut oracle = OracleModel::new();
            for q in &inputs.questions {
                let gt = inputs.ground_truth(q);
                oracle.add_question(q, gt.iter().map(|p| p.text.as_str()));
                if let Some(set) = by_id.get(q.id.as_str()) {
                    oracle.add_candidates(q, set);
                }
            }
            if config.backend == Backend::MockNoisy {
                Arc::new(NoisyOracle::new(oracle, NoiseModel::default(), config.seed))
            } else {
                Arc::new(oracle)
            }
        }
    };
    Ok(ChatClient::new(backend, config.model.clone()).with_parallelism(config.parallelism))
}

fn load_gazetteer(path: &Path) -> Result<GazetteerNer> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: BTreeMap<String, EntityCategory> = serde_json::from_str(&text)?;
    Ok(GazetteerNer::new(entries))
}

fn recognizer(config: &RunConfig) -> Result<Box<dyn EntityRecognizer>> {
    if let Some(url) = &config.sidecar_url {
        return Ok(Box::new(HttpSidecar::new(url.clone(), LabelMap::default())?));
    }
    match &config.gazetteer {
        Some(path) => Ok(Box::new(load_gazetteer(path)?)),
        None => Err(Error::Config("entity typing needs a gazetteer or a sidecar_url".into())),
    }
}

/// Mock NLI: entailment when the hypothesis is contained in the premise,
/// contradiction otherwise.
fn containment_nli() -> impl NliModel {
    FnNli(|premise: &str, hypothesis: &str| {
        Ok(if normalize_text(premise).contains(&normalize_text(hypothesis)) {
            NliVerdict::entailment()
        } else {
            NliVerdict::contradiction()
        })
    })
}

/// Mock fabricator: the evidence is the claim itself.
fn echo_fabricator() -> ChatClient {
    let chat = FnChat(|req: &crate::clients::ChatRequest| {
        let msg = &req.user_message;
        let start = msg
            .find("Claim: ")
            .ok_or_else(|| Error::NoScript("not a fabrication prompt".into()))?;
        let claim = msg[start + 7..].trim_end().trim_end_matches("Evidence:").trim();
        Ok(format!("{claim}."))
    });
    ChatClient::new(Arc::new(chat), "echo")
}

/// Outcome of a command: what it produced and which questions failed.
#[derive(Debug, Default)]
pub struct Outcome<T> {
    pub value: T,
    pub table: Table,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl<T> Outcome<T> {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Mean origin counts over the sets, shaped like a composition table row.
pub fn composition_table(config: &RunConfig, sets: &[CandidateSet]) -> Table {
    let mut table = Table::new(
        format!("Candidate composition ({:?}, {})", config.mode, config.dataset_kind.label()),
        &["dataset", "#queries", "GT", "CP", "HRNP", "WRNP", "Retrieved"],
    );
    let total = sets.iter().fold(Composition::default(), |mut acc, s| {
        for o in Origin::ALL {
            let v = s.composition.get(o);
            match o {
                Origin::GroundTruth => acc.ground_truth += v,
                Origin::Counterfactual => acc.counterfactual += v,
                Origin::Hrnp => acc.hrnp += v,
                Origin::Wrnp => acc.wrnp += v,
                Origin::Retrieved => acc.retrieved += v,
            }
        }
        acc
    });
    let n = sets.len();
    let mean = |v: usize| if n == 0 { None } else { Some(v as f64 / n as f64) };
    let mut row = vec![config.dataset_kind.label().to_string(), n.to_string()];
    row.extend(Origin::ALL.iter().map(|&o| cell(mean(total.get(o)))));
    table.push(row);
    table
}

type Built = (CandidateSet, Vec<String>);

/// Build one candidate set per question and write `candidates.jsonl` and
/// the composition table.
pub fn cmd_build(config: &RunConfig) -> Result<Outcome<Vec<CandidateSet>>> {
    config.validate()?;
    let inputs = Inputs::load(config)?;
    let meta = config.meta();
    let placement = config
        .ground_truth_position
        .map_or(Placement::Shuffled, Placement::GroundTruthAt);

    let results: Vec<(String, Result<Built>)> = match config.mode {
        BenchmarkMode::Gtu => inputs
            .questions
            .iter()
            .map(|q| (q.id.clone(), build_gtu(&inputs.run, &inputs.store, q, config.n).map(|s| (s, vec![]))))
            .collect(),
        BenchmarkMode::Gti => {
            if let Some(q) = inputs.questions.iter().find(|q| q.ground_truth_ids.is_empty()) {
                return Err(Error::Config(format!("GTI mode needs ground-truth ids; {} has none", q.id)));
            }
            let ner = recognizer(config)?;
            let entities: EntityCorpus = build_entity_corpus(&inputs.questions, ner.as_ref())?.corpus;
            let nli: Box<dyn NliModel>;
            let fabricator: ChatClient;
            let generator = match config.dataset_kind {
                DatasetKind::Fqa => None,
                DatasetKind::Nfqa => {
                    nli = match (&config.sidecar_url, config.backend.is_mock()) {
                        (Some(url), _) => Box::new(HttpSidecar::new(url.clone(), LabelMap::default())?),
                        (None, true) => Box::new(containment_nli()),
                        (None, false) => {
                            return Err(Error::Config("non-factoid GTI needs a sidecar_url for NLI".into()))
                        }
                    };
                    fabricator = if config.backend.is_mock() {
                        echo_fabricator()
                    } else {
                        chat_client(config, &inputs, &[])?
                    };
                    Some((&fabricator, nli.as_ref()))
                }
            };
            let sources = GtiSources {
                run: &inputs.run,
                store: &inputs.store,
                entities: &entities,
                generator,
            };
            inputs
                .questions
                .par_iter()
                .map(|q| (q.id.clone(), build_gti(q, &sources, config.n, config.seed, placement)))
                .collect()
        }
    };

    let mut outcome = Outcome::<Vec<CandidateSet>>::default();
    for (qid, result) in results {
        match result {
            Ok((set, warnings)) => {
                outcome.warnings.extend(warnings);
                outcome.value.push(set);
            }
            Err(e) => outcome.errors.push(format!("{qid}: {e}")),
        }
    }
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    write_jsonl(&config.out.join(CANDIDATES_FILE), &meta, &outcome.value)?;
    outcome.table = composition_table(config, &outcome.value);
    outcome.table.write(&config.out, "composition", &meta)?;
    write_atomic(
        &config.out.join("build_errors.txt"),
        &format!("{}\n{}", meta.comment(), lines(&outcome.errors)),
    )?;
    Ok(outcome)
}

fn lines(items: &[String]) -> String {
    items.iter().map(|s| format!("{s}\n")).collect()
}

pub fn load_candidates(config: &RunConfig) -> Result<Vec<CandidateSet>> {
    read_jsonl(&config.out.join(CANDIDATES_FILE))
}

fn judgment_path(config: &RunConfig, judge: &JudgeConfig) -> PathBuf {
    config.out.join(JUDGMENTS_DIR).join(format!("{}.jsonl", judge.key()))
}

/// Judgment-quality row for one config.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JudgeMetrics {
    pub config: String,
    pub questions: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub ndcg_at_1: Option<f64>,
    pub ndcg_at_5: Option<f64>,
    pub mrr_at_5: Option<f64>,
    pub calls: usize,
    pub reprompts: usize,
    pub parse_failures: usize,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Means ×100 over questions whose candidate set holds ground truth. Rank
/// forms are also scored as sets, cut to their paired set-form size.
pub fn judge_metrics(
    judge: &JudgeConfig,
    store: &JudgmentStore,
    questions: &[Question],
    sets: &[CandidateSet],
) -> Result<JudgeMetrics> {
    let by_id: HashMap<&str, &Question> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut m = JudgeMetrics {
        config: judge.key(),
        ..Default::default()
    };
    let (mut p, mut r, mut f, mut n1, mut n5, mut mrr) = (vec![], vec![], vec![], vec![], vec![], vec![]);
    for set in sets {
        let Some(record) = store.get(judge, &set.question_id) else { continue };
        let q = by_id
            .get(set.question_id.as_str())
            .ok_or_else(|| Error::Lookup(format!("candidates for unknown question {}", set.question_id)))?;
        m.calls += record.call_count;
        m.reprompts += record.reprompts;
        m.parse_failures += record.parse_failures;
        let truth: HashSet<usize> = set.truth_indices(q).into_iter().collect();
        if truth.is_empty() {
            continue;
        }
        m.questions += 1;
        let selected: Option<HashSet<usize>> = match &record.result {
            JudgmentResult::SelectedSet(s) => Some(s.iter().copied().collect()),
            JudgmentResult::Ranking(order) => {
                n1.push(ndcg_at_k(order, &truth, 1)?);
                n5.push(ndcg_at_k(order, &truth, 5)?);
                mrr.push(mrr_at_k(order, &truth, 5)?);
                store
                    .get(&judge.paired_set_config(), &set.question_id)
                    .map(|paired| order.iter().take(paired.result.indices().len()).copied().collect())
            }
        };
        if let Some(selected) = selected {
            let s = set_metrics(&selected, &truth)?;
            p.push(s.precision);
            r.push(s.recall);
            f.push(s.f1);
        }
    }
    let pct = |v: &[f64]| mean(v).map(|x| 100.0 * x);
    m.precision = pct(&p);
    m.recall = pct(&r);
    m.f1 = pct(&f);
    m.ndcg_at_1 = pct(&n1);
    m.ndcg_at_5 = pct(&n5);
    m.mrr_at_5 = pct(&mrr);
    Ok(m)
}

pub fn judge_table(rows: &[JudgeMetrics]) -> Table {
    let mut table = Table::new(
        "Judgment quality",
        &["config", "#q", "P", "R", "F1", "NDCG@1", "NDCG@5", "MRR@5", "calls", "reprompts", "parse_fail"],
    );
    for m in rows {
        table.push(vec![
            m.config.clone(),
            m.questions.to_string(),
            cell(m.precision),
            cell(m.recall),
            cell(m.f1),
            cell(m.ndcg_at_1),
            cell(m.ndcg_at_5),
            cell(m.mrr_at_5),
            m.calls.to_string(),
            m.reprompts.to_string(),
            m.parse_failures.to_string(),
        ]);
    }
    table
}

/// Run every grid config over the candidate sets.
pub fn cmd_judge(config: &RunConfig) -> Result<Outcome<JudgmentStore>> {
    config.validate()?;
    let inputs = Inputs::load(config)?;
    let sets = load_candidates(config)?;
    let client = chat_client(config, &inputs, &sets)?;
    let grid = config.judge_grid();
    let meta = config.meta();
    let mut outcome = Outcome::<JudgmentStore>::default();
    if grid.is_empty() {
        log::warn!("judge grid is empty; nothing to do");
        outcome.warnings.push("empty judge grid".into());
    }
    let by_id: HashMap<&str, &Question> = inputs.questions.iter().map(|q| (q.id.as_str(), q)).collect();

    for judge in &grid {
        if let Some(flag) = judge.flag() {
            outcome.warnings.push(format!("{}: {flag}", judge.key()));
        }
        let results: Vec<(String, Result<JudgmentRecord>)> = sets
            .par_iter()
            .map(|set| {
                let result = by_id
                    .get(set.question_id.as_str())
                    .ok_or_else(|| Error::Lookup(format!("candidates for unknown question {}", set.question_id)))
                    .and_then(|q| run_judge(q, set, &client, judge));
                (set.question_id.clone(), result)
            })
            .collect();
        let mut records = Vec::new();
        for (qid, r) in results {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => outcome.errors.push(format!("{} {qid}: {e}", judge.key())),
            }
        }
        write_jsonl(&judgment_path(config, judge), &meta, &records)?;
        outcome.value.extend(records);
    }

    let rows = grid
        .iter()
        .map(|j| judge_metrics(j, &outcome.value, &inputs.questions, &sets))
        .collect::<Result<Vec<_>>>()?;
    outcome.table = judge_table(&rows);
    outcome.table.write(&config.out, "judge_metrics", &meta)?;
    write_atomic(
        &config.out.join("judge_requests.jsonl"),
        &format!("{}\n{}", meta.jsonl_header(), client.log().to_jsonl()),
    )?;
    Ok(outcome)
}

pub fn load_judgments(config: &RunConfig) -> Result<JudgmentStore> {
    let mut store = JudgmentStore::new();
    for judge in config.judge_grid() {
        let path = judgment_path(config, &judge);
        if path.exists() {
            store.extend(read_jsonl::<JudgmentRecord>(&path)?);
        }
    }
    Ok(store)
}

fn source_slug(source: &EvidenceSource) -> String {
    match source.judgment_config {
        Some(c) => c.key(),
        None => source.label().to_lowercase(),
    }
}

fn answers_path(config: &RunConfig, source: &EvidenceSource) -> PathBuf {
    config.out.join(ANSWERS_DIR).join(format!("{}.jsonl", source_slug(source)))
}

/// Answer-quality table: one row per evidence source.
pub fn qa_table(rows: &[(EvidenceSource, crate::qa::EvalReport)]) -> Table {
    let mut table = Table::new(
        "Answer quality by evidence source",
        &["source", "FQA #q", "EM", "F1", "NFQA #q", "ROUGE-L", "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4"],
    );
    for (source, r) in rows {
        let f = r.fqa;
        let nf = r.nfqa;
        table.push(vec![
            source.label(),
            r.fqa_count.to_string(),
            cell(f.map(|s| s.em)),
            cell(f.map(|s| s.f1)),
            r.nfqa_count.to_string(),
            cell(nf.map(|s| s.rouge_l)),
            cell(nf.map(|s| s.bleu[0])),
            cell(nf.map(|s| s.bleu[1])),
            cell(nf.map(|s| s.bleu[2])),
            cell(nf.map(|s| s.bleu[3])),
        ]);
    }
    table
}

/// Answers produced from one evidence source.
pub type SourceAnswers = (EvidenceSource, Vec<AnswerRecord>);

/// Answer every question once per evidence source.
pub fn cmd_qa(config: &RunConfig) -> Result<Outcome<Vec<SourceAnswers>>> {
    config.validate()?;
    let inputs = Inputs::load(config)?;
    let sets = load_candidates(config)?;
    let judgments = load_judgments(config)?;
    let client = chat_client(config, &inputs, &sets)?;
    let meta = config.meta();
    let by_id: HashMap<&str, &Question> = inputs.questions.iter().map(|q| (q.id.as_str(), q)).collect();

    let mut outcome = Outcome::<Vec<(EvidenceSource, Vec<AnswerRecord>)>>::default();
    let mut rows = Vec::new();
    for source in config.evidence_sources() {
        let results: Vec<(String, Result<AnswerRecord>)> = sets
            .par_iter()
            .map(|set| {
                let result = by_id
                    .get(set.question_id.as_str())
                    .ok_or_else(|| Error::Lookup(format!("candidates for unknown question {}", set.question_id)))
                    .and_then(|q| {
                        let evidence = select_evidence(&source, set, &inputs.ground_truth(q), &judgments)?;
                        generate_answer(q, source, &evidence, &client)
                    });
                (set.question_id.clone(), result)
            })
            .collect();
        let mut records = Vec::new();
        for (qid, r) in results {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => outcome.errors.push(format!("{} {qid}: {e}", source.label())),
            }
        }
        write_jsonl(&answers_path(config, &source), &meta, &records)?;
        rows.push((source, evaluate_answers(&records, &inputs.questions)?));
        outcome.value.push((source, records));
    }
    outcome.table = qa_table(&rows);
    outcome.table.write(&config.out, "qa_report", &meta)?;
    write_atomic(
        &config.out.join("qa_requests.jsonl"),
        &format!("{}\n{}", meta.jsonl_header(), client.log().to_jsonl()),
    )?;
    Ok(outcome)
}

/// Rebuild every table from the files in the output directory and write
/// them together to `report.txt`.
pub fn cmd_report(config: &RunConfig) -> Result<String> {
    let questions = load_questions(&config.questions, config.dataset_kind)?;
    let sets = load_candidates(config)?;
    let meta = config.meta();
    let mut sections = vec![meta.comment(), composition_table(config, &sets).to_text()];

    let judgments = load_judgments(config)?;
    if !judgments.is_empty() {
        let rows = config
            .judge_grid()
            .iter()
            .map(|j| judge_metrics(j, &judgments, &questions, &sets))
            .collect::<Result<Vec<_>>>()?;
        sections.push(judge_table(&rows).to_text());
    }

    let mut qa_rows = Vec::new();
    for source in config.evidence_sources() {
        let path = answers_path(config, &source);
        if path.exists() {
            let records: Vec<AnswerRecord> = read_jsonl(&path)?;
            qa_rows.push((source, evaluate_answers(&records, &questions)?));
        }
    }
    if !qa_rows.is_empty() {
        sections.push(qa_table(&qa_rows).to_text());
    }
    let report = sections.join("\n");
    write_atomic(&config.out.join("report.txt"), &report)?;
    Ok(report)
}
