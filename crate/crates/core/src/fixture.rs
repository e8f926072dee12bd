//! Synthetic factoid benchmark for demos and tests.
//!
//! Each question asks when or where an event happened, or who led it. Its
//! ground-truth passages state the answer twice; the run holds 100 passages,
//! a few of which mention the answer in passing. Every fourth question has
//! its first ground-truth passage ranked outside the top 10.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::clients::EntityCategory;
use crate::corpus::{DatasetKind, PassageStore, Question, RetrievalRun, RunEntry};
use crate::error::Result;
use crate::pipeline::{write_atomic, RunConfig};

const CITIES: [&str; 20] = [
    "Lisbon", "Oslo", "Nairobi", "Lima", "Hanoi", "Quito", "Dublin", "Cairo", "Perth", "Tbilisi", "Montreal",
    "Seville", "Krakow", "Osaka", "Bergen", "Tunis", "Accra", "Bogota", "Riga", "Manila",
];
const PEOPLE: [&str; 20] = [
    "Ada Moreno", "Bruno Keller", "Chen Wei", "Dara Okafor", "Elif Sahin", "Farid Haddad", "Greta Lind",
    "Hugo Brandt", "Ines Duarte", "Jonas Berg", "Kemal Aydin", "Lena Novak", "Mateo Ruiz", "Nadia Petrova",
    "Omar Rahimi", "Priya Nair", "Quinn Foster", "Rosa Blanco", "Sven Dahl", "Tara Quinlan",
];

/// Ranks (1-based) whose passages mention the answer.
const ANSWER_RANKS: [u32; 3] = [1, 4, 60];
const DEPTH: u32 = 100;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub questions: Vec<Question>,
    /// (id, text) in creation order.
    pub passages: Vec<(String, String)>,
    pub run: RetrievalRun,
    pub gazetteer: BTreeMap<String, EntityCategory>,
}

fn answer_for(i: usize) -> (String, EntityCategory, &'static str) {
    match i % 3 {
        0 => (format!("{}", 1801 + i), EntityCategory::Date, "In which year did"),
        1 => (CITIES[(i / 3) % CITIES.len()].to_string(), EntityCategory::Location, "In which city did"),
        _ => (PEOPLE[(i / 3) % PEOPLE.len()].to_string(), EntityCategory::Person, "Who led"),
    }
}

impl Fixture {
    /// `questions` factoid questions with `gt_per_question` ground-truth
    /// passages each. The seed shuffles the order of background passages.
    pub fn factoid(questions: usize, gt_per_question: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fx = Fixture {
            questions: Vec::with_capacity(questions),
            passages: Vec::new(),
            run: RetrievalRun::default(),
            gazetteer: BTreeMap::new(),
        };
        let mut lists = BTreeMap::new();
        for i in 0..questions {
            let qid = format!("q{i:04}");
            let (answer, category, stem) = answer_for(i);
            fx.gazetteer.insert(answer.clone(), category);
            let text = match category {
                EntityCategory::Person => format!("{stem} expedition {i}"),
                _ => format!("{stem} expedition {i} take place"),
            };

            let gt_ids: Vec<String> = (0..gt_per_question).map(|g| format!("{qid}-gt{g}")).collect();
            for (g, id) in gt_ids.iter().enumerate() {
                let body = match category {
                    EntityCategory::Person => format!(
                        "Expedition {i} was led by {answer}. Accounts from part {g} of the archive credit {answer} with its success."
                    ),
                    _ => format!(
                        "Expedition {i} took place in {answer}. Accounts from part {g} of the archive place the expedition in {answer} as well."
                    ),
                };
                fx.passages.push((id.clone(), body));
            }

            let mut background: Vec<String> = (0..DEPTH as usize).map(|b| format!("{qid}-bg{b:03}")).collect();
            background.shuffle(&mut rng);
            let mut ranked: Vec<String> = Vec::with_capacity(DEPTH as usize);
            let first_gt_rank = if i % 4 == 3 { 30 } else { 2 };
            let mut gt_iter = gt_ids.iter();
            let mut bg_iter = background.iter();
            for rank in 1..=DEPTH {
                let is_gt_slot = rank == first_gt_rank || (rank > first_gt_rank && rank <= first_gt_rank + 3 * (gt_per_question as u32 - 1) && (rank - first_gt_rank) % 3 == 0);
                let id = match (is_gt_slot, gt_iter.clone().next()) {
                    (true, Some(_)) => gt_iter.next().unwrap().clone(),
                    _ => bg_iter.next().unwrap().clone(),
                };
                if id.contains("-bg") {
                    let body = if ANSWER_RANKS.contains(&rank) {
                        format!("A popular summary of expedition {i} mentions {answer} only in passing.")
                    } else {
                        format!("Background note {} on the logistics of expedition {i}, with no mention of its outcome.", &id[id.len() - 3..])
                    };
                    fx.passages.push((id.clone(), body));
                }
                ranked.push(id);
            }
            let entries = ranked
                .into_iter()
                .enumerate()
                .map(|(r, passage_id)| RunEntry {
                    passage_id,
                    rank: r as u32 + 1,
                    score: f64::from(DEPTH - r as u32),
                })
                .collect();
            lists.insert(qid.clone(), entries);
            fx.questions.push(Question {
                id: qid,
                text,
                gold_answers: vec![answer],
                ground_truth_ids: gt_ids,
                dataset_kind: DatasetKind::Fqa,
                unselected_ids: vec![],
            });
        }
        fx.run = RetrievalRun::from_ranked(lists).expect("fixture run is well formed");
        fx
    }

    pub fn store(&self) -> PassageStore {
        self.passages.iter().cloned().collect()
    }

    /// Write the input files into `dir` and return a config pointing at
    /// them, with output under `dir/out`.
    pub fn write(&self, dir: &Path) -> Result<RunConfig> {
        let questions: String = self
            .questions
            .iter()
            .map(|q| {
                json!({"id": q.id, "question": q.text, "answers": q.gold_answers, "ground_truth_ids": q.ground_truth_ids})
                    .to_string()
                    + "\n"
            })
            .collect();
        let passages: String = self
            .passages
            .iter()
            .map(|(id, text)| json!({"id": id, "text": text}).to_string() + "\n")
            .collect();
        write_atomic(&dir.join("questions.jsonl"), &questions)?;
        write_atomic(&dir.join("passages.jsonl"), &passages)?;
        write_atomic(&dir.join("run.trec"), &self.run.to_trec("fixture"))?;
        write_atomic(&dir.join("gazetteer.json"), &serde_json::to_string_pretty(&self.gazetteer)?)?;
        Ok(RunConfig {
            questions: dir.join("questions.jsonl"),
            corpus: dir.join("passages.jsonl"),
            run: dir.join("run.trec"),
            gazetteer: Some(dir.join("gazetteer.json")),
            out: dir.join("out"),
            ..RunConfig::default()
        })
    }
}
