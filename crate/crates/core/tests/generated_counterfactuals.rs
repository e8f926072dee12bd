use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde_json::json;
use utiljudge::clients::mock::{FnChat, FnNli};
use utiljudge::clients::{ChatClient, ChatRequest, EntityCategory, NliVerdict};
use utiljudge::corpus::{DatasetKind, Origin, Passage, Question};
use utiljudge::pipeline::{cmd_build, write_atomic, RunConfig};
use utiljudge::synth::{
    fabrication_prompt, make_counterfactuals_generated, EntityCorpus, FABRICATION_TEMPERATURE, SUPPORT_RETRY_CAP,
};

const ANSWER: &str = "Caffeine blocks adenosine receptors in Lisbon labs since 1995.";

fn corpus() -> EntityCorpus {
    let mut c = EntityCorpus::new();
    for y in ["1995", "2001", "1987", "2010", "1979", "2015"] {
        c.insert(EntityCategory::Date, y);
    }
    for city in ["Lisbon", "Oslo", "Lima"] {
        c.insert(EntityCategory::Location, city);
    }
    c
}

fn question() -> Question {
    Question {
        id: "nf1".into(),
        text: "How does caffeine keep people awake".into(),
        gold_answers: vec![ANSWER.into()],
        ground_truth_ids: vec!["e1".into()],
        dataset_kind: DatasetKind::Nfqa,
        unselected_ids: vec![],
    }
}

fn claim_of(req: &ChatRequest) -> String {
    req.user_message.split("Claim: ").nth(1).unwrap().trim_end_matches("Evidence:").trim().to_string()
}

#[test]
fn claims_pass_both_gates_with_counted_retries() {
    let chat = ChatClient::new(
        Arc::new(FnChat(|req: &ChatRequest| Ok(format!("Studies agree. {}", claim_of(req))))),
        "fabricator",
    );
    // Claims mentioning Oslo are not contradictions; evidence for claims
    // mentioning 2001 needs two retries; claims with Lima are never supported.
    let support_calls: Mutex<HashMap<String, u32>> = Mutex::new(HashMap::new());
    let nli = FnNli(|premise: &str, hypothesis: &str| {
        if premise == ANSWER {
            return Ok(if hypothesis.contains("Oslo") { NliVerdict::neutral() } else { NliVerdict::contradiction() });
        }
        let mut calls = support_calls.lock().unwrap();
        let n = calls.entry(hypothesis.to_string()).or_insert(0);
        *n += 1;
        let ok = if hypothesis.contains("Lima") {
            false
        } else if hypothesis.contains("2001") {
            *n >= 3
        } else {
            true
        };
        Ok(if ok { NliVerdict::entailment() } else { NliVerdict::neutral() })
    });
    let evidence = Passage::new("e1", "Caffeine is an adenosine antagonist.", Origin::GroundTruth).unwrap();
    let batch = make_counterfactuals_generated(&question(), &evidence, ANSWER, &corpus(), &chat, &nli, 17).unwrap();

    assert!(!batch.claims.is_empty());
    for c in &batch.claims {
        assert_ne!(c.claim, ANSWER);
        if c.claim.contains("Oslo") {
            assert!(!c.contradicts_answer);
            assert_eq!(c.attempts, 0);
        } else if c.claim.contains("Lima") {
            assert!(!c.supported);
            assert_eq!(c.attempts, SUPPORT_RETRY_CAP + 1);
        } else if c.claim.contains("2001") {
            assert!(c.supported);
            assert_eq!(c.retries(), 2);
        } else {
            assert!(c.supported);
            assert_eq!(c.retries(), 0);
        }
    }
    let supported = batch.claims.iter().filter(|c| c.supported).count();
    assert_eq!(batch.passages.len(), supported);
    for p in &batch.passages {
        assert_eq!(p.origin, Origin::Counterfactual);
        let prov = &p.provenance;
        assert_eq!(prov.source_passage_id.as_deref(), Some("e1"));
        let claim = prov.claim.as_ref().unwrap();
        assert!(p.text.contains(claim.as_str()));
        assert_eq!(prov.generation_prompt_hash.as_deref(), Some(utiljudge::clients::prompt_hash(&fabrication_prompt(claim)).as_str()));
    }

    let calls = chat.log().entries();
    let attempts: u32 = batch.claims.iter().map(|c| c.attempts).sum();
    assert_eq!(calls.len() as u32, attempts);
    assert!(calls.iter().all(|e| e.temperature == FABRICATION_TEMPERATURE));
}

#[test]
fn fabrication_prompt_wording() {
    assert_eq!(
        fabrication_prompt("The sky is green."),
        "Given a claim, please write a short piece of evidence to support it. The maximum length of the generated evidence is 100 words. You can fabricate content, but it should be as realistic as possible. Claim: The sky is green. Evidence:"
    );
}

#[test]
fn long_evidence_is_truncated() {
    let long = (0..150).map(|i| if i % 10 == 9 { format!("w{i}.") } else { format!("w{i}") }).collect::<Vec<_>>().join(" ");
    let chat = ChatClient::new(Arc::new(FnChat(move |_: &ChatRequest| Ok(long.clone()))), "f");
    let nli = FnNli(|premise: &str, _: &str| {
        Ok(if premise == ANSWER { NliVerdict::contradiction() } else { NliVerdict::entailment() })
    });
    let evidence = Passage::new("e1", "text", Origin::GroundTruth).unwrap();
    let batch = make_counterfactuals_generated(&question(), &evidence, ANSWER, &corpus(), &chat, &nli, 1).unwrap();
    assert!(!batch.passages.is_empty());
    for p in &batch.passages {
        assert_eq!(p.text.split_whitespace().count(), 100);
        assert!(p.text.ends_with("w99."));
    }
}

#[test]
fn answers_without_entities_give_no_claims() {
    let chat = ChatClient::new(Arc::new(FnChat(|_: &ChatRequest| Ok("x".to_string()))), "f");
    let nli = FnNli(|_: &str, _: &str| Ok(NliVerdict::contradiction()));
    let evidence = Passage::new("e1", "text", Origin::GroundTruth).unwrap();
    let batch =
        make_counterfactuals_generated(&question(), &evidence, "It just does.", &corpus(), &chat, &nli, 1).unwrap();
    assert!(batch.passages.is_empty());
    assert!(chat.log().is_empty());
    assert!(!batch.warnings.is_empty());
}

#[test]
fn non_factoid_build_under_mocks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut questions = String::new();
    let mut passages = String::new();
    let mut run = String::new();
    let cities = ["Lisbon", "Oslo", "Lima", "Quito"];
    for (i, city) in cities.iter().enumerate() {
        let qid = format!("n{i}");
        let answer = format!("The survey ran in {city} during {}.", 1990 + i);
        questions.push_str(&json!({"id": qid, "question": format!("Describe survey {i}"), "answers": [answer], "ground_truth_ids": [format!("{qid}-gt")]}).to_string());
        questions.push('\n');
        passages.push_str(&json!({"id": format!("{qid}-gt"), "text": format!("Survey {i} took place in {city} in {}.", 1990 + i)}).to_string());
        passages.push('\n');
        run.push_str(&format!("{qid} Q0 {qid}-gt 1 100 r\n"));
        for r in 2..=30 {
            passages.push_str(&json!({"id": format!("{qid}-b{r}"), "text": format!("Unrelated note {r} about survey {i}.")}).to_string());
            passages.push('\n');
            run.push_str(&format!("{qid} Q0 {qid}-b{r} {r} {} r\n", 100 - r));
        }
    }
    let gazetteer: HashMap<String, EntityCategory> = cities
        .iter()
        .map(|c| (c.to_string(), EntityCategory::Location))
        .chain((1990..1994).map(|y| (format!("The survey ran in x during {y}."), EntityCategory::Other)))
        .collect();
    write_atomic(&d.join("q.jsonl"), &questions).unwrap();
    write_atomic(&d.join("p.jsonl"), &passages).unwrap();
    write_atomic(&d.join("r.trec"), &run).unwrap();
    write_atomic(&d.join("g.json"), &serde_json::to_string(&gazetteer).unwrap()).unwrap();
    let config = RunConfig::from_toml(
        "questions = \"q.jsonl\"\ncorpus = \"p.jsonl\"\nrun = \"r.trec\"\ngazetteer = \"g.json\"\ndataset_kind = \"NFQA\"\n",
        d,
    )
    .unwrap();
    let out = cmd_build(&config).unwrap();
    assert!(out.is_clean(), "{:?}", out.errors);
    assert_eq!(out.value.len(), 4);
    for set in &out.value {
        assert_eq!(set.composition.ground_truth, 1);
        assert_eq!(set.passages.len(), 10);
        assert!(set.composition.counterfactual >= 3);
    }
}
