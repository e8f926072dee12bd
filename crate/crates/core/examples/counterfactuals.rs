//! Counterfactual passages: entity substitution for short answers and the
//! claim/fabricate/support-check pipeline for sentence answers.

use std::sync::Arc;

use utiljudge::clients::mock::{FnChat, FnNli};
use utiljudge::clients::{ChatClient, EntityCategory, NliVerdict};
use utiljudge::corpus::{DatasetKind, Origin, Passage, Question};
use utiljudge::synth::{
    make_counterfactuals_generated, make_counterfactuals_substitution, substitute_entities, EntityCorpus,
    SubstitutionMode,
};

pub fn run_example() -> utiljudge::Result<()> {
    let mut corpus = EntityCorpus::new();
    for year in ["1969", "1971", "1983", "1990", "2004", "2011"] {
        corpus.insert(EntityCategory::Date, year);
    }
    for city in ["Houston", "Geneva", "Kyoto"] {
        corpus.insert(EntityCategory::Location, city);
    }

    let question = Question {
        id: "moon".into(),
        text: "When did the first crewed moon landing happen".into(),
        gold_answers: vec!["1969".into()],
        ground_truth_ids: vec!["p1".into()],
        dataset_kind: DatasetKind::Fqa,
        unselected_ids: vec![],
    };
    let evidence = Passage::new(
        "p1",
        "The first crewed landing on the Moon took place in 1969. By the end of 1969 two crews had landed.",
        Origin::GroundTruth,
    )?;

    let (one, spec) = substitute_entities(&evidence, "1969", &corpus, SubstitutionMode::CorpusSubstitution, 5)?;
    println!("single substitution ({} -> {}):\n  {}\n", spec.original_answer, spec.counter_answer, one.text);

    let batch = make_counterfactuals_substitution(&question, &evidence, &corpus, 9)?;
    println!("{} counterfactuals:", batch.passages.len());
    for p in &batch.passages {
        println!("  [{}] {}", p.id, p.text);
    }
    for w in &batch.warnings {
        println!("  note: {w}");
    }

    // Sentence answers: the mock LLM restates the claim as evidence; the mock
    // NLI entails when the hypothesis is quoted in the premise.
    let answer = "The landing happened in 1969 near the Sea of Tranquility.";
    let fabricate = FnChat(|req: &utiljudge::clients::ChatRequest| {
        let claim = req.user_message.split("Claim: ").nth(1).unwrap_or("").trim_end_matches("Evidence:").trim();
        Ok(format!("Archived reports confirm it: {claim}"))
    });
    let chat = ChatClient::new(Arc::new(fabricate), "mock");
    let nli = FnNli(|premise: &str, hypothesis: &str| {
        Ok(if premise.contains(hypothesis) { NliVerdict::entailment() } else { NliVerdict::contradiction() })
    });
    let nfqa = Question { dataset_kind: DatasetKind::Nfqa, gold_answers: vec![answer.into()], ..question };
    let generated = make_counterfactuals_generated(&nfqa, &evidence, answer, &corpus, &chat, &nli, 3)?;
    println!("\ngenerated claims:");
    for c in &generated.claims {
        println!("  contradicts={} supported={} {:?}", c.contradicts_answer, c.supported, c.claim);
    }
    for p in &generated.passages {
        println!("  [{}] {}", p.id, p.text);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
