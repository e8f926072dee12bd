//! Answer questions over different evidence sources and compare EM.

use std::sync::Arc;

use utiljudge::clients::mock::{oracle_for, GazetteerNer};
use utiljudge::clients::ChatClient;
use utiljudge::corpus::Origin;
use utiljudge::fixture::Fixture;
use utiljudge::judge::{run_judge, Form, JudgeConfig, Judgment};
use utiljudge::qa::{evaluate_answers, generate_answer, select_evidence, EvidenceSource, JudgmentStore};
use utiljudge::synth::{build_entity_corpus, build_gti, GtiSources, Placement};

pub fn run_example() -> utiljudge::Result<()> {
    let fx = Fixture::factoid(6, 1, 2);
    let store = fx.store();
    let entities = build_entity_corpus(&fx.questions, &GazetteerNer::new(fx.gazetteer.clone()))?.corpus;
    let sources = GtiSources { run: &fx.run, store: &store, entities: &entities, generator: None };
    let sets = fx
        .questions
        .iter()
        .map(|q| build_gti(q, &sources, 10, 2, Placement::Shuffled).map(|(s, _)| s))
        .collect::<utiljudge::Result<Vec<_>>>()?;
    let client = ChatClient::new(Arc::new(oracle_for(&fx.questions, &sets)), "oracle");

    let utility = JudgeConfig::new(Form::ListwiseSet, Judgment::Utility);
    let rank = JudgeConfig::new(Form::ListwiseRank, Judgment::Utility);
    let mut judgments = JudgmentStore::new();
    for (q, set) in fx.questions.iter().zip(&sets) {
        judgments.insert(run_judge(q, set, &client, &utility)?);
        judgments.insert(run_judge(q, set, &client, &rank)?);
    }

    let evidence_sources = [
        EvidenceSource::NONE,
        EvidenceSource::DENSE,
        EvidenceSource::GROUND_TRUTH,
        EvidenceSource::judged(utility),
        EvidenceSource::judged(rank),
    ];
    for source in evidence_sources {
        let mut records = Vec::new();
        for (q, set) in fx.questions.iter().zip(&sets) {
            let gt: Vec<_> = q.ground_truth_ids.iter().filter_map(|id| store.passage(id, Origin::GroundTruth)).collect();
            let evidence = select_evidence(&source, set, &gt, &judgments)?;
            records.push(generate_answer(q, source, &evidence, &client)?);
        }
        let report = evaluate_answers(&records, &fx.questions)?;
        let fqa = report.fqa.expect("factoid questions");
        println!("{:<36} EM={:>6.2} F1={:>6.2}", source.label(), fqa.em, fqa.f1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
