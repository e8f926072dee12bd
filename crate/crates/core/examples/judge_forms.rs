//! Run every judge form against the oracle backend and inspect the request
//! log: pointwise makes N calls, pairwise N(N-1)/2, listwise one.

use std::sync::Arc;

use utiljudge::clients::mock::GazetteerNer;
use utiljudge::clients::mock::oracle_for;
use utiljudge::clients::ChatClient;
use utiljudge::fixture::Fixture;
use utiljudge::judge::{render_prompt, run_judge, Form, JudgeConfig, Judgment, Requirement};
use utiljudge::synth::{build_entity_corpus, build_gti, GtiSources, Placement};

pub fn run_example() -> utiljudge::Result<()> {
    let fx = Fixture::factoid(1, 1, 0);
    let store = fx.store();
    let entities = build_entity_corpus(&fx.questions, &GazetteerNer::new(fx.gazetteer.clone()))?.corpus;
    let sources = GtiSources { run: &fx.run, store: &store, entities: &entities, generator: None };
    let q = &fx.questions[0];
    let (set, _) = build_gti(q, &sources, 10, 1, Placement::GroundTruthAt(6))?;

    let client = ChatClient::new(Arc::new(oracle_for(&fx.questions, std::slice::from_ref(&set))), "oracle");
    for form in utiljudge::judge::Form::ALL {
        let config = JudgeConfig::new(form, Judgment::Utility);
        client.log().clear();
        let record = run_judge(q, &set, &client, &config)?;
        println!("{:<14} calls={:<3} result={:?}", form.label(), client.log().len(), record.result);
    }

    let cot = JudgeConfig::new(Form::ListwiseSet, Judgment::Utility).with_requirement(Requirement::Cot);
    println!("\n{}", render_prompt(&cot, q, &set.passages[..2])?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
