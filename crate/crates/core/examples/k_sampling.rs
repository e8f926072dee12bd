//! k-sampling: judge k shuffles of the candidates and vote. Against a judge
//! that misses evidence depending on where it sits, voting recovers F1.

use std::collections::HashSet;
use std::sync::Arc;

use utiljudge::clients::mock::{oracle_for, GazetteerNer, NoiseModel, NoisyOracle};
use utiljudge::clients::ChatClient;
use utiljudge::fixture::Fixture;
use utiljudge::judge::{run_judge, Form, JudgeConfig, Judgment};
use utiljudge::metrics::set_metrics;
use utiljudge::synth::{build_entity_corpus, build_gti, GtiSources, Placement};

pub fn run_example() -> utiljudge::Result<()> {
    let fx = Fixture::factoid(40, 1, 5);
    let store = fx.store();
    let entities = build_entity_corpus(&fx.questions, &GazetteerNer::new(fx.gazetteer.clone()))?.corpus;
    let sources = GtiSources { run: &fx.run, store: &store, entities: &entities, generator: None };
    let sets = fx
        .questions
        .iter()
        .map(|q| build_gti(q, &sources, 10, 5, Placement::Shuffled).map(|(s, _)| s))
        .collect::<utiljudge::Result<Vec<_>>>()?;
    let noisy = NoisyOracle::new(oracle_for(&fx.questions, &sets), NoiseModel::default(), 5);
    let client = ChatClient::new(Arc::new(noisy), "noisy");

    for k in [1, 3, 5, 10] {
        let config = JudgeConfig::new(Form::ListwiseSet, Judgment::Utility).with_k(k).with_seed(5);
        let mut f1 = 0.0;
        for (q, set) in fx.questions.iter().zip(&sets) {
            let record = run_judge(q, set, &client, &config)?;
            let chosen: HashSet<usize> = record.result.indices().iter().copied().collect();
            let truth: HashSet<usize> = set.truth_indices(q).into_iter().collect();
            f1 += set_metrics(&chosen, &truth)?.f1;
        }
        println!("k={k:<2} mean F1 = {:.2}", 100.0 * f1 / sets.len() as f64);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
