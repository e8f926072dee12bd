//! Build GTI and GTU candidate sets from a synthetic benchmark.
//!
//! ```text
//! cargo run --example build_benchmark
//! ```

use utiljudge::clients::mock::GazetteerNer;
use utiljudge::fixture::Fixture;
use utiljudge::synth::{build_entity_corpus, build_gti, build_gtu, GtiSources, Placement};

pub fn run_example() -> utiljudge::Result<()> {
    let fx = Fixture::factoid(3, 1, 1);
    let store = fx.store();
    let ner = GazetteerNer::new(fx.gazetteer.clone());
    let entities = build_entity_corpus(&fx.questions, &ner)?.corpus;
    let sources = GtiSources { run: &fx.run, store: &store, entities: &entities, generator: None };

    for q in &fx.questions {
        let (gti, warnings) = build_gti(q, &sources, 10, 42, Placement::Shuffled)?;
        println!("{} {:?}", q.id, q.text);
        for (i, p) in gti.passages.iter().enumerate() {
            println!("  {:>2} {:<9} {}", i + 1, p.origin.label(), p.text);
        }
        for w in warnings {
            println!("  note: {w}");
        }
        let gtu = build_gtu(&fx.run, &store, q, 10)?;
        let hits = gtu.truth_indices(q);
        println!("  GTU top-10 holds ground truth at {hits:?}\n");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
