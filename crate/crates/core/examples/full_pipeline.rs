//! The build -> judge -> qa -> report pipeline driven by a run config, the
//! same path the `utiljudge` binary takes. Writes a synthetic benchmark to a
//! directory (default: a temporary one) so the binary can be pointed at it:
//!
//! ```text
//! cargo run --example full_pipeline -- /tmp/demo
//! cargo run -- build --config /tmp/demo/config.toml
//! ```

use std::path::PathBuf;

use utiljudge::fixture::Fixture;
use utiljudge::judge::Form;
use utiljudge::pipeline::{cmd_build, cmd_judge, cmd_qa, cmd_report, write_atomic, Backend, GridSpec, RunConfig};

const CONFIG: &str = r#"questions = "questions.jsonl"
corpus = "passages.jsonl"
run = "run.trec"
gazetteer = "gazetteer.json"
out = "out"
backend = "mock:noisy"
seed = 11

[grid]
forms = ["Pointwise", "ListwiseSet", "ListwiseRank"]
k_samples = [1, 5]
"#;

pub fn run_in(dir: PathBuf) -> utiljudge::Result<String> {
    let written = Fixture::factoid(12, 1, 11).write(&dir)?;
    write_atomic(&dir.join("config.toml"), CONFIG)?;
    let config = RunConfig::load(&dir.join("config.toml"))?;
    assert_eq!(config.questions, written.questions);
    assert_eq!(config.backend, Backend::MockNoisy);
    assert_eq!(
        config.grid,
        GridSpec { forms: vec![Form::Pointwise, Form::ListwiseSet, Form::ListwiseRank], k_samples: vec![1, 5], ..GridSpec::default() }
    );

    for (name, errors) in [
        ("build", cmd_build(&config)?.errors),
        ("judge", cmd_judge(&config)?.errors),
        ("qa", cmd_qa(&config)?.errors),
    ] {
        println!("{name}: {} errors", errors.len());
    }
    cmd_report(&config)
}

pub fn run_example() -> utiljudge::Result<()> {
    let tmp = tempfile::tempdir().map_err(|e| utiljudge::Error::Config(e.to_string()))?;
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| tmp.path().to_path_buf());
    println!("{}", run_in(dir)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
