#[allow(dead_code)]
#[path = "../examples/build_benchmark.rs"]
mod build_benchmark;
#[allow(dead_code)]
#[path = "../examples/counterfactuals.rs"]
mod counterfactuals;
#[allow(dead_code)]
#[path = "../examples/full_pipeline.rs"]
mod full_pipeline;
#[allow(dead_code)]
#[path = "../examples/http_backends.rs"]
mod http_backends;
#[allow(dead_code)]
#[path = "../examples/judge_forms.rs"]
mod judge_forms;
#[allow(dead_code)]
#[path = "../examples/k_sampling.rs"]
mod k_sampling;
#[allow(dead_code)]
#[path = "../examples/metrics.rs"]
mod metrics;
#[allow(dead_code)]
#[path = "../examples/qa_harness.rs"]
mod qa_harness;
#[allow(dead_code)]
#[path = "../examples/trec_runs.rs"]
mod trec_runs;

#[test]
fn examples_run() {
    build_benchmark::run_example().unwrap();
    counterfactuals::run_example().unwrap();
    http_backends::run_example().unwrap();
    judge_forms::run_example().unwrap();
    k_sampling::run_example().unwrap();
    metrics::run_example().unwrap();
    qa_harness::run_example().unwrap();
    trec_runs::run_example().unwrap();
}

#[test]
fn full_pipeline_example_runs() {
    let dir = tempfile::tempdir().unwrap();
    let report = full_pipeline::run_in(dir.path().to_path_buf()).unwrap();
    assert!(report.contains("5-sampling"));
}
