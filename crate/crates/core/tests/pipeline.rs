use std::fs;

use utiljudge::corpus::Origin;
use utiljudge::fixture::Fixture;
use utiljudge::judge::{Form, Judgment};
use utiljudge::pipeline::{cmd_build, cmd_judge, cmd_qa, cmd_report, Backend, BenchmarkMode, GridSpec, RunConfig};
use utiljudge::Error;

fn fixture_config(dir: &std::path::Path, questions: usize) -> RunConfig {
    Fixture::factoid(questions, 1, 7).write(dir).unwrap()
}

#[test]
fn oracle_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture_config(dir.path(), 6);

    let build = cmd_build(&config).unwrap();
    assert!(build.is_clean(), "{:?}", build.errors);
    assert_eq!(build.value.len(), 6);
    let row = &build.table.rows[0];
    assert_eq!(&row[2..6], ["1.00", "3.00", "3.00", "3.00"]);

    let judge = cmd_judge(&config).unwrap();
    assert!(judge.is_clean(), "{:?}", judge.errors);
    for row in &judge.table.rows {
        assert_eq!(row[4], "100.00", "F1 of {}", row[0]);
    }
    let rank_rows: Vec<_> = judge.table.rows.iter().filter(|r| r[5] != "-").collect();
    assert_eq!(rank_rows.len(), 2);
    assert!(rank_rows.iter().all(|r| r[5] == "100.00"));

    let qa = cmd_qa(&config).unwrap();
    assert!(qa.is_clean(), "{:?}", qa.errors);
    let em = |label: &str| {
        qa.table.rows.iter().find(|r| r[0] == label).map(|r| r[2].clone()).unwrap()
    };
    assert_eq!(em("None"), "0.00");
    assert_eq!(em("Ground-truth"), "100.00");
    assert_eq!(em("utility-listwise-set-none-qf-k1"), "100.00");

    let report = cmd_report(&config).unwrap();
    assert!(report.contains("Judgment quality"));
    assert!(report.contains("Answer quality by evidence source"));
    for name in ["candidates.jsonl", "composition.csv", "judge_metrics.txt", "qa_report.csv", "report.txt", "judge_requests.jsonl", "qa_requests.jsonl"] {
        let text = fs::read_to_string(config.out.join(name)).unwrap();
        assert!(text.starts_with("{\"_meta\"") || text.starts_with("# seed="), "{name}");
    }
}

#[test]
fn gtu_build_takes_top_ten() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { mode: BenchmarkMode::Gtu, ..fixture_config(dir.path(), 4) };
    let build = cmd_build(&config).unwrap();
    for set in &build.value {
        assert_eq!(set.passages.len(), 10);
        assert!(set.passages.iter().all(|p| p.origin == Origin::Retrieved));
    }
    assert_eq!(build.table.rows[0][6], "10.00");
}

#[test]
fn dense_below_ground_truth_on_gtu() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        mode: BenchmarkMode::Gtu,
        grid: GridSpec { forms: vec![Form::ListwiseSet], ..GridSpec::default() },
        ..fixture_config(dir.path(), 8)
    };
    cmd_build(&config).unwrap();
    cmd_judge(&config).unwrap();
    let qa = cmd_qa(&config).unwrap();
    let em = |label: &str| -> f64 { qa.table.rows.iter().find(|r| r[0] == label).unwrap()[2].parse().unwrap() };
    assert_eq!(em("Dense"), 75.0);
    assert_eq!(em("Ground-truth"), 100.0);
}

#[test]
fn missing_run_file_is_a_path_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture_config(dir.path(), 2);
    fs::remove_file(&config.run).unwrap();
    match cmd_build(&config) {
        Err(Error::Io { path, .. }) => assert!(path.ends_with("run.trec")),
        other => panic!("expected io error, got {other:?}"),
    }
}

#[test]
fn empty_grid_is_a_noop() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { grid: GridSpec { forms: vec![], ..GridSpec::default() }, ..fixture_config(dir.path(), 2) };
    cmd_build(&config).unwrap();
    let judge = cmd_judge(&config).unwrap();
    assert!(judge.value.is_empty());
    assert!(judge.table.rows.is_empty());
    assert!(!judge.warnings.is_empty());
}

#[test]
fn http_backend_without_credentials_fails_before_any_call() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path(), 2);
    cmd_build(&config).unwrap();
    config.backend = Backend::Http;
    config.http.api_key_env = Some("UTILJUDGE_TEST_UNSET_KEY".into());
    assert!(matches!(cmd_judge(&config), Err(Error::Config(_))));
    assert!(!config.out.join("judgments").exists());
}

#[test]
fn scripted_backend_replays_by_prompt_hash() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig {
        grid: GridSpec { forms: vec![Form::ListwiseSet], judgments: vec![Judgment::Utility], ..GridSpec::default() },
        ..fixture_config(dir.path(), 1)
    };
    let sets = cmd_build(&config).unwrap().value;
    let q = &Fixture::factoid(1, 1, 7).questions[0];
    let judge = utiljudge::judge::JudgeConfig::new(Form::ListwiseSet, Judgment::Utility);
    let prompt = utiljudge::judge::render_prompt(&judge, q, &sets[0].passages).unwrap();
    let scripts = serde_json::json!({ utiljudge::clients::prompt_hash(&prompt): "Judgment: Passage-1" });
    let path = dir.path().join("scripts.json");
    fs::write(&path, scripts.to_string()).unwrap();
    config.scripts = Some(path);
    config.backend = Backend::MockScripted;
    let out = cmd_judge(&config).unwrap();
    assert!(out.is_clean(), "{:?}", out.errors);
    let record = out.value.iter().next().unwrap();
    assert_eq!(record.result.indices(), [0]);
}
