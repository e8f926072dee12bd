//! Read, validate and write TREC-format retrieval runs.

use utiljudge::corpus::parse_run;

pub fn run_example() -> utiljudge::Result<()> {
    let text = "q1 Q0 d7 1 12.5 bm25\nq1 Q0 d3 2 11.0 bm25\nq2 Q0 d9 1 8.25 bm25\n";
    let run = parse_run(text)?;
    for qid in run.question_ids() {
        let ids: Vec<_> = run.get(qid).iter().map(|e| e.passage_id.as_str()).collect();
        println!("{qid}: {ids:?}");
    }
    print!("{}", run.to_trec("rerun"));

    match parse_run("q1 Q0 d7 1 1.0 x\nq1 Q0 d8 3 0.5 x\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("ranks must be contiguous"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
