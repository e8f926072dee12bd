//! Metric kernels: set P/R/F1, NDCG and MRR, EM/F1, ROUGE-L and BLEU.

use std::collections::HashSet;

use utiljudge::metrics::{bleu, exact_match, mrr_at_k, ndcg_at_k, rouge_l, set_metrics, token_f1, RankScore};

pub fn run_example() -> utiljudge::Result<()> {
    let truth: HashSet<&str> = ["p1", "p4"].into_iter().collect();
    let chosen: HashSet<&str> = ["p1", "p2"].into_iter().collect();
    let s = set_metrics(&chosen, &truth)?;
    println!("set: P={:.3} R={:.3} F1={:.3}", s.precision, s.recall, s.f1);

    let ranking = ["p1", "p3", "p4", "p2", "p5"];
    println!(
        "NDCG@1={:.4} NDCG@5={:.4} MRR@5={:.4}",
        ndcg_at_k(&ranking, &truth, 1)?,
        ndcg_at_k(&ranking, &truth, 5)?,
        mrr_at_k(&ranking, &truth, 5)?
    );
    let all = RankScore::compute(&ranking, &truth, &[1, 3, 5], &[5])?;
    println!("{all:?}");

    let golds = vec!["The Eiffel Tower".to_string(), "Eiffel tower in Paris".to_string()];
    println!("EM={} F1={:.3}", exact_match("eiffel tower!", &golds)?, token_f1("the tower in Paris", &golds)?);
    println!("ROUGE-L={:.4}", rouge_l("the cat sat on the mat", "the cat lay on the mat"));
    let b = bleu("the cat sat on the mat", &["the cat lay on the mat".to_string()], 4)?;
    println!("BLEU-1..4 = {:.4} {:.4} {:.4} {:.4}", b[0], b[1], b[2], b[3]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
