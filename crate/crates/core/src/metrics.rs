//! Judgment-quality metrics (set P/R/F1, NDCG@k, MRR@k) and answer-quality
//! metrics (EM, token F1, ROUGE-L, sentence BLEU).
//!
//! Text metrics work on [`normalized_tokens`]: lowercased, ASCII punctuation
//! and articles removed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, normalized_tokens};
use crate::error::{Error, Result};

/// Floor for zero n-gram precisions in sentence BLEU.
pub const BLEU_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn set_metrics<T: Eq + Hash>(selected: &HashSet<T>, truth: &HashSet<T>) -> Result<SetScore> {
    if truth.is_empty() {
        return Err(Error::Contract("set metrics need a non-empty truth set".into()));
    }
    let hits = selected.intersection(truth).count() as f64;
    let precision = if selected.is_empty() {
        0.0
    } else {
        hits / selected.len() as f64
    };
    let recall = hits / truth.len() as f64;
    Ok(SetScore {
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

fn check_ranking<T: Eq + Hash>(ranking: &[T], relevant: &HashSet<T>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Contract("cutoff k must be at least 1".into()));
    }
    if relevant.is_empty() {
        return Err(Error::Contract("ranking metrics need a non-empty relevant set".into()));
    }
    let distinct: HashSet<&T> = ranking.iter().collect();
    if distinct.len() != ranking.len() {
        return Err(Error::Contract("ranking contains duplicates".into()));
    }
    Ok(())
}

fn discount(position: usize) -> f64 {
    // position is 0-based; rank i = position + 1 is discounted by log2(i + 1).
    1.0 / ((position + 2) as f64).log2()
}

/// NDCG@k with binary gains; the ideal DCG counts every relevant item, so
/// relevant items missing from the ranking lower the score.
pub fn ndcg_at_k<T: Eq + Hash>(ranking: &[T], relevant: &HashSet<T>, k: usize) -> Result<f64> {
    check_ranking(ranking, relevant, k)?;
    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, id)| relevant.contains(id))
        .map(|(i, _)| discount(i))
        .sum();
    let idcg: f64 = (0..relevant.len().min(k)).map(discount).sum();
    Ok(dcg / idcg)
}

pub fn mrr_at_k<T: Eq + Hash>(ranking: &[T], relevant: &HashSet<T>, k: usize) -> Result<f64> {
    check_ranking(ranking, relevant, k)?;
    Ok(ranking
        .iter()
        .take(k)
        .position(|id| relevant.contains(id))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankScore {
    pub ndcg_at: BTreeMap<usize, f64>,
    pub mrr_at: BTreeMap<usize, f64>,
}

impl RankScore {
    pub fn compute<T: Eq + Hash>(
        ranking: &[T],
        relevant: &HashSet<T>,
        ndcg_cutoffs: &[usize],
        mrr_cutoffs: &[usize],
    ) -> Result<Self> {
        let mut score = RankScore {
            ndcg_at: BTreeMap::new(),
            mrr_at: BTreeMap::new(),
        };
        for &k in ndcg_cutoffs {
            score.ndcg_at.insert(k, ndcg_at_k(ranking, relevant, k)?);
        }
        for &k in mrr_cutoffs {
            score.mrr_at.insert(k, mrr_at_k(ranking, relevant, k)?);
        }
        Ok(score)
    }
}

fn non_empty_golds(golds: &[String]) -> Result<()> {
    if golds.is_empty() {
        Err(Error::Contract("at least one gold answer is required".into()))
    } else {
        Ok(())
    }
}

pub fn exact_match(prediction: &str, golds: &[String]) -> Result<u8> {
    non_empty_golds(golds)?;
    let pred = normalize_text(prediction);
    Ok(golds.iter().any(|g| normalize_text(g) == pred) as u8)
}

fn multiset(tokens: &[String]) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

fn token_f1_single(pred: &[String], gold: &[String]) -> f64 {
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let gold_counts = multiset(gold);
    let common: usize = multiset(pred)
        .iter()
        .map(|(t, &c)| c.min(gold_counts.get(t).copied().unwrap_or(0)))
        .sum();
    if common == 0 {
        return 0.0;
    }
    harmonic(common as f64 / pred.len() as f64, common as f64 / gold.len() as f64)
}

/// Best token-overlap F1 over the gold answers. Two empty token lists score 1.
pub fn token_f1(prediction: &str, golds: &[String]) -> Result<f64> {
    non_empty_golds(golds)?;
    let pred = normalized_tokens(prediction);
    Ok(golds
        .iter()
        .map(|g| token_f1_single(&pred, &normalized_tokens(g)))
        .fold(0.0, f64::max))
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F-measure with β = 1. Both sides empty scores 1, one side empty 0.
pub fn rouge_l(prediction: &str, reference: &str) -> f64 {
    let pred = normalized_tokens(prediction);
    let reference = normalized_tokens(reference);
    match (pred.is_empty(), reference.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let lcs = lcs_len(&pred, &reference) as f64;
    harmonic(lcs / pred.len() as f64, lcs / reference.len() as f64)
}

/// Best ROUGE-L over several references.
pub fn rouge_l_multi(prediction: &str, references: &[String]) -> Result<f64> {
    non_empty_golds(references)?;
    Ok(references
        .iter()
        .map(|r| rouge_l(prediction, r))
        .fold(0.0, f64::max))
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence BLEU-1..=max_n (element `n - 1` is BLEU-n). Zero n-gram
/// precisions are floored at [`BLEU_EPSILON`]; the reference length for the
/// brevity penalty is the closest one, shorter on ties.
pub fn bleu(prediction: &str, references: &[String], max_n: usize) -> Result<Vec<f64>> {
    non_empty_golds(references)?;
    let pred = normalized_tokens(prediction);
    if pred.is_empty() {
        return Ok(vec![0.0; max_n]);
    }
    let refs: Vec<Vec<String>> = references.iter().map(|r| normalized_tokens(r)).collect();

    let c = pred.len() as f64;
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(pred.len()), len))
        .unwrap() as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };

    let mut log_precisions = Vec::with_capacity(max_n);
    for m in 1..=max_n {
        let pred_counts = ngram_counts(&pred, m);
        let total: usize = pred_counts.values().sum();
        let ref_counts: Vec<_> = refs.iter().map(|r| ngram_counts(r, m)).collect();
        let clipped: usize = pred_counts
            .iter()
            .map(|(g, &cnt)| {
                let max_ref = ref_counts
                    .iter()
                    .map(|rc| rc.get(g).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                cnt.min(max_ref)
            })
            .sum();
        let p = if total == 0 || clipped == 0 {
            BLEU_EPSILON
        } else {
            clipped as f64 / total as f64
        };
        log_precisions.push(p.ln());
    }

    Ok((1..=max_n)
        .map(|n| {
            let mean = log_precisions[..n].iter().sum::<f64>() / n as f64;
            bp * mean.exp()
        })
        .collect())
}

/// All answer metrics for one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerScore {
    pub em: u8,
    pub token_f1: f64,
    pub rouge_l: f64,
    /// BLEU-1..4.
    pub bleu: [f64; 4],
}

impl AnswerScore {
    pub fn compute(prediction: &str, golds: &[String]) -> Result<Self> {
        let b = bleu(prediction, golds, 4)?;
        Ok(AnswerScore {
            em: exact_match(prediction, golds)?,
            token_f1: token_f1(prediction, golds)?,
            rouge_l: rouge_l_multi(prediction, golds)?,
            bleu: [b[0], b[1], b[2], b[3]],
        })
    }
}
