//! Extraction of verdicts from free-text judge output.
//!
//! The answer line is the last line carrying a `Judgment:` label. Outputs
//! without one fall back to form-specific heuristics so that bare replies
//! such as `Yes, it does.` or `Passage-3 > Passage-1` still parse.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Form;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Pointwise: does the passage have utility.
    Point(bool),
    /// Pairwise: 0 if the first presented passage wins, 1 for the second.
    PairWinner(usize),
    /// 0-based indices, ascending.
    Set(Vec<usize>),
    /// 0-based indices, best first, no duplicates.
    Ranking(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)judgment\s*:\s*(.*)$").unwrap())
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)passage[\s_-]*(\d+)").unwrap())
}

fn int_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+").unwrap())
}

fn list_label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*(passages|selection|ranking|answer)\s*:\s*(.*)$").unwrap())
}

fn labeled_payload(raw: &str) -> Option<&str> {
    raw.lines()
        .rev()
        .find_map(|line| label_re().captures(line).map(|c| c.get(1).unwrap().as_str()))
}

/// 1-based numbers named in a line: `Passage-k` tags if any, else bare integers.
fn numbers(line: &str) -> Vec<usize> {
    let tagged: Vec<usize> = tag_re()
        .captures_iter(line)
        .filter_map(|c| c[1].parse().ok())
        .collect();
    if !tagged.is_empty() {
        return tagged;
    }
    int_re()
        .find_iter(line)
        .filter_map(|m| m.as_str().parse().ok())
        .collect()
}

fn list_payload(raw: &str) -> Option<String> {
    if let Some(p) = labeled_payload(raw) {
        return Some(p.to_string());
    }
    raw.lines().rev().find_map(|line| {
        if let Some(c) = list_label_re().captures(line) {
            Some(c[2].to_string())
        } else if tag_re().is_match(line) {
            Some(line.to_string())
        } else {
            None
        }
    })
}

fn yes_no(text: &str) -> Option<bool> {
    text.split(|c: char| !c.is_alphanumeric())
        .find_map(|tok| match tok.to_ascii_lowercase().as_str() {
            "yes" => Some(true),
            "no" => Some(false),
            _ => None,
        })
}

/// 0-based indices from 1-based numbers, dropping out-of-range ones.
fn to_indices(nums: Vec<usize>, n: usize, warnings: &mut Vec<String>) -> Vec<usize> {
    let mut out = Vec::new();
    for k in nums {
        if k == 0 || k > n {
            warnings.push(format!("index {k} outside 1..={n} dropped"));
        } else if !out.contains(&(k - 1)) {
            out.push(k - 1);
        }
    }
    out
}

/// Parse a raw completion for `form` over `n` presented passages.
/// Returns `None` when no verdict can be extracted.
pub fn parse_output(form: Form, raw: &str, n: usize) -> Option<Parsed> {
    let mut warnings = Vec::new();
    let verdict = match form {
        Form::Pointwise => {
            let decided = labeled_payload(raw).and_then(yes_no).or_else(|| yes_no(raw))?;
            Verdict::Point(decided)
        }
        Form::Pairwise => {
            let payload = list_payload(raw)?;
            let first = numbers(&payload).into_iter().find(|&k| k == 1 || k == 2)?;
            Verdict::PairWinner(first - 1)
        }
        Form::ListwiseSet => {
            let payload = list_payload(raw)?;
            let nums = numbers(&payload);
            if nums.is_empty() {
                let rest = payload
                    .trim()
                    .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
                    .to_ascii_lowercase();
                if !(rest.is_empty() || rest == "none") {
                    return None;
                }
            }
            let mut set = to_indices(nums, n, &mut warnings);
            set.sort_unstable();
            Verdict::Set(set)
        }
        Form::ListwiseRank => {
            let payload = list_payload(raw)?;
            let ranking = to_indices(numbers(&payload), n, &mut warnings);
            if ranking.is_empty() {
                return None;
            }
            Verdict::Ranking(ranking)
        }
    };
    Some(Parsed { verdict, warnings })
}
