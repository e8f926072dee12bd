//! Judgment prompt templates.
//!
//! Prompts label passages `Passage-1` .. `Passage-N` (1-based) in the order
//! given; everything stored downstream is 0-based. Question and passage text
//! are whitespace-collapsed onto one line each so a prompt can be inspected
//! line by line.

use serde::{Deserialize, Serialize};

use super::{Form, JudgeConfig, Judgment, Requirement};
use crate::corpus::{Passage, Question};
use crate::error::{Error, Result};

pub const COT_PHRASE: &str = "Let's think step by step.";
pub const REASONING_PHRASE: &str = "Please provide a brief reasoning before giving your judgment.";
pub const ANSWER_PHRASE: &str =
    "Please first provide the answer to the question, then give your judgment.";
pub const REPROMPT_SUFFIX: &str = "Answer with the required format only.";

const POINTWISE_OUTPUT: &str = "Output \"Judgment: Yes\" on the final line if the passage has utility in answering the question, otherwise output \"Judgment: No\".";
const PAIRWISE_OUTPUT: &str = "Output \"Judgment: Passage-1\" or \"Judgment: Passage-2\" on the final line to name the passage with more utility in answering the question.";
const SET_OUTPUT: &str = "Output your selection on the final line in the format \"Judgment: Passage-i, Passage-j, ...\". If no passage qualifies, output \"Judgment: none\".";
const RANK_OUTPUT: &str = "Output your ranking of all passages on the final line in the format \"Judgment: Passage-i > Passage-j > ...\", best first.";

const UTILITY_NOTE: &str = "A passage has utility if it supplies the information needed to produce a correct answer. A passage can be on topic and still lack the answer or state it wrongly.";

/// Collapse runs of whitespace, including newlines, to single spaces.
pub(crate) fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn intro(form: Form, judgment: Judgment, n: usize) -> String {
    match (form, judgment) {
        (Form::Pointwise, _) => format!(
            "You are given a question and a passage. Judge whether the passage has utility in answering the question. {UTILITY_NOTE}"
        ),
        (Form::Pairwise, _) => format!(
            "You are given a question and two passages. Judge which passage has more utility in answering the question. {UTILITY_NOTE}"
        ),
        (Form::ListwiseSet, Judgment::Utility) => format!(
            "You are given a question and {n} passages. Select all passages that have utility in answering the question. {UTILITY_NOTE}"
        ),
        (Form::ListwiseRank, Judgment::Utility) => format!(
            "You are given a question and {n} passages. Rank the passages by their utility in answering the question. {UTILITY_NOTE}"
        ),
        (Form::ListwiseSet, Judgment::Relevance) => format!(
            "You are given a question and {n} passages. Select all passages that are relevant to the question."
        ),
        (Form::ListwiseRank, Judgment::Relevance) => format!(
            "You are given a question and {n} passages. Rank the passages by their relevance to the question."
        ),
    }
}

fn output_instruction(form: Form) -> &'static str {
    match form {
        Form::Pointwise => POINTWISE_OUTPUT,
        Form::Pairwise => PAIRWISE_OUTPUT,
        Form::ListwiseSet => SET_OUTPUT,
        Form::ListwiseRank => RANK_OUTPUT,
    }
}

fn requirement_phrase(requirement: Requirement) -> Option<&'static str> {
    match requirement {
        Requirement::None => None,
        Requirement::Cot => Some(COT_PHRASE),
        Requirement::Reasoning => Some(REASONING_PHRASE),
        Requirement::Answer => Some(ANSWER_PHRASE),
    }
}

/// Passages the form expects in one prompt; `None` for listwise (any N ≥ 1).
pub fn expected_passages(form: Form) -> Option<usize> {
    match form {
        Form::Pointwise => Some(1),
        Form::Pairwise => Some(2),
        Form::ListwiseSet | Form::ListwiseRank => None,
    }
}

pub fn render_prompt(config: &JudgeConfig, question: &Question, passages: &[Passage]) -> Result<String> {
    config.validate()?;
    let texts: Vec<&str> = passages.iter().map(|p| p.text.as_str()).collect();
    render_texts(config, &question.text, &texts)
}

pub(crate) fn render_texts(config: &JudgeConfig, question: &str, passages: &[&str]) -> Result<String> {
    match expected_passages(config.form) {
        Some(n) if passages.len() != n => {
            return Err(Error::Contract(format!(
                "{:?} prompt takes {n} passage(s), got {}",
                config.form,
                passages.len()
            )))
        }
        None if passages.is_empty() => {
            return Err(Error::Contract("listwise prompt needs at least one passage".into()))
        }
        _ => {}
    }

    let question_block = format!("Question: {}", one_line(question));
    let passage_block = passages
        .iter()
        .enumerate()
        .map(|(i, text)| format!("Passage-{}: {}", i + 1, one_line(text)))
        .collect::<Vec<_>>()
        .join("\n");

    let mut sections = vec![intro(config.form, config.judgment, passages.len())];
    match config.order {
        super::InputOrder::QuestionFirst => {
            sections.push(question_block);
            sections.push(passage_block);
        }
        super::InputOrder::PassagesFirst => {
            sections.push(passage_block);
            sections.push(question_block);
        }
    }
    let mut closing = String::new();
    if let Some(phrase) = requirement_phrase(config.requirement) {
        closing.push_str(phrase);
        closing.push('\n');
    }
    closing.push_str(output_instruction(config.form));
    sections.push(closing);
    Ok(sections.join("\n\n"))
}

pub fn reprompt(prompt: &str) -> String {
    format!("{prompt}\n\n{REPROMPT_SUFFIX}")
}

/// Structural view of a rendered judgment prompt, for mock backends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptView {
    pub form: Form,
    pub question: String,
    pub passages: Vec<String>,
}

/// Recover form, question and passage texts from a prompt produced by
/// [`render_prompt`]. Returns `None` for anything else.
pub fn inspect_prompt(prompt: &str) -> Option<PromptView> {
    let form = if prompt.contains(POINTWISE_OUTPUT) {
        Form::Pointwise
    } else if prompt.contains(PAIRWISE_OUTPUT) {
        Form::Pairwise
    } else if prompt.contains(SET_OUTPUT) {
        Form::ListwiseSet
    } else if prompt.contains(RANK_OUTPUT) {
        Form::ListwiseRank
    } else {
        return None;
    };
    let (question, passages) = question_and_passages(prompt)?;
    Some(PromptView {
        form,
        question,
        passages,
    })
}

/// Pull the `Question:` line and the `Passage-i:` lines out of a prompt.
pub(crate) fn question_and_passages(prompt: &str) -> Option<(String, Vec<String>)> {
    let mut question = None;
    let mut passages = Vec::new();
    for line in prompt.lines() {
        if let Some(q) = line.strip_prefix("Question: ") {
            question = Some(q.to_string());
        } else if let Some(rest) = line.strip_prefix("Passage-") {
            let (num, text) = rest.split_once(": ")?;
            let num: usize = num.parse().ok()?;
            if num != passages.len() + 1 {
                return None;
            }
            passages.push(text.to_string());
        }
    }
    Some((question?, passages))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judge::InputOrder;

    fn cfg(form: Form, judgment: Judgment, requirement: Requirement, order: InputOrder) -> JudgeConfig {
        JudgeConfig {
            form,
            judgment,
            requirement,
            order,
            ..JudgeConfig::default()
        }
    }

    #[test]
    fn listwise_set_question_first_layout() {
        let c = cfg(Form::ListwiseSet, Judgment::Utility, Requirement::None, InputOrder::QuestionFirst);
        let texts: Vec<String> = (1..=10).map(|i| format!("text {i}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let p = render_texts(&c, "who?", &refs).unwrap();
        let q = p.find("Question: who?").unwrap();
        let p1 = p.find("Passage-1: text 1").unwrap();
        let p10 = p.find("Passage-10: text 10").unwrap();
        let out = p.find(SET_OUTPUT).unwrap();
        assert!(q < p1 && p1 < p10 && p10 < out);
        assert!(p.ends_with(SET_OUTPUT));
    }

    #[test]
    fn passages_first_swaps_blocks() {
        let c = cfg(Form::ListwiseRank, Judgment::Relevance, Requirement::None, InputOrder::PassagesFirst);
        let p = render_texts(&c, "q", &["a", "b"]).unwrap();
        assert!(p.find("Passage-2: b").unwrap() < p.find("Question: q").unwrap());
    }

    #[test]
    fn cot_phrase_present() {
        let c = cfg(Form::Pointwise, Judgment::Utility, Requirement::Cot, InputOrder::QuestionFirst);
        let p = render_texts(&c, "q", &["a"]).unwrap();
        assert!(p.contains("Let's think step by step"));
    }

    #[test]
    fn wrong_passage_count() {
        let c = cfg(Form::Pointwise, Judgment::Utility, Requirement::None, InputOrder::QuestionFirst);
        assert!(matches!(render_texts(&c, "q", &["a", "b"]), Err(Error::Contract(_))));
        let c = cfg(Form::Pairwise, Judgment::Utility, Requirement::None, InputOrder::QuestionFirst);
        assert!(render_texts(&c, "q", &["a"]).is_err());
    }

    #[test]
    fn multiline_text_is_flattened_and_inspectable() {
        let c = cfg(Form::ListwiseSet, Judgment::Utility, Requirement::Reasoning, InputOrder::PassagesFirst);
        let p = render_texts(&c, "who\nwrote it", &["line one\n\nline two", "x"]).unwrap();
        let view = inspect_prompt(&p).unwrap();
        assert_eq!(view.form, Form::ListwiseSet);
        assert_eq!(view.question, "who wrote it");
        assert_eq!(view.passages, vec!["line one line two", "x"]);
    }
}
