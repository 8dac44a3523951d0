//! Answer-quality metrics: exact match and token-level F1 over normalized
//! text, with max-over-golds semantics for datasets that ship aliases.

mod dataset;
mod report;

pub use dataset::{load_dataset, DatasetFormat, QaExample};
pub use report::{aggregate, percent_one_decimal, ExampleScore, Report};

use regex::Regex;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Lowercase, strip punctuation, drop the articles a/an/the, collapse
/// whitespace. The conventional normalization for extractive QA scoring.
pub fn normalize_answer(text: &str) -> String {
    static ARTICLE_RE: OnceLock<Regex> = OnceLock::new();
    let article_re =
        ARTICLE_RE.get_or_init(|| Regex::new(r"\b(a|an|the)\b").expect("static regex"));

    let lowered = text.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    let no_articles = article_re.replace_all(&no_punct, " ");
    no_articles.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn tokens(text: &str) -> Vec<String> {
    normalize_answer(text)
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// 1 when the normalized prediction equals any normalized gold answer.
pub fn exact_match(prediction: &str, golds: &[String]) -> u8 {
    let pred = normalize_answer(prediction);
    golds.iter().any(|g| normalize_answer(g) == pred).into()
}

fn f1_single(prediction: &str, gold: &str) -> f64 {
    let pred_tokens = tokens(prediction);
    let gold_tokens = tokens(gold);
    if pred_tokens.is_empty() || gold_tokens.is_empty() {
        return if pred_tokens.is_empty() && gold_tokens.is_empty() {
            1.0
        } else {
            0.0
        };
    }

    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for token in &gold_tokens {
        *gold_counts.entry(token.as_str()).or_insert(0) += 1;
    }
    let mut common = 0usize;
    for token in &pred_tokens {
        if let Some(count) = gold_counts.get_mut(token.as_str()) {
            if *count > 0 {
                *count -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pred_tokens.len() as f64;
    let recall = common as f64 / gold_tokens.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Token-multiset F1, maximized over the gold answers.
pub fn f1_score(prediction: &str, golds: &[String]) -> f64 {
    golds
        .iter()
        .map(|g| f1_single(prediction, g))
        .fold(0.0, f64::max)
}
