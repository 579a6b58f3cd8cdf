//! Exact match and token F1 against gold answers, with French normalization.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::squad::Dataset;
use crate::text::is_punctuation;

const ARTICLES: &[&str] = &["le", "la", "les", "l'", "un", "une", "des", "du", "de", "d'"];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Split after each apostrophe that follows a letter: `l'île` → `l'`, `île`.
fn split_elisions(token: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut prev_letter = false;
    for c in token.chars() {
        if is_apostrophe(c) && prev_letter {
            cur.push('\'');
            parts.push(std::mem::take(&mut cur));
            prev_letter = false;
            continue;
        }
        prev_letter = c.is_alphabetic();
        cur.push(c);
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

/// Drop punctuation except hyphens between two alphanumeric characters.
fn strip_punctuation(token: &str) -> String {
    let chars: Vec<char> = token.chars().collect();
    chars
        .iter()
        .enumerate()
        .filter(|&(i, &c)| {
            if !is_punctuation(c) {
                return true;
            }
            c == '-'
                && i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric()
        })
        .map(|(_, &c)| c)
        .collect()
}

/// Lowercase, split elisions, drop standalone articles and punctuation, and
/// collapse whitespace.
pub fn normalize_text_fr(text: &str) -> String {
    normalized_tokens(text).join(" ")
}

pub fn normalized_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .flat_map(split_elisions)
        .filter(|t| !ARTICLES.contains(&t.as_str()))
        .map(|t| strip_punctuation(&t))
        .filter(|t| !t.is_empty() && !ARTICLES.contains(&t.as_str()))
        .collect()
}

pub fn exact_match(prediction: &str, gold: &str) -> bool {
    normalize_text_fr(prediction) == normalize_text_fr(gold)
}

/// Token-overlap F1 on normalized tokens, in [0, 1]. Two empty token lists
/// score 1; one empty list scores 0.
pub fn token_f1(prediction: &str, gold: &str) -> f64 {
    let p = normalized_tokens(prediction);
    let g = normalized_tokens(gold);
    if p.is_empty() || g.is_empty() {
        return f64::from(u8::from(p.is_empty() && g.is_empty()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &g {
        *counts.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &p {
        if let Some(c) = counts.get_mut(t.as_str()).filter(|c| **c > 0) {
            *c -= 1;
            common += 1;
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p.len() as f64;
    let recall = common as f64 / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub id: String,
    pub exact_match: f64,
    pub f1: f64,
    pub predicted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    /// Mean over questions, 0 to 100.
    pub exact_match: f64,
    pub f1: f64,
    pub total: usize,
    /// Questions without a prediction; scored 0.
    pub missing: Vec<String>,
    /// Predictions for ids absent from the gold data; ignored.
    pub unknown: Vec<String>,
    pub per_question: Vec<QuestionScore>,
}

/// Score predictions against every gold answer of each question, keeping
/// the best match. Scores are on a 0-100 scale.
pub fn evaluate_predictions(gold: &Dataset, predictions: &BTreeMap<String, String>) -> EvalScores {
    let mut per_question = Vec::new();
    let mut missing = Vec::new();
    for (_, _, qa) in gold.qas() {
        let (em, f1, predicted) = match predictions.get(&qa.id) {
            Some(pred) => {
                let em = qa.answers.iter().any(|a| exact_match(pred, &a.text));
                let f1 = qa.answers.iter().map(|a| token_f1(pred, &a.text)).fold(0.0, f64::max);
                (f64::from(u8::from(em)), f1, true)
            }
            None => {
                missing.push(qa.id.clone());
                (0.0, 0.0, false)
            }
        };
        per_question.push(QuestionScore { id: qa.id.clone(), exact_match: 100.0 * em, f1: 100.0 * f1, predicted });
    }
    let known: std::collections::HashSet<&str> = gold.qas().map(|(_, _, q)| q.id.as_str()).collect();
    let unknown: Vec<String> = predictions.keys().filter(|k| !known.contains(k.as_str())).cloned().collect();
    for id in &unknown {
        log::warn!("prediction for unknown question `{id}` ignored");
    }
    let total = per_question.len();
    let mean = |f: fn(&QuestionScore) -> f64| {
        if total == 0 {
            0.0
        } else {
            per_question.iter().map(f).sum::<f64>() / total as f64
        }
    };
    EvalScores { exact_match: mean(|q| q.exact_match), f1: mean(|q| q.f1), total, missing, unknown, per_question }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_text_fr("La fièvre jaune."), "fièvre jaune");
        assert_eq!(normalize_text_fr("l'île"), "île");
        assert_eq!(normalize_text_fr("Un score d'1-1"), "score 1-1");
        assert_eq!(normalize_text_fr("L’Île-de-France !"), "île-de-france");
        assert_eq!(normalize_text_fr("  de   la  "), "");
        assert_eq!(normalize_text_fr("- 38 -"), "38");
    }

    #[test]
    fn f1_and_em() {
        assert!(exact_match("fièvre jaune", "la fièvre jaune"));
        assert_eq!(token_f1("fièvre jaune", "la fièvre jaune"), 1.0);
        assert_eq!(token_f1("Paris", "Lyon"), 0.0);
        assert_eq!(token_f1("", "la"), 1.0);
        assert_eq!(token_f1("Paris", "le"), 0.0);
    }
}
