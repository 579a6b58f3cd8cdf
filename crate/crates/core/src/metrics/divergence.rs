//! Syntactic divergence: edit distance between the unlexicalized dependency
//! path from the wh-word to an anchor word in the question and the path from
//! that anchor to the answer head in the answer sentence.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::CharSpan;

use super::conllu::DepParse;
use super::lexical::Stopwords;

pub const WH_WORDS: &[&str] =
    &["qui", "que", "quoi", "quel", "quelle", "quels", "quelles", "où", "quand", "comment", "pourquoi", "combien"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

/// One step of a dependency path: a relation label and the direction taken.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub label: String,
    pub direction: Direction,
}

impl PathStep {
    pub fn up(label: &str) -> Self {
        PathStep { label: label.into(), direction: Direction::Up }
    }

    pub fn down(label: &str) -> Self {
        PathStep { label: label.into(), direction: Direction::Down }
    }
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.direction {
            Direction::Up => '↑',
            Direction::Down => '↓',
        };
        write!(f, "{}{}", self.label, arrow)
    }
}

/// Unit-cost Levenshtein distance, two-row dynamic program.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Path from token `from` to token `to`: the relation of each node left on
/// the way up to the lowest common ancestor, then of each node entered on
/// the way down.
pub fn dependency_path(parse: &DepParse, from: usize, to: usize) -> Vec<PathStep> {
    let up = parse.ancestors(from);
    let down = parse.ancestors(to);
    let lca = up.iter().copied().find(|n| down.contains(n)).expect("single-rooted tree");
    let mut path: Vec<PathStep> =
        up.iter().take_while(|&&n| n != lca).map(|&n| PathStep::up(&parse.tokens[n].deprel)).collect();
    let descent: Vec<usize> = down.iter().copied().take_while(|&n| n != lca).collect();
    path.extend(descent.iter().rev().map(|&n| PathStep::down(&parse.tokens[n].deprel)));
    path
}

fn lower(form: &str) -> String {
    form.to_lowercase()
}

/// First question token that is a wh-word, or the elided `qu'`.
pub fn find_wh_word(question: &DepParse) -> Option<usize> {
    question.tokens.iter().position(|t| {
        let f = lower(&t.form);
        WH_WORDS.contains(&f.as_str()) || f == "qu'" || f == "qu’"
    })
}

/// First content word of the question, in order, whose form also occurs in
/// the sentence. Returns `(question token, sentence token)`.
pub fn find_anchor(question: &DepParse, sentence: &DepParse, stopwords: &Stopwords) -> Option<(usize, usize)> {
    question.tokens.iter().enumerate().find_map(|(qi, t)| {
        let f = lower(&t.form);
        let content = f.chars().any(char::is_alphanumeric) && !stopwords.contains(&f) && !WH_WORDS.contains(&f.as_str());
        if !content {
            return None;
        }
        let si = sentence.tokens.iter().position(|s| lower(&s.form) == f)?;
        Some((qi, si))
    })
}

/// Token of the answer span whose head lies outside the span. Spans are in
/// the sentence parse's own character coordinates.
pub fn answer_head(sentence: &DepParse, answer: CharSpan) -> Option<usize> {
    let inside: Vec<usize> = sentence
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.start < answer.end && answer.start < t.end)
        .map(|(i, _)| i)
        .collect();
    inside.iter().copied().find(|&i| sentence.parent(i).map_or(true, |p| !inside.contains(&p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DivergenceSkip {
    NoWhWord,
    NoAnchor,
    NoAnswerHead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub question_path: Vec<PathStep>,
    pub sentence_path: Vec<PathStep>,
    pub distance: usize,
}

pub fn syntactic_divergence(
    question: &DepParse,
    sentence: &DepParse,
    answer: CharSpan,
    stopwords: &Stopwords,
) -> Result<Divergence, DivergenceSkip> {
    let wh = find_wh_word(question).ok_or(DivergenceSkip::NoWhWord)?;
    let (q_anchor, s_anchor) = find_anchor(question, sentence, stopwords).ok_or(DivergenceSkip::NoAnchor)?;
    let head = answer_head(sentence, answer).ok_or(DivergenceSkip::NoAnswerHead)?;
    let question_path = dependency_path(question, wh, q_anchor);
    let sentence_path = dependency_path(sentence, s_anchor, head);
    let distance = edit_distance(&question_path, &sentence_path);
    Ok(Divergence { question_path, sentence_path, distance })
}
