//! Lexical variation: how little of the question's content vocabulary the
//! answer sentence reuses.

use std::collections::{BTreeSet, HashSet};

use crate::text::{char_slice, word_spans};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn french() -> Self {
        Self::parse(include_str!("../../data/stopwords_fr.txt"))
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercased words of `text` that are not stopwords. Diacritics are kept.
pub fn content_tokens(text: &str, stopwords: &Stopwords) -> BTreeSet<String> {
    word_spans(text)
        .into_iter()
        .filter_map(|w| char_slice(text, w.start, w.len()))
        .map(str::to_lowercase)
        .filter(|w| !stopwords.contains(w))
        .collect()
}

/// `(shared, total)`: content tokens of the question also in the sentence,
/// and all content tokens of the question.
pub fn content_overlap(question: &str, sentence: &str, stopwords: &Stopwords) -> (usize, usize) {
    let q = content_tokens(question, stopwords);
    let s = content_tokens(sentence, stopwords);
    (q.intersection(&s).count(), q.len())
}

/// `1 - |C(q) ∩ C(s)| / |C(q)|`, or 0 when the question has no content token.
pub fn lexical_variation(question: &str, sentence: &str, stopwords: &Stopwords) -> f64 {
    match content_overlap(question, sentence, stopwords) {
        (_, 0) => 0.0,
        (shared, total) => 1.0 - shared as f64 / total as f64,
    }
}

/// Bin of `1 - shared/total` among `bins` uniform bins over [0, 1], computed
/// exactly. The value 1 falls in the last bin.
pub fn variation_bin(shared: usize, total: usize, bins: usize) -> usize {
    if total == 0 {
        return 0;
    }
    ((bins * (total - shared)) / total).min(bins - 1)
}
