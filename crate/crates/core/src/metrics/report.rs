//! Dataset-level histograms of lexical variation and syntactic divergence.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::squad::Dataset;
use crate::text::{char_len, CharSpan};

use super::conllu::ParsePair;
use super::divergence::{syntactic_divergence, DivergenceSkip};
use super::lexical::{content_overlap, variation_bin, Stopwords};
use super::sentence::answer_sentence;

pub const LEXICAL_BINS: usize = 10;
const UNCATEGORIZED: &str = "Uncategorized";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SkipReason {
    /// No answer, or an answer span outside the context.
    NoAnswer,
    MissingParse,
    /// The sentence parse does not cover the answer sentence.
    ParseMismatch,
    NoWhWord,
    NoAnchor,
    NoAnswerHead,
}

impl From<DivergenceSkip> for SkipReason {
    fn from(s: DivergenceSkip) -> Self {
        match s {
            DivergenceSkip::NoWhWord => SkipReason::NoWhWord,
            DivergenceSkip::NoAnchor => SkipReason::NoAnchor,
            DivergenceSkip::NoAnswerHead => SkipReason::NoAnswerHead,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCount {
    pub value: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalHistogram {
    pub evaluated: usize,
    pub bins: Vec<HistogramBin>,
    pub skipped: BTreeMap<SkipReason, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceHistogram {
    pub evaluated: usize,
    /// One entry per integer value from 0 to the maximum observed.
    pub counts: Vec<ValueCount>,
    pub skipped: BTreeMap<SkipReason, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub sample_count: usize,
    pub lexical_bins: Vec<usize>,
    pub lexical_skipped: usize,
    pub divergence_counts: Vec<usize>,
    pub divergence_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub qa_id: String,
    pub category: String,
    pub lexical_variation: Option<f64>,
    pub lexical_skip: Option<SkipReason>,
    pub syntactic_divergence: Option<usize>,
    pub divergence_skip: Option<SkipReason>,
    pub question_path: Option<Vec<String>>,
    pub sentence_path: Option<Vec<String>>,
    #[serde(skip)]
    lexical_bin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sample_count: usize,
    pub lexical_variation: LexicalHistogram,
    pub syntactic_divergence: DivergenceHistogram,
    pub per_category: BTreeMap<String, CategoryMetrics>,
    pub samples: Vec<SampleMetrics>,
}

fn measure(
    category: String,
    context: &str,
    qa: &crate::squad::QaEntry,
    parses: &BTreeMap<String, ParsePair>,
    stopwords: &Stopwords,
) -> SampleMetrics {
    let mut m = SampleMetrics {
        qa_id: qa.id.clone(),
        category,
        lexical_variation: None,
        lexical_skip: None,
        syntactic_divergence: None,
        divergence_skip: None,
        question_path: None,
        sentence_path: None,
        lexical_bin: None,
    };
    let located = qa.answers.first().and_then(|a| {
        let len = char_len(&a.text);
        answer_sentence(context, a.answer_start, len).ok().map(|(s, span)| (s, span, a.answer_start, len))
    });
    let Some((sentence, span, start, len)) = located else {
        m.lexical_skip = Some(SkipReason::NoAnswer);
        m.divergence_skip = Some(SkipReason::NoAnswer);
        return m;
    };

    let (shared, total) = content_overlap(&qa.question, &sentence, stopwords);
    m.lexical_variation = Some(if total == 0 { 0.0 } else { 1.0 - shared as f64 / total as f64 });
    m.lexical_bin = Some(variation_bin(shared, total, LEXICAL_BINS));

    let pair = parses.get(&qa.id);
    let (Some(q), Some(s)) = (pair.and_then(|p| p.question.as_ref()), pair.and_then(|p| p.sentence.as_ref())) else {
        m.divergence_skip = Some(SkipReason::MissingParse);
        return m;
    };
    if s.text != sentence {
        m.divergence_skip = Some(SkipReason::ParseMismatch);
        return m;
    }
    let local = CharSpan::new(start.saturating_sub(span.start), (start + len).min(span.end) - span.start);
    match syntactic_divergence(q, s, local, stopwords) {
        Ok(d) => {
            m.syntactic_divergence = Some(d.distance);
            m.question_path = Some(d.question_path.iter().map(ToString::to_string).collect());
            m.sentence_path = Some(d.sentence_path.iter().map(ToString::to_string).collect());
        }
        Err(skip) => m.divergence_skip = Some(skip.into()),
    }
    m
}

/// Compute both metrics for every question (first answer), then bin them.
/// Each metric's bin counts plus its skipped counts equal the question count.
pub fn dataset_report(dataset: &Dataset, parses: &BTreeMap<String, ParsePair>, stopwords: &Stopwords) -> MetricsReport {
    let items: Vec<_> = dataset
        .data
        .iter()
        .flat_map(|a| {
            let cat = a.category.map_or(UNCATEGORIZED.to_string(), |c| c.to_string());
            a.paragraphs
                .iter()
                .flat_map(|p| p.qas.iter().map(move |q| (p.context.as_str(), q)))
                .map(move |(ctx, q)| (cat.clone(), ctx, q))
        })
        .collect();
    let samples: Vec<SampleMetrics> =
        items.into_par_iter().map(|(cat, ctx, qa)| measure(cat, ctx, qa, parses, stopwords)).collect();

    let max_div = samples.iter().filter_map(|s| s.syntactic_divergence).max();
    let div_len = max_div.map_or(0, |m| m + 1);
    let mut lex_counts = vec![0usize; LEXICAL_BINS];
    let mut div_counts = vec![0usize; div_len];
    let mut lex_skipped = BTreeMap::new();
    let mut div_skipped = BTreeMap::new();
    let mut per_category: BTreeMap<String, CategoryMetrics> = BTreeMap::new();
    for s in &samples {
        let cat = per_category.entry(s.category.clone()).or_insert_with(|| CategoryMetrics {
            sample_count: 0,
            lexical_bins: vec![0; LEXICAL_BINS],
            lexical_skipped: 0,
            divergence_counts: vec![0; div_len],
            divergence_skipped: 0,
        });
        cat.sample_count += 1;
        match (s.lexical_bin, s.lexical_skip) {
            (Some(b), _) => {
                lex_counts[b] += 1;
                cat.lexical_bins[b] += 1;
            }
            (None, reason) => {
                *lex_skipped.entry(reason.unwrap_or(SkipReason::NoAnswer)).or_insert(0) += 1;
                cat.lexical_skipped += 1;
            }
        }
        match (s.syntactic_divergence, s.divergence_skip) {
            (Some(d), _) => {
                div_counts[d] += 1;
                cat.divergence_counts[d] += 1;
            }
            (None, reason) => {
                *div_skipped.entry(reason.unwrap_or(SkipReason::MissingParse)).or_insert(0) += 1;
                cat.divergence_skipped += 1;
            }
        }
    }
    let width = 1.0 / LEXICAL_BINS as f64;
    MetricsReport {
        sample_count: samples.len(),
        lexical_variation: LexicalHistogram {
            evaluated: lex_counts.iter().sum(),
            bins: lex_counts
                .iter()
                .enumerate()
                .map(|(i, &count)| HistogramBin { lower: i as f64 * width, upper: (i + 1) as f64 * width, count })
                .collect(),
            skipped: lex_skipped,
        },
        syntactic_divergence: DivergenceHistogram {
            evaluated: div_counts.iter().sum(),
            counts: div_counts.iter().enumerate().map(|(value, &count)| ValueCount { value, count }).collect(),
            skipped: div_skipped,
        },
        per_category,
        samples,
    }
}

impl MetricsReport {
    /// Histogram data for external plotting: `metric,bin,lower,upper,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,bin,lower,upper,count\n");
        for (i, b) in self.lexical_variation.bins.iter().enumerate() {
            out.push_str(&format!("lexical_variation,{i},{:.1},{:.1},{}\n", b.lower, b.upper, b.count));
        }
        for v in &self.syntactic_divergence.counts {
            out.push_str(&format!("syntactic_divergence,{},{},{},{}\n", v.value, v.value, v.value, v.count));
        }
        out
    }
}
