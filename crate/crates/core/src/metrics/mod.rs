//! Dataset analysis: lexical variation, syntactic divergence, answer
//! evaluation and reasoning-type assessment.

pub mod assess;
pub mod conllu;
pub mod divergence;
pub mod eval;
pub mod lexical;
pub mod report;
pub mod sentence;

pub use assess::{label_report, sample_for_assessment, AssessmentLabel, AssessmentSample, LabelReport, LabelShare};
pub use conllu::{parse_conllu, DepParse, DepToken, ParsePair};
pub use divergence::{
    dependency_path, edit_distance, syntactic_divergence, Direction, Divergence, DivergenceSkip, PathStep, WH_WORDS,
};
pub use eval::{evaluate_predictions, exact_match, normalize_text_fr, token_f1, EvalScores, QuestionScore};
pub use lexical::{content_overlap, content_tokens, lexical_variation, variation_bin, Stopwords};
pub use report::{dataset_report, MetricsReport, SkipReason, LEXICAL_BINS};
pub use sentence::{answer_sentence, sentence_spans};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("answer span {start}+{len} outside context of {context_len} characters")]
    SpanOutOfRange { start: usize, len: usize, context_len: usize },
    #[error("CoNLL-U line {line}: {message}")]
    Conllu { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
