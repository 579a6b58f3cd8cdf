//! SQuAD v1.1 data model: import with per-sample validation, canonical
//! export, and dataset merging.
//!
//! Canonical serialization is compact JSON with keys in a fixed order
//! (`version`, `data`; `title`, `paragraphs`; `context`, `qas`; `id`,
//! `question`, `answers`; `text`, `answer_start`). Two optional extension
//! keys are written only when set: `category` on articles and `provenance`
//! at the top level. `answer_start` counts Unicode scalar values.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::category::Category;
use crate::provenance::Provenance;
use crate::text::{char_len, char_slice};

pub const SQUAD_VERSION: &str = "1.1";
pub const MAX_QUESTION_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub version: String,
    pub data: Vec<ArticleEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset { version: SQUAD_VERSION.to_string(), data: Vec::new(), provenance: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleEntry {
    pub title: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub category: Option<Category>,
    pub paragraphs: Vec<ParagraphEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParagraphEntry {
    pub context: String,
    pub qas: Vec<QaEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaEntry {
    pub id: String,
    pub question: String,
    pub answers: Vec<AnswerEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub text: String,
    pub answer_start: usize,
}

impl Dataset {
    pub fn new(data: Vec<ArticleEntry>) -> Self {
        Dataset { data, ..Default::default() }
    }

    pub fn qas(&self) -> impl Iterator<Item = (&ArticleEntry, &ParagraphEntry, &QaEntry)> {
        self.data.iter().flat_map(|a| {
            a.paragraphs.iter().flat_map(move |p| p.qas.iter().map(move |q| (a, p, q)))
        })
    }

    pub fn qa_count(&self) -> usize {
        self.qas().count()
    }

    pub fn paragraph_count(&self) -> usize {
        self.data.iter().map(|a| a.paragraphs.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Violation {
    SpanMismatch,
    QuestionTooLong,
    EmptyAnswer,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::SpanMismatch => "SPAN_MISMATCH",
            Violation::QuestionTooLong => "QUESTION_TOO_LONG",
            Violation::EmptyAnswer => "EMPTY_ANSWER",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// True iff `context[answer_start .. answer_start + len(text)] == text`.
pub fn span_matches(context: &str, answer: &AnswerEntry) -> bool {
    char_slice(context, answer.answer_start, char_len(&answer.text)) == Some(answer.text.as_str())
}

/// Check one question against its context. A question without answers
/// reports `EMPTY_ANSWER`.
pub fn validate_sample(context: &str, qa: &QaEntry) -> Result<(), Vec<Violation>> {
    let mut violations = BTreeSet::new();
    if char_len(&qa.question) > MAX_QUESTION_CHARS {
        violations.insert(Violation::QuestionTooLong);
    }
    if qa.answers.is_empty() {
        violations.insert(Violation::EmptyAnswer);
    }
    for answer in &qa.answers {
        if answer.text.is_empty() {
            violations.insert(Violation::EmptyAnswer);
        } else if !span_matches(context, answer) {
            violations.insert(Violation::SpanMismatch);
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralIssue {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleIssue {
    pub qa_id: String,
    pub violations: Vec<Violation>,
}

/// Recoverable problems found while importing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub structural: Vec<StructuralIssue>,
    pub invalid_samples: Vec<SampleIssue>,
}

impl ImportReport {
    pub fn is_clean(&self) -> bool {
        self.structural.is_empty() && self.invalid_samples.is_empty()
    }

    pub fn is_invalid(&self, qa_id: &str) -> bool {
        self.invalid_samples.iter().any(|s| s.qa_id == qa_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExportRefusal {
    InvalidSample { qa_id: String, violations: Vec<Violation> },
    DuplicateQaId(String),
    DuplicateTitle(String),
    EmptyContext { title: String, paragraph: usize },
}

impl fmt::Display for ExportRefusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExportRefusal::InvalidSample { qa_id, violations } => {
                let codes: Vec<&str> = violations.iter().map(Violation::code).collect();
                write!(f, "qa `{qa_id}` violates {}", codes.join(", "))
            }
            ExportRefusal::DuplicateQaId(id) => write!(f, "duplicate qa id `{id}`"),
            ExportRefusal::DuplicateTitle(t) => write!(f, "duplicate article title `{t}`"),
            ExportRefusal::EmptyContext { title, paragraph } => {
                write!(f, "empty context in `{title}` paragraph {paragraph}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SquadError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a SQuAD document: {0}")]
    Shape(String),
    #[error("export refused: {0}")]
    Refused(ExportRefusal),
}

struct Walker {
    report: ImportReport,
}

impl Walker {
    fn issue(&mut self, path: String, message: impl Into<String>) {
        self.report.structural.push(StructuralIssue { path, message: message.into() });
    }

    fn string(&mut self, obj: &Value, key: &str, path: &str) -> Option<String> {
        match obj.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.issue(format!("{path}.{key}"), "expected a string");
                None
            }
            None => {
                self.issue(format!("{path}.{key}"), "missing");
                None
            }
        }
    }

    fn array<'v>(&mut self, obj: &'v Value, key: &str, path: &str) -> Option<&'v Vec<Value>> {
        match obj.get(key) {
            Some(Value::Array(a)) => Some(a),
            Some(_) => {
                self.issue(format!("{path}.{key}"), "expected an array");
                None
            }
            None => {
                self.issue(format!("{path}.{key}"), "missing");
                None
            }
        }
    }

    fn answer(&mut self, v: &Value, path: &str) -> Option<AnswerEntry> {
        if !v.is_object() {
            self.issue(path.to_string(), "expected an object");
            return None;
        }
        let text = self.string(v, "text", path);
        let start = match v.get("answer_start") {
            Some(Value::Number(n)) => match n.as_u64() {
                Some(s) => Some(s as usize),
                None => {
                    self.issue(format!("{path}.answer_start"), "expected a non-negative integer");
                    None
                }
            },
            Some(_) => {
                self.issue(format!("{path}.answer_start"), "expected a non-negative integer");
                None
            }
            None => {
                self.issue(format!("{path}.answer_start"), "missing");
                None
            }
        };
        Some(AnswerEntry { text: text?, answer_start: start? })
    }

    fn qa(&mut self, v: &Value, path: &str) -> Option<QaEntry> {
        if !v.is_object() {
            self.issue(path.to_string(), "expected an object");
            return None;
        }
        let id = self.string(v, "id", path);
        let question = self.string(v, "question", path);
        let answers = self.array(v, "answers", path).map(|items| {
            items
                .iter()
                .enumerate()
                .filter_map(|(i, a)| self.answer(a, &format!("{path}.answers[{i}]")))
                .collect::<Vec<_>>()
        });
        Some(QaEntry { id: id?, question: question?, answers: answers? })
    }

    fn paragraph(&mut self, v: &Value, path: &str) -> Option<ParagraphEntry> {
        if !v.is_object() {
            self.issue(path.to_string(), "expected an object");
            return None;
        }
        let context = self.string(v, "context", path);
        let qas = self.array(v, "qas", path).map(|items| {
            items
                .iter()
                .enumerate()
                .filter_map(|(i, q)| self.qa(q, &format!("{path}.qas[{i}]")))
                .collect::<Vec<_>>()
        });
        let context = context?;
        if context.is_empty() {
            self.issue(format!("{path}.context"), "empty context");
        }
        Some(ParagraphEntry { context, qas: qas.unwrap_or_default() })
    }

    fn article(&mut self, v: &Value, path: &str) -> Option<ArticleEntry> {
        if !v.is_object() {
            self.issue(path.to_string(), "expected an object");
            return None;
        }
        let title = self.string(v, "title", path);
        let category = match v.get("category") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => match s.parse::<Category>() {
                Ok(c) => Some(c),
                Err(e) => {
                    self.issue(format!("{path}.category"), e.to_string());
                    None
                }
            },
            Some(_) => {
                self.issue(format!("{path}.category"), "expected a string");
                None
            }
        };
        let paragraphs = self.array(v, "paragraphs", path).map(|items| {
            items
                .iter()
                .enumerate()
                .filter_map(|(i, p)| self.paragraph(p, &format!("{path}.paragraphs[{i}]")))
                .collect::<Vec<_>>()
        });
        Some(ArticleEntry { title: title?, category, paragraphs: paragraphs.unwrap_or_default() })
    }
}

/// Parse a SQuAD v1.1 file. Malformed JSON or a root that is not a SQuAD
/// document is fatal; everything else is collected into the report and the
/// offending element skipped. Samples violating the span invariant are kept
/// and listed as invalid.
pub fn import_squad(bytes: &[u8]) -> Result<(Dataset, ImportReport), SquadError> {
    let root: Value = serde_json::from_slice(bytes)?;
    if !root.is_object() {
        return Err(SquadError::Shape("root is not an object".into()));
    }
    let Some(Value::Array(articles)) = root.get("data") else {
        return Err(SquadError::Shape("`data` array missing".into()));
    };
    let mut walker = Walker { report: ImportReport::default() };
    let version = walker.string(&root, "version", "$").unwrap_or_else(|| SQUAD_VERSION.to_string());
    let provenance = match root.get("provenance") {
        None => None,
        Some(v) => match serde_json::from_value::<Provenance>(v.clone()) {
            Ok(p) => Some(p),
            Err(e) => {
                walker.issue("$.provenance".into(), e.to_string());
                None
            }
        },
    };
    let data: Vec<ArticleEntry> = articles
        .iter()
        .enumerate()
        .filter_map(|(i, a)| walker.article(a, &format!("$.data[{i}]")))
        .collect();

    let mut titles = HashSet::new();
    let mut ids = HashSet::new();
    for (ai, article) in data.iter().enumerate() {
        if !titles.insert(article.title.as_str()) {
            walker.issue(format!("$.data[{ai}].title"), format!("duplicate title `{}`", article.title));
        }
        for paragraph in &article.paragraphs {
            for qa in &paragraph.qas {
                if !ids.insert(qa.id.as_str()) {
                    walker.issue(format!("$.data[{ai}]"), format!("duplicate qa id `{}`", qa.id));
                }
                if let Err(violations) = validate_sample(&paragraph.context, qa) {
                    walker.report.invalid_samples.push(SampleIssue { qa_id: qa.id.clone(), violations });
                }
            }
        }
    }
    Ok((Dataset { version, data, provenance }, walker.report))
}

fn check_exportable(dataset: &Dataset) -> Result<(), ExportRefusal> {
    let mut titles = HashSet::new();
    let mut ids = HashSet::new();
    for article in &dataset.data {
        if !titles.insert(article.title.as_str()) {
            return Err(ExportRefusal::DuplicateTitle(article.title.clone()));
        }
        for (pi, paragraph) in article.paragraphs.iter().enumerate() {
            if paragraph.context.is_empty() {
                return Err(ExportRefusal::EmptyContext { title: article.title.clone(), paragraph: pi });
            }
            for qa in &paragraph.qas {
                if !ids.insert(qa.id.as_str()) {
                    return Err(ExportRefusal::DuplicateQaId(qa.id.clone()));
                }
                validate_sample(&paragraph.context, qa).map_err(|violations| {
                    ExportRefusal::InvalidSample { qa_id: qa.id.clone(), violations }
                })?;
            }
        }
    }
    Ok(())
}

/// Canonical bytes for `dataset`, refusing any dataset that breaks an
/// invariant.
pub fn export_squad(dataset: &Dataset) -> Result<Vec<u8>, SquadError> {
    check_exportable(dataset).map_err(SquadError::Refused)?;
    Ok(serde_json::to_vec(dataset)?)
}

/// Concatenate datasets, optionally shuffling article order with a seeded
/// generator. Qa ids are prefixed with a per-source tag (`s0-`, `s1-`, ...);
/// titles that collide with an earlier part get the tag appended.
pub fn merge_datasets(parts: &[Dataset], shuffle_seed: Option<u64>) -> (Dataset, Vec<String>) {
    let mut warnings = Vec::new();
    let mut titles = HashSet::new();
    let mut data = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let tag = format!("s{i}");
        for article in &part.data {
            let mut article = article.clone();
            if !titles.insert(article.title.clone()) {
                let renamed = format!("{} [{tag}]", article.title);
                let message = format!("duplicate title `{}` renamed to `{renamed}`", article.title);
                log::warn!("{message}");
                warnings.push(message);
                article.title = renamed;
                titles.insert(article.title.clone());
            }
            for paragraph in &mut article.paragraphs {
                for qa in &mut paragraph.qas {
                    qa.id = format!("{tag}-{}", qa.id);
                }
            }
            data.push(article);
        }
    }
    if let Some(seed) = shuffle_seed {
        data.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    (Dataset::new(data), warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa(id: &str, question: &str, answers: &[(&str, usize)]) -> QaEntry {
        QaEntry {
            id: id.into(),
            question: question.into(),
            answers: answers.iter().map(|(t, s)| AnswerEntry { text: t.to_string(), answer_start: *s }).collect(),
        }
    }

    fn dataset(title: &str, context: &str, qas: Vec<QaEntry>) -> Dataset {
        Dataset::new(vec![ArticleEntry {
            title: title.into(),
            category: None,
            paragraphs: vec![ParagraphEntry { context: context.into(), qas }],
        }])
    }

    const CTX: &str = "Paris est la capitale de la France.";

    #[test]
    fn minimal_file_imports() {
        let json = br#"{"version":"1.1","data":[{"title":"Paris","paragraphs":[{"context":"Texte.","qas":[]}]}]}"#;
        let (d, report) = import_squad(json).unwrap();
        assert_eq!(d.data.len(), 1);
        assert!(report.is_clean());
    }

    #[test]
    fn off_by_one_flagged_but_loaded() {
        let d = dataset("Paris", CTX, vec![qa("q1", "Quoi ?", &[("la capitale", 11)])]);
        let bytes = serde_json::to_vec(&d).unwrap();
        let (loaded, report) = import_squad(&bytes).unwrap();
        assert_eq!(loaded.qa_count(), 1);
        assert!(report.structural.is_empty());
        assert_eq!(report.invalid_samples, [SampleIssue { qa_id: "q1".into(), violations: vec![Violation::SpanMismatch] }]);
    }

    #[test]
    fn malformed_json_is_fatal() {
        assert!(matches!(import_squad(b"{\"data\": ["), Err(SquadError::Json(_))));
        assert!(matches!(import_squad(b"[]"), Err(SquadError::Shape(_))));
    }

    #[test]
    fn structural_problems_are_collected() {
        let json = br#"{"version":"1.1","data":[{"title":"A","paragraphs":[{"context":"abc","qas":[{"id":"x","question":"q","answers":[{"text":"a"}]}]}]},{"paragraphs":[]}]}"#;
        let (d, report) = import_squad(json).unwrap();
        assert_eq!(d.data.len(), 1);
        let paths: Vec<&str> = report.structural.iter().map(|s| s.path.as_str()).collect();
        assert_eq!(paths, ["$.data[0].paragraphs[0].qas[0].answers[0].answer_start", "$.data[1].title"]);
    }

    #[test]
    fn validate_sample_cases() {
        assert_eq!(validate_sample(CTX, &qa("a", "Quelle ville ?", &[("la capitale", 10)])), Ok(()));
        assert_eq!(
            validate_sample(CTX, &qa("a", "Quelle ville ?", &[("la capitale", 9)])),
            Err(vec![Violation::SpanMismatch])
        );
        let long = "q".repeat(201);
        assert_eq!(
            validate_sample(CTX, &qa("a", &long, &[("Paris", 0)])),
            Err(vec![Violation::QuestionTooLong])
        );
        assert_eq!(validate_sample(CTX, &qa("a", &"q".repeat(200), &[("Paris", 0)])), Ok(()));
        assert_eq!(validate_sample(CTX, &qa("a", "q", &[("", 0)])), Err(vec![Violation::EmptyAnswer]));
        assert_eq!(validate_sample(CTX, &qa("a", "q", &[])), Err(vec![Violation::EmptyAnswer]));
    }

    #[test]
    fn offsets_count_scalar_values() {
        let ctx = "Événement à Noël : la fête.";
        assert_eq!(validate_sample(ctx, &qa("a", "q", &[("Noël", 12)])), Ok(()));
    }

    #[test]
    fn empty_dataset_exports_canonically() {
        assert_eq!(export_squad(&Dataset::default()).unwrap(), br#"{"version":"1.1","data":[]}"#);
    }

    #[test]
    fn export_key_order() {
        let d = dataset("Paris", CTX, vec![qa("q1", "Quoi ?", &[("Paris", 0)])]);
        let text = String::from_utf8(export_squad(&d).unwrap()).unwrap();
        assert_eq!(
            text,
            r#"{"version":"1.1","data":[{"title":"Paris","paragraphs":[{"context":"Paris est la capitale de la France.","qas":[{"id":"q1","question":"Quoi ?","answers":[{"text":"Paris","answer_start":0}]}]}]}]}"#
        );
    }

    #[test]
    fn export_refuses_duplicates_and_bad_spans() {
        let d = dataset("Paris", CTX, vec![qa("q1", "a", &[("Paris", 0)]), qa("q1", "b", &[("Paris", 0)])]);
        assert!(matches!(export_squad(&d), Err(SquadError::Refused(ExportRefusal::DuplicateQaId(id))) if id == "q1"));
        let d = dataset("Paris", CTX, vec![qa("q7", "a", &[("Paris", 1)])]);
        assert!(matches!(export_squad(&d), Err(SquadError::Refused(ExportRefusal::InvalidSample { qa_id, .. })) if qa_id == "q7"));
    }

    #[test]
    fn merge_concatenates_and_prefixes() {
        let a = dataset("A", CTX, vec![qa("1", "q", &[("Paris", 0)])]);
        let b = dataset("B", CTX, vec![qa("1", "q", &[("Paris", 0)])]);
        let (m, warnings) = merge_datasets(&[a, b], None);
        assert!(warnings.is_empty());
        let titles: Vec<&str> = m.data.iter().map(|x| x.title.as_str()).collect();
        assert_eq!(titles, ["A", "B"]);
        let ids: Vec<&str> = m.qas().map(|(_, _, q)| q.id.as_str()).collect();
        assert_eq!(ids, ["s0-1", "s1-1"]);
        export_squad(&m).unwrap();
    }

    #[test]
    fn merge_renames_duplicate_titles() {
        let a = dataset("A", CTX, vec![]);
        let (m, warnings) = merge_datasets(&[a.clone(), a], None);
        assert_eq!(m.data[1].title, "A [s1]");
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn merge_seed_is_deterministic() {
        let parts: Vec<Dataset> = (0..6).map(|i| dataset(&format!("T{i}"), CTX, vec![])).collect();
        let (x, _) = merge_datasets(&parts, Some(3));
        let (y, _) = merge_datasets(&parts, Some(3));
        assert_eq!(x, y);
    }
}
