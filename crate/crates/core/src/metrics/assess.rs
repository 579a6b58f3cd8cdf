//! Sampling triplets for manual reasoning-type assessment and tallying the
//! assigned labels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::squad::{AnswerEntry, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssessmentLabel {
    Synonymy,
    WorldKnowledge,
    SyntacticVariation,
    MultiSentenceReasoning,
    Ambiguous,
}

impl AssessmentLabel {
    pub const ALL: [AssessmentLabel; 5] = [
        AssessmentLabel::Synonymy,
        AssessmentLabel::WorldKnowledge,
        AssessmentLabel::SyntacticVariation,
        AssessmentLabel::MultiSentenceReasoning,
        AssessmentLabel::Ambiguous,
    ];

    pub fn display_name(&self) -> &'static str {
        match self {
            AssessmentLabel::Synonymy => "Synonymy",
            AssessmentLabel::WorldKnowledge => "World knowledge",
            AssessmentLabel::SyntacticVariation => "Syntactic variation",
            AssessmentLabel::MultiSentenceReasoning => "Multi sentence reasoning",
            AssessmentLabel::Ambiguous => "Ambiguous",
        }
    }
}

impl fmt::Display for AssessmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for AssessmentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        AssessmentLabel::ALL
            .into_iter()
            .find(|l| l.display_name().replace(' ', "").to_lowercase() == key)
            .ok_or_else(|| format!("unknown assessment label `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentSample {
    pub article_title: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub category: Option<Category>,
    pub qa_id: String,
    pub question: String,
    pub answer: Option<AnswerEntry>,
    /// Filled in by the assessor; at least one label once assessed.
    #[serde(default)]
    pub labels: Vec<AssessmentLabel>,
}

/// One question per article, chosen by a seeded generator. Articles without
/// questions are skipped with a warning.
pub fn sample_for_assessment(dataset: &Dataset, seed: u64) -> (Vec<AssessmentSample>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for article in &dataset.data {
        let qas: Vec<_> = article.paragraphs.iter().flat_map(|p| &p.qas).collect();
        if qas.is_empty() {
            warnings.push(format!("article `{}` has no question; skipped", article.title));
            continue;
        }
        let qa = qas[rng.gen_range(0..qas.len())];
        out.push(AssessmentSample {
            article_title: article.title.clone(),
            category: article.category,
            qa_id: qa.id.clone(),
            question: qa.question.clone(),
            answer: qa.answers.first().cloned(),
            labels: Vec::new(),
        });
    }
    (out, warnings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelShare {
    pub label: AssessmentLabel,
    pub count: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub assessed: usize,
    pub unassessed: usize,
    /// Multi-label, so percentages may sum past 100.
    pub shares: Vec<LabelShare>,
}

pub fn label_report(samples: &[AssessmentSample]) -> LabelReport {
    let assessed: Vec<&AssessmentSample> = samples.iter().filter(|s| !s.labels.is_empty()).collect();
    let mut counts: BTreeMap<AssessmentLabel, usize> = BTreeMap::new();
    for s in &assessed {
        let mut labels = s.labels.clone();
        labels.sort();
        labels.dedup();
        for l in labels {
            *counts.entry(l).or_default() += 1;
        }
    }
    let n = assessed.len();
    let shares = AssessmentLabel::ALL
        .into_iter()
        .map(|label| {
            let count = counts.get(&label).copied().unwrap_or(0);
            let percentage = if n == 0 { 0.0 } else { 100.0 * count as f64 / n as f64 };
            LabelShare { label, count, percentage }
        })
        .collect();
    LabelReport { assessed: n, unassessed: samples.len() - n, shares }
}

impl LabelReport {
    pub fn to_table(&self) -> String {
        let mut out = format!("Reasoning\tCount\tPercentage\t(N={})\n", self.assessed);
        for s in &self.shares {
            out.push_str(&format!("{}\t{}\t{:.2} %\n", s.label, s.count, s.percentage));
        }
        out
    }
}
