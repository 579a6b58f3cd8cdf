//! Multiple-choice assessment taken before annotating.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentQuestion {
    pub id: String,
    pub text: String,
    pub choices: Vec<String>,
    /// Index into `choices`.
    pub answer: usize,
    #[serde(default = "yes")]
    pub mandatory: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub version: u32,
    pub questions: Vec<AssessmentQuestion>,
}

/// What a contributor sees: the questions without the key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublicQuestion<'a> {
    pub id: &'a str,
    pub text: &'a str,
    pub choices: &'a [String],
    pub mandatory: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentOutcome {
    pub passed: bool,
    /// Mandatory questions answered wrongly or not at all.
    pub failed_questions: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum AssessmentError {
    #[error("cannot read assessment: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid assessment: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid assessment: {0}")]
    Invalid(String),
}

impl Assessment {
    pub fn from_json(bytes: &[u8]) -> Result<Self, AssessmentError> {
        let a: Assessment = serde_json::from_slice(bytes)?;
        a.validate()?;
        Ok(a)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AssessmentError> {
        Self::from_json(&std::fs::read(path)?)
    }

    pub fn validate(&self) -> Result<(), AssessmentError> {
        let mut seen = HashSet::new();
        for q in &self.questions {
            if !seen.insert(q.id.as_str()) {
                return Err(AssessmentError::Invalid(format!("duplicate question id `{}`", q.id)));
            }
            if q.answer >= q.choices.len() {
                return Err(AssessmentError::Invalid(format!("answer key of `{}` is out of range", q.id)));
            }
        }
        Ok(())
    }

    pub fn public_questions(&self) -> Vec<PublicQuestion<'_>> {
        self.questions
            .iter()
            .map(|q| PublicQuestion { id: &q.id, text: &q.text, choices: &q.choices, mandatory: q.mandatory })
            .collect()
    }

    /// Grade a set of `question id → choice index` answers. Unknown ids are
    /// returned as an error. Optional questions never affect the outcome.
    pub fn grade(&self, answers: &BTreeMap<String, usize>) -> Result<AssessmentOutcome, String> {
        if let Some(unknown) = answers.keys().find(|id| !self.questions.iter().any(|q| &q.id == *id)) {
            return Err(unknown.clone());
        }
        let failed_questions: Vec<String> = self
            .questions
            .iter()
            .filter(|q| q.mandatory && answers.get(&q.id) != Some(&q.answer))
            .map(|q| q.id.clone())
            .collect();
        Ok(AssessmentOutcome { passed: failed_questions.is_empty(), failed_questions })
    }
}

impl Default for Assessment {
    /// A short built-in assessment on the annotation guidelines.
    fn default() -> Self {
        let q = |id: &str, text: &str, choices: &[&str], answer: usize| AssessmentQuestion {
            id: id.into(),
            text: text.into(),
            choices: choices.iter().map(|c| c.to_string()).collect(),
            answer,
            mandatory: true,
        };
        Assessment {
            version: 1,
            questions: vec![
                q(
                    "pairs",
                    "Combien de paires question-réponse faut-il écrire par paragraphe ?",
                    &["Une", "Trois", "Cinq"],
                    2,
                ),
                q(
                    "span",
                    "La réponse doit être :",
                    &["Un passage du paragraphe, mot entier", "Une reformulation libre", "Un seul caractère"],
                    0,
                ),
                q(
                    "copy",
                    "Peut-on recopier une phrase du paragraphe comme question ?",
                    &["Oui", "Non, il faut reformuler"],
                    1,
                ),
            ],
        }
    }
}
