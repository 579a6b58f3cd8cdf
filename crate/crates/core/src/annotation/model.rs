use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::squad::AnswerEntry;

pub type UserId = u64;
pub type LeaseId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Regular,
    Admin,
    SuperAdmin,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "regular" => Ok(Role::Regular),
            "admin" => Ok(Role::Admin),
            "superadmin" => Ok(Role::SuperAdmin),
            _ => Err(format!("unknown role `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContributorStatus {
    Open,
    Certified,
}

impl FromStr for ContributorStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(ContributorStatus::Open),
            "certified" => Ok(ContributorStatus::Certified),
            _ => Err(format!("unknown status `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub email: String,
    pub password_hash: String,
    pub role: Role,
    pub status: ContributorStatus,
    pub created_at: DateTime<Utc>,
    pub email_verified: bool,
    pub onboarding_passed: bool,
    pub onboarding_attempts: u32,
}

/// A user as exposed to clients: everything but the password hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: UserId,
    pub email: String,
    pub role: Role,
    pub status: ContributorStatus,
    pub created_at: DateTime<Utc>,
    pub email_verified: bool,
    pub onboarding_passed: bool,
}

impl User {
    pub fn profile(&self) -> UserProfile {
        UserProfile {
            id: self.id,
            email: self.email.clone(),
            role: self.role,
            status: self.status,
            created_at: self.created_at,
            email_verified: self.email_verified,
            onboarding_passed: self.onboarding_passed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenPurpose {
    Verification,
    PasswordReset,
}

/// Single-use emailed token. Only its SHA-256 is stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub hash: String,
    pub user_id: UserId,
    pub purpose: TokenPurpose,
    pub expires_at: DateTime<Utc>,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub user_id: UserId,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredParagraph {
    pub id: String,
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredArticle {
    pub title: String,
    pub category: Option<Category>,
    pub paragraphs: Vec<StoredParagraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParagraphView {
    pub id: String,
    pub article_title: String,
    pub category: Option<Category>,
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum LeaseTarget {
    Paragraph(String),
    Question(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lease {
    pub id: LeaseId,
    pub target: LeaseTarget,
    pub user_id: UserId,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub renewed: bool,
}

impl Lease {
    pub fn is_active(&self, now: DateTime<Utc>) -> bool {
        now < self.expires_at
    }
}

/// One question-answer pair of a submitted batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInput {
    pub question: String,
    pub answer: AnswerEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationBatch {
    pub paragraph_id: String,
    pub user_id: UserId,
    pub question_ids: Vec<String>,
    pub submitted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionStatus {
    Fresh,
    NeedsAnswers,
    Complete,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditionalAnswer {
    pub user_id: UserId,
    pub answer: AnswerEntry,
    pub submitted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagReason {
    Unanswerable,
    Ambiguous,
    Offensive,
}

impl FlagReason {
    pub const ALL: [FlagReason; 3] = [FlagReason::Unanswerable, FlagReason::Ambiguous, FlagReason::Offensive];

    pub fn as_str(&self) -> &'static str {
        match self {
            FlagReason::Unanswerable => "unanswerable",
            FlagReason::Ambiguous => "ambiguous",
            FlagReason::Offensive => "offensive",
        }
    }
}

impl fmt::Display for FlagReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlagReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        FlagReason::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown flag reason `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagRecord {
    pub question_id: String,
    pub user_id: UserId,
    pub reason: FlagReason,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionState {
    pub question_id: String,
    pub paragraph_id: String,
    pub author_id: UserId,
    pub question: String,
    pub original_answer: AnswerEntry,
    pub additional_answers: Vec<AdditionalAnswer>,
    pub flags: Vec<FlagRecord>,
    pub state: QuestionStatus,
    pub created_at: DateTime<Utc>,
}

impl QuestionState {
    pub fn contributors(&self) -> impl Iterator<Item = UserId> + '_ {
        std::iter::once(self.author_id).chain(self.additional_answers.iter().map(|a| a.user_id))
    }

    pub fn has_contributed(&self, user: UserId) -> bool {
        self.contributors().any(|u| u == user)
    }

    /// Two additional answers and three distinct contributors overall.
    pub fn meets_completion_rule(&self) -> bool {
        let mut ids: Vec<UserId> = self.contributors().collect();
        ids.sort_unstable();
        ids.dedup();
        self.additional_answers.len() == 2 && ids.len() == 3
    }

    /// Original answer first, additional answers in submission order.
    pub fn all_answers(&self) -> Vec<AnswerEntry> {
        std::iter::once(self.original_answer.clone())
            .chain(self.additional_answers.iter().map(|a| a.answer.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub at: DateTime<Utc>,
    pub actor_id: UserId,
    pub target_id: UserId,
    pub action: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributorStats {
    pub paragraphs_completed: usize,
    pub questions_written: usize,
    pub additional_answers: usize,
    pub flags: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditionalTask {
    pub paragraph: ParagraphView,
    pub question_id: String,
    pub question: String,
    pub lease: Lease,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReceipt {
    pub paragraph_id: String,
    pub question_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    #[serde(default)]
    pub only_complete: bool,
    #[serde(default)]
    pub include_flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSummary {
    pub articles_added: usize,
    pub paragraphs_added: usize,
    pub skipped_titles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: Category,
    pub articles: usize,
    pub paragraphs: usize,
    pub paragraphs_open: usize,
}
