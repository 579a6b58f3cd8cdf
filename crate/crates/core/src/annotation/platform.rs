use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, OnceLock};

use chrono::{DateTime, Duration, Utc};
use sha2::{Digest, Sha256};

use super::clock::{Clock, SystemClock};
use super::error::{fail, AnnotationError, ErrorCode};
use super::mailer::{LogMailer, Mail, MailKind, Mailer};
use super::model::*;
use super::monitoring::{monitoring_rows, category_totals, MonitoringPage};
use super::onboarding::{Assessment, AssessmentOutcome};
use super::password::PasswordHasher;
use super::store::{State, Store};
use crate::category::Category;
use crate::curate::paragraph_id;
use crate::squad::{span_matches, AnswerEntry, ArticleEntry, Dataset, ParagraphEntry, QaEntry, MAX_QUESTION_CHARS};
use crate::text::{char_len, is_word_aligned};

pub const BATCH_SIZE: usize = 5;
pub const ADDITIONAL_ANSWERS_REQUIRED: usize = 2;
pub const MIN_PASSWORD_CHARS: usize = 8;

#[derive(Debug, Clone)]
pub struct PlatformSettings {
    pub lease_ttl: Duration,
    pub session_ttl: Duration,
    pub verification_ttl: Duration,
    pub reset_ttl: Duration,
    /// Whether Open (non-certified) contributors may lease paragraphs.
    pub allow_open_annotation: bool,
}

impl Default for PlatformSettings {
    fn default() -> Self {
        PlatformSettings {
            lease_ttl: Duration::minutes(30),
            session_ttl: Duration::hours(24),
            verification_ttl: Duration::hours(48),
            reset_ttl: Duration::hours(1),
            allow_open_annotation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuedSession {
    pub token: String,
    pub expires_at: DateTime<Utc>,
    pub user: UserProfile,
}

pub struct Platform {
    store: Store,
    clock: Arc<dyn Clock>,
    mailer: Arc<dyn Mailer>,
    hasher: PasswordHasher,
    dummy_hash: OnceLock<String>,
    settings: PlatformSettings,
    assessment: Assessment,
}

fn new_token() -> String {
    hex::encode(rand::random::<[u8; 32]>())
}

fn token_hash(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn normalize_email(email: &str) -> Result<String, AnnotationError> {
    let email = email.trim().to_lowercase();
    let valid = match email.split_once('@') {
        Some((local, domain)) => {
            !local.is_empty() && domain.contains('.') && !domain.starts_with('.') && !domain.contains('@')
        }
        None => false,
    };
    if !valid || email.chars().any(char::is_whitespace) {
        return fail(ErrorCode::InvalidEmail, format!("`{email}` is not an email address"));
    }
    Ok(email)
}

fn user<'s>(s: &'s State, id: UserId) -> Result<&'s User, AnnotationError> {
    s.users.get(&id).ok_or_else(|| AnnotationError::new(ErrorCode::Unauthenticated, "unknown user"))
}

/// Check an answer span against its paragraph text.
pub fn validate_answer(context: &str, answer: &AnswerEntry) -> Result<(), AnnotationError> {
    if answer.text.is_empty() {
        return fail(ErrorCode::EmptyAnswer, "answer is empty");
    }
    if !span_matches(context, answer) {
        return fail(ErrorCode::SpanMismatch, "answer text does not match the paragraph at answer_start");
    }
    if !is_word_aligned(context, answer.answer_start, char_len(&answer.text)) {
        return fail(ErrorCode::SpanNotWordAligned, "answer must start and end on word boundaries");
    }
    Ok(())
}

pub fn validate_pair(context: &str, pair: &PairInput) -> Result<(), AnnotationError> {
    if pair.question.trim().is_empty() {
        return fail(ErrorCode::InvalidInput, "question is empty");
    }
    if char_len(&pair.question) > MAX_QUESTION_CHARS {
        return fail(
            ErrorCode::QuestionTooLong,
            format!("question has {} characters, the limit is {MAX_QUESTION_CHARS}", char_len(&pair.question)),
        );
    }
    validate_answer(context, &pair.answer)
}

/// Held, unexpired lease of `user` on `target`.
fn held_lease(s: &State, user: UserId, target: &LeaseTarget, now: DateTime<Utc>) -> Result<LeaseId, AnnotationError> {
    let lease = s
        .leases
        .values()
        .filter(|l| l.user_id == user && &l.target == target)
        .max_by_key(|l| l.id)
        .ok_or_else(|| AnnotationError::new(ErrorCode::LeaseNotHeld, "no lease held on this task"))?;
    if !lease.is_active(now) {
        return fail(ErrorCode::LeaseExpired, "lease has expired");
    }
    Ok(lease.id)
}

fn leased_by_others(s: &State, user: UserId, now: DateTime<Utc>) -> HashSet<LeaseTarget> {
    s.leases.values().filter(|l| l.user_id != user && l.is_active(now)).map(|l| l.target.clone()).collect()
}

fn issue_lease(s: &mut State, user: UserId, target: LeaseTarget, now: DateTime<Utc>, ttl: Duration) -> Lease {
    // one task per contributor: requesting new work abandons the previous lease
    s.leases.retain(|_, l| l.user_id != user);
    s.next_lease_id += 1;
    let lease = Lease { id: s.next_lease_id, target, user_id: user, issued_at: now, expires_at: now + ttl, renewed: false };
    s.leases.insert(lease.id, lease.clone());
    lease
}

fn annotation_gates(u: &User) -> Result<(), AnnotationError> {
    if !u.email_verified {
        return fail(ErrorCode::EmailUnverified, "email address not verified");
    }
    if !u.onboarding_passed {
        return fail(ErrorCode::OnboardingRequired, "onboarding assessment not passed");
    }
    Ok(())
}

fn require_certified(u: &User) -> Result<(), AnnotationError> {
    if u.status != ContributorStatus::Certified {
        return fail(ErrorCode::PermissionDenied, "additional answers are reserved to certified contributors");
    }
    Ok(())
}

fn require_role(s: &State, actor: UserId, role: Role) -> Result<(), AnnotationError> {
    if user(s, actor)?.role < role {
        return fail(ErrorCode::PermissionDenied, format!("requires role {role:?}"));
    }
    Ok(())
}

impl Platform {
    pub fn new(store: Store, settings: PlatformSettings) -> Self {
        let hasher = PasswordHasher::default();
        Platform {
            store,
            clock: Arc::new(SystemClock),
            mailer: Arc::new(LogMailer { base_url: "http://localhost:8080".into() }),
            dummy_hash: OnceLock::new(),
            hasher,
            settings,
            assessment: Assessment::default(),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_mailer(mut self, mailer: Arc<dyn Mailer>) -> Self {
        self.mailer = mailer;
        self
    }

    pub fn with_hasher(mut self, hasher: PasswordHasher) -> Self {
        self.dummy_hash = OnceLock::new();
        self.hasher = hasher;
        self
    }

    pub fn with_assessment(mut self, assessment: Assessment) -> Self {
        self.assessment = assessment;
        self
    }

    pub fn settings(&self) -> &PlatformSettings {
        &self.settings
    }

    pub fn assessment(&self) -> &Assessment {
        &self.assessment
    }

    pub fn hasher(&self) -> &PasswordHasher {
        &self.hasher
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    /// Read-only access to the current state.
    pub fn read<T>(&self, f: impl FnOnce(&State) -> T) -> T {
        self.store.read(f)
    }

    // accounts

    /// Create an unverified Regular/Open account and mail its verification
    /// token. The token is also returned to the caller.
    pub fn create_user(&self, email: &str, password_hash: String) -> Result<(UserProfile, String), AnnotationError> {
        let email = normalize_email(email)?;
        let now = self.now();
        let token = new_token();
        let ttl = self.settings.verification_ttl;
        let profile = self.store.write(|s| {
            if s.user_by_email(&email).is_some() {
                return fail(ErrorCode::EmailTaken, "email already registered");
            }
            s.next_user_id += 1;
            let u = User {
                id: s.next_user_id,
                email: email.clone(),
                password_hash,
                role: Role::Regular,
                status: ContributorStatus::Open,
                created_at: now,
                email_verified: false,
                onboarding_passed: false,
                onboarding_attempts: 0,
            };
            s.tokens.push(TokenRecord {
                hash: token_hash(&token),
                user_id: u.id,
                purpose: TokenPurpose::Verification,
                expires_at: now + ttl,
                used: false,
            });
            let profile = u.profile();
            s.users.insert(u.id, u);
            Ok(profile)
        })?;
        self.mailer.send(Mail { to: email, kind: MailKind::Verification, token: token.clone() });
        Ok((profile, token))
    }

    pub fn register(&self, email: &str, password: &str) -> Result<(UserProfile, String), AnnotationError> {
        if char_len(password) < MIN_PASSWORD_CHARS {
            return fail(ErrorCode::WeakPassword, format!("password needs at least {MIN_PASSWORD_CHARS} characters"));
        }
        normalize_email(email)?;
        self.create_user(email, self.hasher.hash(password))
    }

    /// Create an already verified account with the given role and status,
    /// bypassing email verification and onboarding. Used for bootstrapping
    /// administrators and for certified annotathon participants.
    pub fn provision_user(
        &self,
        email: &str,
        password_hash: String,
        role: Role,
        status: ContributorStatus,
    ) -> Result<UserProfile, AnnotationError> {
        let email = normalize_email(email)?;
        let now = self.now();
        self.store.write(|s| {
            if s.user_by_email(&email).is_some() {
                return fail(ErrorCode::EmailTaken, "email already registered");
            }
            s.next_user_id += 1;
            let u = User {
                id: s.next_user_id,
                email,
                password_hash,
                role,
                status,
                created_at: now,
                email_verified: true,
                onboarding_passed: true,
                onboarding_attempts: 0,
            };
            let profile = u.profile();
            s.users.insert(u.id, u);
            Ok(profile)
        })
    }

    fn consume_token(
        s: &mut State,
        token: &str,
        purpose: TokenPurpose,
        now: DateTime<Utc>,
    ) -> Result<UserId, AnnotationError> {
        let hash = token_hash(token);
        let record = s
            .tokens
            .iter_mut()
            .find(|t| t.hash == hash && t.purpose == purpose && !t.used)
            .ok_or_else(|| AnnotationError::new(ErrorCode::InvalidToken, "unknown or already used token"))?;
        if now >= record.expires_at {
            return fail(ErrorCode::TokenExpired, "token has expired");
        }
        record.used = true;
        Ok(record.user_id)
    }

    pub fn verify_email(&self, token: &str) -> Result<UserProfile, AnnotationError> {
        let now = self.now();
        self.store.write(|s| {
            let id = Self::consume_token(s, token, TokenPurpose::Verification, now)?;
            let u = s.users.get_mut(&id).ok_or_else(|| AnnotationError::new(ErrorCode::InvalidToken, "unknown user"))?;
            u.email_verified = true;
            Ok(u.profile())
        })
    }

    /// Check credentials. Unknown emails still pay for one hash verification.
    pub fn authenticate(&self, email: &str, password: &str) -> Result<UserProfile, AnnotationError> {
        let email = email.trim().to_lowercase();
        let found = self.store.read(|s| s.user_by_email(&email).cloned());
        let dummy = || self.dummy_hash.get_or_init(|| self.hasher.hash("placeholder password")).as_str();
        let hash = found.as_ref().map_or_else(dummy, |u| u.password_hash.as_str());
        let ok = self.hasher.verify(password, hash);
        match found {
            Some(u) if ok => {
                if !u.email_verified {
                    return fail(ErrorCode::EmailUnverified, "email address not verified");
                }
                Ok(u.profile())
            }
            _ => fail(ErrorCode::InvalidCredentials, "invalid email or password"),
        }
    }

    pub fn open_session(&self, email: &str, password: &str) -> Result<IssuedSession, AnnotationError> {
        let profile = self.authenticate(email, password)?;
        let now = self.now();
        let token = new_token();
        let expires_at = now + self.settings.session_ttl;
        self.store.write(|s| {
            s.sessions.retain(|_, r| now < r.expires_at);
            s.sessions.insert(token_hash(&token), SessionRecord { user_id: profile.id, expires_at });
            Ok(())
        })?;
        Ok(IssuedSession { token, expires_at, user: profile })
    }

    pub fn resolve_session(&self, token: &str) -> Result<UserProfile, AnnotationError> {
        let now = self.now();
        self.store.read(|s| {
            let record = s
                .sessions
                .get(&token_hash(token))
                .filter(|r| now < r.expires_at)
                .ok_or_else(|| AnnotationError::new(ErrorCode::Unauthenticated, "missing or expired session"))?;
            Ok(user(s, record.user_id)?.profile())
        })
    }

    /// Mail a reset token if the address is registered. Succeeds either way.
    pub fn request_password_reset(&self, email: &str) -> Result<(), AnnotationError> {
        let email = email.trim().to_lowercase();
        let now = self.now();
        let token = new_token();
        let ttl = self.settings.reset_ttl;
        let sent = self.store.write(|s| {
            let Some(id) = s.user_by_email(&email).map(|u| u.id) else { return Ok(false) };
            s.tokens.push(TokenRecord {
                hash: token_hash(&token),
                user_id: id,
                purpose: TokenPurpose::PasswordReset,
                expires_at: now + ttl,
                used: false,
            });
            Ok(true)
        })?;
        if sent {
            self.mailer.send(Mail { to: email, kind: MailKind::PasswordReset, token });
        }
        Ok(())
    }

    /// Set a new password and end the user's sessions.
    pub fn reset_password(&self, token: &str, new_password: &str) -> Result<(), AnnotationError> {
        if char_len(new_password) < MIN_PASSWORD_CHARS {
            return fail(ErrorCode::WeakPassword, format!("password needs at least {MIN_PASSWORD_CHARS} characters"));
        }
        let hash = self.hasher.hash(new_password);
        let now = self.now();
        self.store.write(|s| {
            let id = Self::consume_token(s, token, TokenPurpose::PasswordReset, now)?;
            if let Some(u) = s.users.get_mut(&id) {
                u.password_hash = hash;
            }
            s.sessions.retain(|_, r| r.user_id != id);
            Ok(())
        })
    }

    pub fn user(&self, id: UserId) -> Option<UserProfile> {
        self.store.read(|s| s.users.get(&id).map(User::profile))
    }

    /// Admins change the certified status of contributors. Only a SuperAdmin
    /// may change another SuperAdmin.
    pub fn set_status(&self, actor: UserId, target: UserId, status: ContributorStatus) -> Result<UserProfile, AnnotationError> {
        let now = self.now();
        self.store.write(|s| {
            require_role(s, actor, Role::Admin)?;
            let actor_role = user(s, actor)?.role;
            let t = s.users.get(&target).ok_or_else(|| AnnotationError::new(ErrorCode::NotFound, "no such user"))?;
            if t.role == Role::SuperAdmin && actor_role < Role::SuperAdmin {
                return fail(ErrorCode::PermissionDenied, "cannot modify a super-admin");
            }
            let before = t.status;
            let t = s.users.get_mut(&target).expect("checked above");
            t.status = status;
            let profile = t.profile();
            s.audit.push(AuditRecord { at: now, actor_id: actor, target_id: target, action: format!("status {before:?} -> {status:?}") });
            Ok(profile)
        })
    }

    pub fn set_role(&self, actor: UserId, target: UserId, role: Role) -> Result<UserProfile, AnnotationError> {
        let now = self.now();
        self.store.write(|s| {
            require_role(s, actor, Role::SuperAdmin)?;
            let t = s.users.get_mut(&target).ok_or_else(|| AnnotationError::new(ErrorCode::NotFound, "no such user"))?;
            let before = t.role;
            t.role = role;
            let profile = t.profile();
            s.audit.push(AuditRecord { at: now, actor_id: actor, target_id: target, action: format!("role {before:?} -> {role:?}") });
            Ok(profile)
        })
    }

    pub fn audit_log(&self) -> Vec<AuditRecord> {
        self.store.read(|s| s.audit.clone())
    }

    // onboarding

    pub fn onboarding_assess(&self, user_id: UserId, answers: &BTreeMap<String, usize>) -> Result<AssessmentOutcome, AnnotationError> {
        let outcome = self
            .assessment
            .grade(answers)
            .map_err(|id| AnnotationError::new(ErrorCode::UnknownQuestion, format!("unknown question `{id}`")))?;
        self.store.write(|s| {
            user(s, user_id)?;
            let u = s.users.get_mut(&user_id).expect("checked above");
            u.onboarding_attempts += 1;
            u.onboarding_passed |= outcome.passed;
            Ok(())
        })?;
        Ok(outcome)
    }

    // corpus

    /// Append the dataset's articles to the corpus, keeping their contexts
    /// and ignoring any questions. Titles already present are skipped.
    pub fn load_corpus(&self, dataset: &Dataset) -> Result<ImportSummary, AnnotationError> {
        self.store.write(|s| {
            let mut summary = ImportSummary { articles_added: 0, paragraphs_added: 0, skipped_titles: Vec::new() };
            let mut titles: HashSet<String> = s.articles.iter().map(|a| a.title.clone()).collect();
            for entry in &dataset.data {
                if !titles.insert(entry.title.clone()) {
                    summary.skipped_titles.push(entry.title.clone());
                    continue;
                }
                let paragraphs: Vec<StoredParagraph> = entry
                    .paragraphs
                    .iter()
                    .enumerate()
                    .map(|(index, p)| StoredParagraph { id: paragraph_id(&entry.title, index, &p.context), index, text: p.context.clone() })
                    .collect();
                summary.articles_added += 1;
                summary.paragraphs_added += paragraphs.len();
                s.articles.push(StoredArticle { title: entry.title.clone(), category: entry.category, paragraphs });
            }
            s.rebuild_indexes();
            Ok(summary)
        })
    }

    /// Corpus import is reserved to super-admins.
    pub fn import_dataset(&self, actor: UserId, dataset: &Dataset) -> Result<ImportSummary, AnnotationError> {
        self.store.read(|s| require_role(s, actor, Role::SuperAdmin))?;
        self.load_corpus(dataset)
    }

    pub fn categories(&self) -> Vec<CategorySummary> {
        self.store.read(|s| {
            Category::ALL
                .iter()
                .map(|&c| {
                    let arts: Vec<&StoredArticle> = s.articles.iter().filter(|a| a.category == Some(c)).collect();
                    let paragraphs = arts.iter().map(|a| a.paragraphs.len()).sum();
                    let paragraphs_open = arts
                        .iter()
                        .flat_map(|a| &a.paragraphs)
                        .filter(|p| !s.batches.contains_key(&p.id))
                        .count();
                    CategorySummary { category: c, articles: arts.len(), paragraphs, paragraphs_open }
                })
                .collect()
        })
    }

    // annotation

    /// Lease the first paragraph of `category`, in corpus then paragraph
    /// order, that has no batch and no active lease by someone else.
    pub fn lease_next_paragraph(&self, user_id: UserId, category: Category) -> Result<(ParagraphView, Lease), AnnotationError> {
        let now = self.now();
        let ttl = self.settings.lease_ttl;
        let allow_open = self.settings.allow_open_annotation;
        self.store.write(|s| {
            let u = user(s, user_id)?;
            annotation_gates(u)?;
            if u.status == ContributorStatus::Open && !allow_open {
                return fail(ErrorCode::PermissionDenied, "annotation is currently open to certified contributors only");
            }
            let busy = leased_by_others(s, user_id, now);
            let found = s
                .articles
                .iter()
                .filter(|a| a.category == Some(category))
                .flat_map(|a| &a.paragraphs)
                .find(|p| !s.batches.contains_key(&p.id) && !busy.contains(&LeaseTarget::Paragraph(p.id.clone())))
                .map(|p| p.id.clone());
            let Some(pid) = found else {
                return fail(ErrorCode::NoWork, format!("no paragraph available in {category}"));
            };
            let view = s.paragraph_view(&pid).expect("indexed paragraph");
            let lease = issue_lease(s, user_id, LeaseTarget::Paragraph(pid), now, ttl);
            Ok((view, lease))
        })
    }

    /// Extend a held lease by one TTL. Allowed once per lease.
    pub fn renew_lease(&self, user_id: UserId, lease_id: LeaseId) -> Result<Lease, AnnotationError> {
        let now = self.now();
        let ttl = self.settings.lease_ttl;
        self.store.write(|s| {
            let lease = s
                .leases
                .get_mut(&lease_id)
                .filter(|l| l.user_id == user_id)
                .ok_or_else(|| AnnotationError::new(ErrorCode::LeaseNotHeld, "no such lease"))?;
            if !lease.is_active(now) {
                return fail(ErrorCode::LeaseExpired, "lease has expired");
            }
            if lease.renewed {
                return fail(ErrorCode::LeaseRenewLimit, "lease was already renewed");
            }
            lease.expires_at = now + ttl;
            lease.renewed = true;
            Ok(lease.clone())
        })
    }

    /// Store a batch of exactly five pairs for the leased paragraph.
    pub fn submit_batch(&self, user_id: UserId, lease_id: LeaseId, pairs: &[PairInput]) -> Result<BatchReceipt, AnnotationError> {
        let now = self.now();
        self.store.write(|s| {
            let lease = s
                .leases
                .get(&lease_id)
                .filter(|l| l.user_id == user_id)
                .ok_or_else(|| AnnotationError::new(ErrorCode::LeaseNotHeld, "no such lease"))?;
            let LeaseTarget::Paragraph(pid) = lease.target.clone() else {
                return fail(ErrorCode::LeaseNotHeld, "lease is not on a paragraph");
            };
            if !lease.is_active(now) {
                return fail(ErrorCode::LeaseExpired, "lease has expired");
            }
            if s.batches.contains_key(&pid) {
                return fail(ErrorCode::LeaseNotHeld, "paragraph already annotated");
            }
            if pairs.len() < BATCH_SIZE {
                return fail(ErrorCode::BatchIncomplete, format!("{} pairs given, {BATCH_SIZE} required", pairs.len()));
            }
            if pairs.len() > BATCH_SIZE {
                return fail(ErrorCode::BatchTooLarge, format!("{} pairs given, {BATCH_SIZE} required", pairs.len()));
            }
            let context = s.paragraph_text(&pid).ok_or_else(|| AnnotationError::new(ErrorCode::NotFound, "paragraph vanished"))?;
            for (i, pair) in pairs.iter().enumerate() {
                validate_pair(context, pair).map_err(|e| AnnotationError::new(e.code, format!("pair {}: {}", i + 1, e.message)))?;
            }
            let question_ids: Vec<String> = (1..=BATCH_SIZE).map(|k| format!("{pid}-q{k}")).collect();
            for (qid, pair) in question_ids.iter().zip(pairs) {
                s.questions.insert(
                    qid.clone(),
                    QuestionState {
                        question_id: qid.clone(),
                        paragraph_id: pid.clone(),
                        author_id: user_id,
                        question: pair.question.clone(),
                        original_answer: pair.answer.clone(),
                        additional_answers: Vec::new(),
                        flags: Vec::new(),
                        state: QuestionStatus::NeedsAnswers,
                        created_at: now,
                    },
                );
            }
            s.batches.insert(
                pid.clone(),
                AnnotationBatch { paragraph_id: pid.clone(), user_id, question_ids: question_ids.clone(), submitted_at: now },
            );
            s.leases.remove(&lease_id);
            Ok(BatchReceipt { paragraph_id: pid, question_ids })
        })
    }

    /// Lease the first question, in corpus order, still needing answers that
    /// this certified contributor has not written or answered.
    pub fn next_additional_task(&self, user_id: UserId) -> Result<AdditionalTask, AnnotationError> {
        let now = self.now();
        let ttl = self.settings.lease_ttl;
        self.store.write(|s| {
            let u = user(s, user_id)?;
            require_certified(u)?;
            annotation_gates(u)?;
            let busy = leased_by_others(s, user_id, now);
            let found = s
                .articles
                .iter()
                .flat_map(|a| &a.paragraphs)
                .filter_map(|p| s.batches.get(&p.id))
                .flat_map(|b| &b.question_ids)
                .map(|qid| &s.questions[qid])
                .find(|q| {
                    q.state == QuestionStatus::NeedsAnswers
                        && q.additional_answers.len() < ADDITIONAL_ANSWERS_REQUIRED
                        && !q.has_contributed(user_id)
                        && !busy.contains(&LeaseTarget::Question(q.question_id.clone()))
                })
                .map(|q| (q.question_id.clone(), q.question.clone(), q.paragraph_id.clone()));
            let Some((qid, question, pid)) = found else {
                return fail(ErrorCode::NoWork, "no question needs an additional answer");
            };
            let paragraph = s.paragraph_view(&pid).expect("indexed paragraph");
            let lease = issue_lease(s, user_id, LeaseTarget::Question(qid.clone()), now, ttl);
            Ok(AdditionalTask { paragraph, question_id: qid, question, lease })
        })
    }

    pub fn submit_additional_answer(
        &self,
        user_id: UserId,
        question_id: &str,
        answer: &AnswerEntry,
    ) -> Result<QuestionState, AnnotationError> {
        let now = self.now();
        self.store.write(|s| {
            let q = s.questions.get(question_id).ok_or_else(|| AnnotationError::new(ErrorCode::NotFound, "no such question"))?;
            require_certified(user(s, user_id)?)?;
            if q.has_contributed(user_id) {
                return fail(ErrorCode::DuplicateContributor, "each answer must come from a different contributor");
            }
            let lease_id = held_lease(s, user_id, &LeaseTarget::Question(question_id.to_string()), now)?;
            if q.state != QuestionStatus::NeedsAnswers {
                return fail(ErrorCode::NoWork, "question is not accepting answers");
            }
            let context = s.paragraph_text(&q.paragraph_id).ok_or_else(|| AnnotationError::new(ErrorCode::NotFound, "paragraph vanished"))?;
            validate_answer(context, answer)?;
            let q = s.questions.get_mut(question_id).expect("checked above");
            q.additional_answers.push(AdditionalAnswer { user_id, answer: answer.clone(), submitted_at: now });
            if q.meets_completion_rule() {
                q.state = QuestionStatus::Complete;
            }
            let out = q.clone();
            s.leases.remove(&lease_id);
            Ok(out)
        })
    }

    pub fn flag_question(&self, user_id: UserId, question_id: &str, reason: FlagReason) -> Result<FlagRecord, AnnotationError> {
        let now = self.now();
        self.store.write(|s| {
            let q = s.questions.get(question_id).ok_or_else(|| AnnotationError::new(ErrorCode::NotFound, "no such question"))?;
            require_certified(user(s, user_id)?)?;
            if q.flags.iter().any(|f| f.user_id == user_id) {
                return fail(ErrorCode::DuplicateFlag, "question already flagged by this contributor");
            }
            let lease_id = held_lease(s, user_id, &LeaseTarget::Question(question_id.to_string()), now)?;
            let record = FlagRecord { question_id: question_id.to_string(), user_id, reason, created_at: now };
            let q = s.questions.get_mut(question_id).expect("checked above");
            q.flags.push(record.clone());
            q.state = QuestionStatus::Flagged;
            s.leases.remove(&lease_id);
            Ok(record)
        })
    }

    pub fn question(&self, question_id: &str) -> Option<QuestionState> {
        self.store.read(|s| s.questions.get(question_id).cloned())
    }

    pub fn contributor_stats(&self, user_id: UserId) -> ContributorStats {
        self.store.read(|s| contributor_stats(s, user_id))
    }

    /// Build a dataset from stored questions, in corpus and paragraph order.
    /// With `only_complete`, only complete questions are exported, each with
    /// its three answers; otherwise each question carries its original answer.
    pub fn export_complete(&self, filter: ExportFilter) -> Dataset {
        self.store.read(|s| export(s, filter))
    }

    pub fn monitoring(&self, actor: UserId, category: Option<Category>, offset: usize, limit: usize) -> Result<MonitoringPage, AnnotationError> {
        self.store.read(|s| {
            require_role(s, actor, Role::Admin)?;
            let rows = monitoring_rows(s, category);
            let totals = category_totals(&rows);
            let end = offset.saturating_add(limit).min(rows.len());
            let next_offset = (end < rows.len()).then_some(end);
            let page = rows.get(offset.min(rows.len())..end).unwrap_or_default().to_vec();
            Ok(MonitoringPage { rows: page, totals, next_offset })
        })
    }

    /// Check the state machine and store invariants. Returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let now = self.now();
        self.store.read(|s| check_invariants(s, now))
    }
}

pub fn contributor_stats(s: &State, user_id: UserId) -> ContributorStats {
    ContributorStats {
        paragraphs_completed: s.batches.values().filter(|b| b.user_id == user_id).count(),
        questions_written: s.questions.values().filter(|q| q.author_id == user_id).count(),
        additional_answers: s
            .questions
            .values()
            .flat_map(|q| &q.additional_answers)
            .filter(|a| a.user_id == user_id)
            .count(),
        flags: s.questions.values().flat_map(|q| &q.flags).filter(|f| f.user_id == user_id).count(),
    }
}

fn export(s: &State, filter: ExportFilter) -> Dataset {
    let included = |q: &QuestionState| match q.state {
        QuestionStatus::Complete => true,
        QuestionStatus::Fresh | QuestionStatus::NeedsAnswers => !filter.only_complete,
        QuestionStatus::Flagged => filter.include_flagged && !filter.only_complete,
    };
    let data = s
        .articles
        .iter()
        .filter_map(|art| {
            let paragraphs: Vec<ParagraphEntry> = art
                .paragraphs
                .iter()
                .filter_map(|p| {
                    let batch = s.batches.get(&p.id)?;
                    let qas: Vec<QaEntry> = batch
                        .question_ids
                        .iter()
                        .map(|qid| &s.questions[qid])
                        .filter(|q| included(q))
                        .map(|q| QaEntry {
                            id: q.question_id.clone(),
                            question: q.question.clone(),
                            answers: if filter.only_complete { q.all_answers() } else { vec![q.original_answer.clone()] },
                        })
                        .collect();
                    (!qas.is_empty()).then(|| ParagraphEntry { context: p.text.clone(), qas })
                })
                .collect();
            (!paragraphs.is_empty()).then(|| ArticleEntry { title: art.title.clone(), category: art.category, paragraphs })
        })
        .collect();
    Dataset::new(data)
}

pub fn check_invariants(s: &State, now: DateTime<Utc>) -> Result<(), String> {
    for q in s.questions.values() {
        if q.state == QuestionStatus::Complete && !q.meets_completion_rule() {
            return Err(format!("{}: complete without three answers from three contributors", q.question_id));
        }
        if q.state == QuestionStatus::NeedsAnswers && q.meets_completion_rule() {
            return Err(format!("{}: meets the completion rule but is not complete", q.question_id));
        }
        if q.additional_answers.len() > ADDITIONAL_ANSWERS_REQUIRED {
            return Err(format!("{}: too many additional answers", q.question_id));
        }
        let context = s.paragraph_text(&q.paragraph_id).ok_or_else(|| format!("{}: unknown paragraph", q.question_id))?;
        for a in q.all_answers() {
            validate_answer(context, &a).map_err(|e| format!("{}: stored answer invalid: {e}", q.question_id))?;
        }
    }
    let mut targets = HashSet::new();
    for l in s.leases.values().filter(|l| l.is_active(now)) {
        if !targets.insert(&l.target) {
            return Err(format!("two active leases on {:?}", l.target));
        }
        if l.expires_at <= l.issued_at {
            return Err(format!("lease {} expires before it is issued", l.id));
        }
    }
    let written: usize = s.users.keys().map(|&u| contributor_stats(s, u).questions_written).sum();
    if written != BATCH_SIZE * s.batches.len() {
        return Err(format!("{written} questions written for {} batches", s.batches.len()));
    }
    Ok(())
}
