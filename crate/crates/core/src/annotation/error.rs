use std::fmt;

use serde::{Deserialize, Serialize};

/// Stable error codes shared with HTTP clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    InvalidInput,
    InvalidEmail,
    WeakPassword,
    EmailTaken,
    InvalidToken,
    TokenExpired,
    InvalidCredentials,
    EmailUnverified,
    Unauthenticated,
    PermissionDenied,
    OnboardingRequired,
    UnknownQuestion,
    NotFound,
    NoWork,
    LeaseNotHeld,
    LeaseExpired,
    LeaseRenewLimit,
    BatchIncomplete,
    BatchTooLarge,
    QuestionTooLong,
    EmptyAnswer,
    SpanMismatch,
    SpanNotWordAligned,
    DuplicateContributor,
    DuplicateFlag,
    ImportInvalid,
    RateLimited,
    Storage,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::InvalidInput => "INVALID_INPUT",
            ErrorCode::InvalidEmail => "INVALID_EMAIL",
            ErrorCode::WeakPassword => "WEAK_PASSWORD",
            ErrorCode::EmailTaken => "EMAIL_TAKEN",
            ErrorCode::InvalidToken => "INVALID_TOKEN",
            ErrorCode::TokenExpired => "TOKEN_EXPIRED",
            ErrorCode::InvalidCredentials => "INVALID_CREDENTIALS",
            ErrorCode::EmailUnverified => "EMAIL_UNVERIFIED",
            ErrorCode::Unauthenticated => "UNAUTHENTICATED",
            ErrorCode::PermissionDenied => "PERMISSION_DENIED",
            ErrorCode::OnboardingRequired => "ONBOARDING_REQUIRED",
            ErrorCode::UnknownQuestion => "UNKNOWN_QUESTION",
            ErrorCode::NotFound => "NOT_FOUND",
            ErrorCode::NoWork => "NO_WORK",
            ErrorCode::LeaseNotHeld => "LEASE_NOT_HELD",
            ErrorCode::LeaseExpired => "LEASE_EXPIRED",
            ErrorCode::LeaseRenewLimit => "LEASE_RENEW_LIMIT",
            ErrorCode::BatchIncomplete => "BATCH_INCOMPLETE",
            ErrorCode::BatchTooLarge => "BATCH_TOO_LARGE",
            ErrorCode::QuestionTooLong => "QUESTION_TOO_LONG",
            ErrorCode::EmptyAnswer => "EMPTY_ANSWER",
            ErrorCode::SpanMismatch => "SPAN_MISMATCH",
            ErrorCode::SpanNotWordAligned => "SPAN_NOT_WORD_ALIGNED",
            ErrorCode::DuplicateContributor => "DUPLICATE_CONTRIBUTOR",
            ErrorCode::DuplicateFlag => "DUPLICATE_FLAG",
            ErrorCode::ImportInvalid => "IMPORT_INVALID",
            ErrorCode::RateLimited => "RATE_LIMITED",
            ErrorCode::Storage => "STORAGE",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct AnnotationError {
    pub code: ErrorCode,
    pub message: String,
}

impl AnnotationError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        AnnotationError { code, message: message.into() }
    }
}

pub(crate) fn fail<T>(code: ErrorCode, message: impl Into<String>) -> Result<T, AnnotationError> {
    Err(AnnotationError::new(code, message))
}
