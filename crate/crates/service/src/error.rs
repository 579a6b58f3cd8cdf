use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use annoforge_core::annotation::{AnnotationError, ErrorCode};

/// Error body of every failed request: `{"code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::InvalidInput, message)
    }
}

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        ApiError { code: e.code, message: e.message }
    }
}

pub fn status_for(code: ErrorCode) -> StatusCode {
    use ErrorCode::*;
    match code {
        InvalidInput | InvalidEmail | WeakPassword | InvalidToken | TokenExpired | UnknownQuestion
        | BatchIncomplete | BatchTooLarge | QuestionTooLong | EmptyAnswer | SpanMismatch | SpanNotWordAligned
        | ImportInvalid => StatusCode::BAD_REQUEST,
        InvalidCredentials | Unauthenticated => StatusCode::UNAUTHORIZED,
        EmailUnverified | PermissionDenied | OnboardingRequired => StatusCode::FORBIDDEN,
        NotFound | NoWork => StatusCode::NOT_FOUND,
        EmailTaken | LeaseNotHeld | LeaseExpired | LeaseRenewLimit | DuplicateContributor | DuplicateFlag => {
            StatusCode::CONFLICT
        }
        RateLimited => StatusCode::TOO_MANY_REQUESTS,
        Storage => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.code == ErrorCode::Storage {
            log::error!("storage failure: {}", self.message);
        }
        (status_for(self.code), Json(self)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
