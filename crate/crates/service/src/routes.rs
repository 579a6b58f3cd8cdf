use std::collections::{BTreeMap, HashMap};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use serde::Deserialize;
use serde_json::json;

use annoforge_core::annotation::{
    AnnotationError, ContributorStatus, ErrorCode, ExportFilter, FlagReason, LeaseId, PairInput, Platform, Role,
    UserId,
};
use annoforge_core::category::Category;
use annoforge_core::squad::{export_squad, import_squad, AnswerEntry};

use crate::auth::{ApiJson, AuthUser};
use crate::error::{ApiError, ApiResult};
use crate::AppState;

/// Rows per monitoring page.
pub const MONITORING_PAGE: usize = 100;

/// Run a platform call off the async executor; password hashing is slow.
async fn run<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Platform) -> Result<T, AnnotationError> + Send + 'static,
{
    let platform = state.platform.clone();
    tokio::task::spawn_blocking(move || f(&platform))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Storage, e.to_string()))?
        .map_err(ApiError::from)
}

fn parse_id(raw: &str) -> ApiResult<u64> {
    raw.parse().map_err(|_| ApiError::invalid(format!("`{raw}` is not a numeric id")))
}

fn parse_category(raw: &str) -> ApiResult<Category> {
    raw.parse().map_err(|e: annoforge_core::category::UnknownCategory| ApiError::invalid(e.to_string()))
}

fn parse_flag(params: &HashMap<String, String>, key: &str) -> ApiResult<Option<bool>> {
    params
        .get(key)
        .map(|v| match v.as_str() {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => Err(ApiError::invalid(format!("`{key}` must be true or false"))),
        })
        .transpose()
}

// accounts

#[derive(Deserialize)]
pub struct Credentials {
    email: String,
    password: String,
}

pub async fn register(State(state): State<AppState>, ApiJson(body): ApiJson<Credentials>) -> ApiResult<impl IntoResponse> {
    let (profile, _token) = run(&state, move |p| p.register(&body.email, &body.password)).await?;
    Ok((StatusCode::CREATED, Json(profile)))
}

#[derive(Deserialize)]
pub struct TokenBody {
    token: String,
}

pub async fn verify(State(state): State<AppState>, ApiJson(body): ApiJson<TokenBody>) -> ApiResult<impl IntoResponse> {
    Ok(Json(run(&state, move |p| p.verify_email(&body.token)).await?))
}

pub async fn open_session(
    State(state): State<AppState>,
    ApiJson(body): ApiJson<Credentials>,
) -> ApiResult<impl IntoResponse> {
    let s = run(&state, move |p| p.open_session(&body.email, &body.password)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "token": s.token, "expires_at": s.expires_at, "user": s.user }))))
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum ResetBody {
    Confirm { token: String, password: String },
    Request { email: String },
}

/// `{email}` mails a reset token; `{token, password}` sets the new password.
pub async fn password_reset(
    State(state): State<AppState>,
    ApiJson(body): ApiJson<ResetBody>,
) -> ApiResult<StatusCode> {
    match body {
        ResetBody::Request { email } => {
            run(&state, move |p| p.request_password_reset(&email)).await?;
            Ok(StatusCode::ACCEPTED)
        }
        ResetBody::Confirm { token, password } => {
            run(&state, move |p| p.reset_password(&token, &password)).await?;
            Ok(StatusCode::NO_CONTENT)
        }
    }
}

pub async fn me(AuthUser(user): AuthUser) -> impl IntoResponse {
    Json(user)
}

pub async fn my_stats(State(state): State<AppState>, AuthUser(user): AuthUser) -> ApiResult<impl IntoResponse> {
    Ok(Json(run(&state, move |p| Ok(p.contributor_stats(user.id))).await?))
}

// onboarding

pub async fn onboarding_questions(State(state): State<AppState>, AuthUser(user): AuthUser) -> impl IntoResponse {
    let a = state.platform.assessment();
    Json(json!({
        "version": a.version,
        "questions": a.public_questions(),
        "passed": user.onboarding_passed,
    }))
}

#[derive(Deserialize)]
pub struct OnboardingAnswers {
    answers: BTreeMap<String, usize>,
}

pub async fn onboarding_submit(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    ApiJson(body): ApiJson<OnboardingAnswers>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(run(&state, move |p| p.onboarding_assess(user.id, &body.answers)).await?))
}

// annotation

pub async fn categories(State(state): State<AppState>, _user: AuthUser) -> ApiResult<impl IntoResponse> {
    Ok(Json(run(&state, |p| Ok(p.categories())).await?))
}

#[derive(Deserialize)]
pub struct LeaseBody {
    category: String,
}

pub async fn lease_paragraph(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    ApiJson(body): ApiJson<LeaseBody>,
) -> ApiResult<impl IntoResponse> {
    let category = parse_category(&body.category)?;
    let (paragraph, lease) = run(&state, move |p| p.lease_next_paragraph(user.id, category)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "paragraph": paragraph, "lease": lease }))))
}

pub async fn renew_lease(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let id: LeaseId = parse_id(&id)?;
    Ok(Json(run(&state, move |p| p.renew_lease(user.id, id)).await?))
}

#[derive(Deserialize)]
pub struct BatchBody {
    lease_id: LeaseId,
    pairs: Vec<PairInput>,
}

pub async fn submit_batch(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    ApiJson(body): ApiJson<BatchBody>,
) -> ApiResult<impl IntoResponse> {
    let receipt = run(&state, move |p| p.submit_batch(user.id, body.lease_id, &body.pairs)).await?;
    Ok((StatusCode::CREATED, Json(receipt)))
}

pub async fn next_additional(State(state): State<AppState>, AuthUser(user): AuthUser) -> ApiResult<impl IntoResponse> {
    Ok(Json(run(&state, move |p| p.next_additional_task(user.id)).await?))
}

#[derive(Deserialize)]
pub struct AdditionalBody {
    question_id: String,
    answer: AnswerEntry,
}

pub async fn submit_additional(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    ApiJson(body): ApiJson<AdditionalBody>,
) -> ApiResult<impl IntoResponse> {
    let q = run(&state, move |p| p.submit_additional_answer(user.id, &body.question_id, &body.answer)).await?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "question_id": q.question_id, "state": q.state, "answers": 1 + q.additional_answers.len() })),
    ))
}

#[derive(Deserialize)]
pub struct FlagBody {
    question_id: String,
    reason: FlagReason,
}

pub async fn flag(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    ApiJson(body): ApiJson<FlagBody>,
) -> ApiResult<impl IntoResponse> {
    let record = run(&state, move |p| p.flag_question(user.id, &body.question_id, body.reason)).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

// administration

fn encode_cursor(offset: usize) -> String {
    URL_SAFE_NO_PAD.encode(format!("o:{offset}"))
}

fn decode_cursor(cursor: &str) -> ApiResult<usize> {
    URL_SAFE_NO_PAD
        .decode(cursor)
        .ok()
        .and_then(|b| String::from_utf8(b).ok())
        .and_then(|s| s.strip_prefix("o:").and_then(|n| n.parse().ok()))
        .ok_or_else(|| ApiError::invalid("malformed cursor"))
}

/// One row per article ordered by title, 100 per page, with per-category
/// totals over all matching rows. `next_cursor` is opaque.
pub async fn monitoring(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let category = params.get("category").map(|c| parse_category(c)).transpose()?;
    let offset = params.get("cursor").map(|c| decode_cursor(c)).transpose()?.unwrap_or(0);
    let page = run(&state, move |p| p.monitoring(user.id, category, offset, MONITORING_PAGE)).await?;
    Ok(Json(json!({
        "rows": page.rows,
        "totals": page.totals,
        "next_cursor": page.next_offset.map(encode_cursor),
    })))
}

#[derive(Deserialize)]
pub struct UserUpdate {
    status: Option<ContributorStatus>,
    role: Option<Role>,
}

pub async fn update_user(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<UserUpdate>,
) -> ApiResult<impl IntoResponse> {
    let target: UserId = parse_id(&id)?;
    if body.status.is_none() && body.role.is_none() {
        return Err(ApiError::invalid("expected `status` and/or `role`"));
    }
    let profile = run(&state, move |p| {
        let mut profile = None;
        if let Some(role) = body.role {
            profile = Some(p.set_role(actor.id, target, role)?);
        }
        if let Some(status) = body.status {
            profile = Some(p.set_status(actor.id, target, status)?);
        }
        Ok(profile.expect("one field present"))
    })
    .await?;
    Ok(Json(profile))
}

pub async fn import(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    if actor.role < Role::SuperAdmin {
        return Err(ApiError::new(ErrorCode::PermissionDenied, "import requires role SuperAdmin"));
    }
    let (dataset, report) =
        import_squad(&body).map_err(|e| ApiError::new(ErrorCode::ImportInvalid, e.to_string()))?;
    if !report.structural.is_empty() {
        let first = &report.structural[0];
        return Err(ApiError::new(
            ErrorCode::ImportInvalid,
            format!("{} structural issue(s), first at {}: {}", report.structural.len(), first.path, first.message),
        ));
    }
    let summary = run(&state, move |p| p.import_dataset(actor.id, &dataset)).await?;
    Ok((StatusCode::CREATED, Json(summary)))
}

pub async fn export(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    if actor.role < Role::Admin {
        return Err(ApiError::new(ErrorCode::PermissionDenied, "export requires role Admin"));
    }
    let mut filter = ExportFilter::default();
    if let Some(v) = parse_flag(&params, "only_complete")? {
        filter.only_complete = v;
    }
    if let Some(v) = parse_flag(&params, "include_flagged")? {
        filter.include_flagged = v;
    }
    let dataset = run(&state, move |p| Ok(p.export_complete(filter))).await?;
    let bytes = export_squad(&dataset).map_err(|e| ApiError::new(ErrorCode::Storage, e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes))
}

pub async fn not_found() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such route")
}

