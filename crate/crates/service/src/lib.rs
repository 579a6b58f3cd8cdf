//! JSON-over-HTTP facade for the annotation platform.
//!
//! Errors are returned as `{"code", "message"}` with the stable codes of
//! [`ErrorCode`](annoforge_core::annotation::ErrorCode). Every route except
//! account creation, verification, login and password reset needs an
//! `Authorization: Bearer <token>` header.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;

use annoforge_core::annotation::Platform;

pub mod auth;
pub mod error;
pub mod routes;

pub use auth::{ApiJson, AuthUser, RateLimiter};
pub use error::{status_for, ApiError};

/// Largest accepted corpus upload, in bytes.
pub const IMPORT_LIMIT: usize = 512 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub platform: Arc<Platform>,
    pub limiter: Arc<RateLimiter>,
}

impl AppState {
    pub fn new(platform: Arc<Platform>) -> Self {
        AppState { platform, limiter: Arc::new(RateLimiter::default()) }
    }
}

pub fn router(state: AppState) -> Router {
    use routes::*;
    Router::new()
        .route("/api/users", post(register))
        .route("/api/users/verify", post(verify))
        .route("/api/sessions", post(open_session))
        .route("/api/password-reset", post(password_reset))
        .route("/api/me", get(me))
        .route("/api/me/stats", get(my_stats))
        .route("/api/onboarding", get(onboarding_questions).post(onboarding_submit))
        .route("/api/categories", get(categories))
        .route("/api/leases", post(lease_paragraph))
        .route("/api/leases/:id/renew", post(renew_lease))
        .route("/api/annotations", post(submit_batch))
        .route("/api/additional/next", get(next_additional))
        .route("/api/additional/answers", post(submit_additional))
        .route("/api/flags", post(flag))
        .route("/api/admin/monitoring", get(monitoring))
        .route("/api/admin/users/:id/status", post(update_user))
        .route("/api/admin/import", post(import).layer(DefaultBodyLimit::max(IMPORT_LIMIT)))
        .route("/api/admin/export", get(export))
        .fallback(not_found)
        .with_state(state)
}

/// Serve until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
