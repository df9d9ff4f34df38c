//! HTTP/JSON service for the trainer UI.
//!
//! Routes:
//! - `GET /health`
//! - `GET /rules`
//! - `GET /trace?n=<digits>&m=<multiplier>`
//! - `POST /sessions`
//! - `GET /sessions/{id}/next`
//! - `POST /sessions/{id}/respond`
//! - `GET /sessions/{id}/summary`
//!
//! Errors are `{"error": <code>, "message": <text>}` with a 4xx/5xx status.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::digits::DigitString;
use crate::drill::{Answer, DrillConfig, DrillSession, SessionStore};
use crate::error::{Error, Result};
use crate::rules::{multiply_by_rule, Multiplier, RuleSpec};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into() }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) | Error::Domain(_) | Error::Config(_) | Error::Validation(_) => {
                StatusCode::BAD_REQUEST
            }
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Challenge(_) => StatusCode::CONFLICT,
            Error::Persistence { .. } | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

pub fn router(store: Arc<SessionStore>, allowed_origins: &[String]) -> Router {
    let cors = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let cors = if allowed_origins.iter().any(|o| o == "*") {
        cors.allow_origin(AllowOrigin::any())
    } else {
        let origins: Vec<HeaderValue> =
            allowed_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
        cors.allow_origin(AllowOrigin::list(origins))
    };

    Router::new()
        .route("/health", get(health))
        .route("/rules", get(rules))
        .route("/trace", get(trace))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/next", get(next_challenge))
        .route("/sessions/{id}/respond", post(respond))
        .route("/sessions/{id}/summary", get(summary))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(cors)
        .with_state(AppState { store })
}

pub async fn serve(host: &str, port: u16, store_dir: PathBuf, allowed_origins: Vec<String>) -> Result<()> {
    let store = Arc::new(SessionStore::new(store_dir));
    std::fs::create_dir_all(store.dir())?;
    let app = router(store.clone(), &allowed_origins);
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .map_err(|e| Error::Io(format!("cannot bind {host}:{port}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| Error::Io(e.to_string()))?;
    eprintln!("listening on http://{addr} (sessions in {})", store.dir().display());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Io(e.to_string()))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Serialize)]
struct RuleDescription {
    multiplier: Multiplier,
    rightmost: String,
    interior: String,
    leading: String,
}

async fn rules() -> Json<serde_json::Value> {
    let rules: Vec<RuleDescription> = Multiplier::all()
        .map(|m| {
            let spec = RuleSpec::for_multiplier(m);
            RuleDescription {
                multiplier: m,
                rightmost: spec.rightmost.describe(),
                interior: spec.interior.describe(),
                leading: spec.leading.describe(),
            }
        })
        .collect();
    Json(json!({ "multipliers": Multiplier::SUPPORTED, "rules": rules }))
}

async fn trace(Query(params): Query<HashMap<String, String>>) -> ApiResult<Json<serde_json::Value>> {
    let n = params
        .get("n")
        .ok_or_else(|| ApiError::bad_request("invalid_query", "missing query parameter `n`"))?;
    let m = params
        .get("m")
        .ok_or_else(|| ApiError::bad_request("invalid_query", "missing query parameter `m`"))?;
    let number = DigitString::parse(n)?;
    let multiplier: Multiplier = m.parse()?;
    Ok(Json(multiply_by_rule(&number, multiplier).to_structured()))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_body", e.to_string()))
}

/// Runs a session operation off the async executor, under the session lock.
async fn on_session<T, F>(state: &AppState, id: String, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut DrillSession) -> Result<T> + Send + 'static,
{
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || store.with_session(&id, f))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let config: DrillConfig = parse_body(&body)?;
    let store = state.store.clone();
    let created = tokio::task::spawn_blocking(move || {
        let shared = store.create(config)?;
        let s = shared.lock().unwrap_or_else(|p| p.into_inner());
        Ok::<_, Error>(json!({
            "session_id": s.session_id,
            "created_at": s.created_at,
            "config": s.config,
            "problem_count": s.problems.len(),
        }))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn next_challenge(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let next = on_session(&state, id, |s| Ok(s.next_challenge())).await?;
    Ok(Json(next).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RespondBody {
    challenge_id: String,
    #[serde(default)]
    digit: Option<i64>,
    #[serde(default)]
    carry: Option<i64>,
    #[serde(default)]
    raw_value: Option<i64>,
    #[serde(default)]
    product: Option<String>,
}

async fn respond(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: RespondBody = parse_body(&body)?;
    let answer = Answer { digit: body.digit, carry: body.carry, raw_value: body.raw_value, product: body.product };
    let challenge_id = body.challenge_id;
    let response = on_session(&state, id, move |s| s.submit_response(&challenge_id, answer)).await?;
    Ok(Json(response).into_response())
}

async fn summary(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let summary = on_session(&state, id, |s| Ok(s.summary())).await?;
    Ok(Json(summary).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
}
