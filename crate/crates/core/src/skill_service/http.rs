use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;

use super::envelope::decode_request;
use super::skill::Skill;

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ConverseBody {
    session_id: String,
    text: String,
}

/// Routes: `POST /alexa`, `POST /converse`, `GET /health`.
pub fn skill_router(skill: Arc<Skill>) -> Router {
    Router::new()
        .route("/alexa", post(alexa))
        .route("/converse", post(converse))
        .route("/health", get(health))
        .with_state(skill)
}

/// Serves prebuilt console assets from `dir` under `/console`.
#[cfg(feature = "console")]
pub fn with_console(router: Router, dir: impl AsRef<std::path::Path>) -> Router {
    router.nest_service("/console", tower_http::services::ServeDir::new(dir.as_ref()))
}

fn bad_request(code: &str, message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({"error": {"code": code, "message": message}}))).into_response()
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn alexa(State(skill): State<Arc<Skill>>, body: Bytes) -> Response {
    let text = String::from_utf8_lossy(&body);
    match decode_request(&text) {
        Ok(req) => json_text(skill.handle_request(&req).await.to_json()),
        Err(e) => bad_request("MalformedEnvelope", e.to_string()),
    }
}

async fn converse(State(skill): State<Arc<Skill>>, body: Bytes) -> Response {
    let parsed: ConverseBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return bad_request("MalformedRequest", e.to_string()),
    };
    let result = skill.converse(&parsed.session_id, &parsed.text).await;
    json_text(serde_json::to_string(&result).expect("converse result serializes"))
}

async fn health(State(skill): State<Arc<Skill>>) -> Response {
    Json(json!({
        "status": "ok",
        "endpoint": skill.backend().describe(),
        "model": skill.model().invocation_name,
    }))
    .into_response()
}

/// Serves the skill routes on an already bound listener.
pub async fn serve_skill(skill: Arc<Skill>, listener: TcpListener) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), "skill service listening");
    axum::serve(listener, skill_router(skill)).await
}

/// Like [`serve_skill`], also serving console assets from `dir` under `/console`.
#[cfg(feature = "console")]
pub async fn serve_skill_with_console(
    skill: Arc<Skill>,
    listener: TcpListener,
    dir: impl AsRef<std::path::Path>,
) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), console = %dir.as_ref().display(), "skill service listening");
    axum::serve(listener, with_console(skill_router(skill), dir)).await
}
