//! HTTP + JSON front end for [`AnnotationQueue`].
//!
//! | route                               | success          |
//! |-------------------------------------|------------------|
//! | `GET  /api/queue/next?lang=&annotator=` | 200 lease, 204 empty |
//! | `GET  /api/item/{id}`               | 200 item         |
//! | `POST /api/item/{id}/question-rating` | 200 outcome    |
//! | `POST /api/item/{id}/answer-rating` | 200 outcome      |
//! | `POST /api/item/{id}/expansion`     | 200 outcome      |
//! | `POST /api/item/{id}/flags`         | 200 outcome      |
//! | `GET  /api/stats[?format=text]`     | 200 report       |
//! | `GET  /api/export`                  | 200 JSONL        |
//!
//! Errors: 404 unknown item, 409 stale version / foreign lease / wrong
//! state, 422 invalid payload, 500 event-log failure.

use std::collections::BTreeSet;
use std::future::Future;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{AnnotateError, AnnotationQueue, Flag, Rating};
use crate::io::benchmark_to_jsonl;
use crate::lang::LanguageCode;

pub type SharedQueue = Arc<Mutex<AnnotationQueue>>;

impl IntoResponse for AnnotateError {
    fn into_response(self) -> Response {
        let status = match &self {
            AnnotateError::NotFound(_) => StatusCode::NOT_FOUND,
            AnnotateError::Conflict { .. }
            | AnnotateError::LeaseHeld { .. }
            | AnnotateError::InvalidTransition { .. } => StatusCode::CONFLICT,
            AnnotateError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            AnnotateError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = json!({ "error": self.to_string() });
        if let AnnotateError::Conflict { current, .. } = &self {
            body["current_version"] = json!(current);
        }
        (status, Json(body)).into_response()
    }
}

fn lock(queue: &SharedQueue) -> MutexGuard<'_, AnnotationQueue> {
    // a panicked handler leaves no partial write behind: commits are a
    // single assignment after the log append
    queue.lock().unwrap_or_else(|p| p.into_inner())
}

#[derive(Debug, Deserialize)]
struct NextParams {
    lang: LanguageCode,
    annotator: String,
}

#[derive(Debug, Deserialize)]
struct QuestionRatingBody {
    version: u64,
    rating: Rating,
    rewrite: Option<String>,
    annotator: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AnswerRatingBody {
    version: u64,
    rating: Rating,
    correction: Option<String>,
    annotator: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ExpansionBody {
    version: u64,
    annotator: String,
    answers: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct FlagsBody {
    version: u64,
    flags: BTreeSet<Flag>,
    annotator: Option<String>,
}

#[derive(Debug, Deserialize)]
struct StatsParams {
    format: Option<String>,
}

async fn next_item(State(q): State<SharedQueue>, Query(p): Query<NextParams>) -> Result<Response, AnnotateError> {
    Ok(match lock(&q).next_item(&p.annotator, p.lang)? {
        Some(leased) => Json(leased).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

async fn get_item(State(q): State<SharedQueue>, Path(id): Path<String>) -> Result<Response, AnnotateError> {
    let queue = lock(&q);
    let item = queue.get(&id).ok_or(AnnotateError::NotFound(id))?;
    Ok(Json(item).into_response())
}

async fn question_rating(
    State(q): State<SharedQueue>,
    Path(id): Path<String>,
    Json(b): Json<QuestionRatingBody>,
) -> Result<Response, AnnotateError> {
    let out =
        lock(&q).submit_question_rating(&id, b.version, b.annotator.as_deref(), b.rating, b.rewrite.as_deref())?;
    Ok(Json(out).into_response())
}

async fn answer_rating(
    State(q): State<SharedQueue>,
    Path(id): Path<String>,
    Json(b): Json<AnswerRatingBody>,
) -> Result<Response, AnnotateError> {
    let out = lock(&q).submit_answer_rating(
        &id,
        b.version,
        b.annotator.as_deref(),
        b.rating,
        b.correction.as_deref(),
    )?;
    Ok(Json(out).into_response())
}

async fn expansion(
    State(q): State<SharedQueue>,
    Path(id): Path<String>,
    Json(b): Json<ExpansionBody>,
) -> Result<Response, AnnotateError> {
    let out = lock(&q).submit_expansion(&id, b.version, &b.annotator, &b.answers)?;
    Ok(Json(out).into_response())
}

async fn flags(
    State(q): State<SharedQueue>,
    Path(id): Path<String>,
    Json(b): Json<FlagsBody>,
) -> Result<Response, AnnotateError> {
    let out = lock(&q).flag_item(&id, b.version, b.annotator.as_deref(), b.flags)?;
    Ok(Json(out).into_response())
}

async fn stats(State(q): State<SharedQueue>, Query(p): Query<StatsParams>) -> Result<Response, AnnotateError> {
    let report = lock(&q).stats();
    match p.format.as_deref() {
        None | Some("json") => Ok(Json(report).into_response()),
        Some("text") => Ok((
            [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
            report.render_text(),
        )
            .into_response()),
        Some(other) => Err(AnnotateError::Validation(format!("unknown stats format `{other}`"))),
    }
}

async fn export(State(q): State<SharedQueue>) -> Response {
    let body = benchmark_to_jsonl(&lock(&q).export());
    ([(header::CONTENT_TYPE, "application/x-ndjson; charset=utf-8")], body).into_response()
}

pub fn router(queue: SharedQueue) -> Router {
    Router::new()
        .route("/api/queue/next", get(next_item))
        .route("/api/item/{id}", get(get_item))
        .route("/api/item/{id}/question-rating", post(question_rating))
        .route("/api/item/{id}/answer-rating", post(answer_rating))
        .route("/api/item/{id}/expansion", post(expansion))
        .route("/api/item/{id}/flags", post(flags))
        .route("/api/stats", get(stats))
        .route("/api/export", get(export))
        .with_state(queue)
}

/// Serves until `shutdown` resolves, then syncs the event log.
pub async fn serve(
    listener: tokio::net::TcpListener,
    queue: SharedQueue,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(queue.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    lock(&queue).sync().map_err(std::io::Error::other)
}
