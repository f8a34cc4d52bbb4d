//! JSON over HTTP under `/api/v1`. Handlers hand the blocking service calls
//! to the blocking thread pool.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ServiceError;
use crate::service::{Action, Service, StartRequest};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body())).into_response()
    }
}

type Svc = Arc<Service>;
type Reply = Result<Response, ServiceError>;

async fn blocking<T, F>(svc: &Svc, f: F) -> Result<T, ServiceError>
where
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    let svc = svc.clone();
    tokio::task::spawn_blocking(move || f(&svc)).await.map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn body<T>(r: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    r.map(|Json(v)| v).map_err(|e| ServiceError::Validation(e.body_text()))
}

fn json<T: Serialize>(status: StatusCode, v: &T) -> Response {
    (status, Json(v)).into_response()
}

#[derive(Deserialize)]
struct SubmitRequest {
    assignment_id: String,
    source: String,
}

#[derive(Deserialize)]
struct Tier1Request {
    question_id: String,
    choice_index: usize,
}

#[derive(Deserialize)]
struct TextRequest {
    text: String,
}

#[derive(Deserialize, Default)]
struct AbortRequest {
    #[serde(default)]
    reason: Option<String>,
}

#[derive(Serialize)]
struct AssignmentSummary {
    assignment_id: String,
    title: String,
    tests: usize,
    question_budget: u32,
}

async fn assignments(State(svc): State<Svc>) -> Reply {
    let list: Vec<AssignmentSummary> = svc
        .assignments()
        .into_iter()
        .map(|a| AssignmentSummary {
            assignment_id: a.assignment_id,
            title: a.title,
            tests: a.tests.len(),
            question_budget: a.question_budget,
        })
        .collect();
    Ok(json(StatusCode::OK, &list))
}

async fn submit(State(svc): State<Svc>, req: Result<Json<SubmitRequest>, JsonRejection>) -> Reply {
    let req = body(req)?;
    let view = blocking(&svc, move |s| s.submit(&req.assignment_id, &req.source)).await?;
    Ok(json(StatusCode::CREATED, &view))
}

async fn start(State(svc): State<Svc>, req: Result<Json<StartRequest>, JsonRejection>) -> Reply {
    let req = body(req)?;
    let view = blocking(&svc, move |s| s.start(req)).await?;
    Ok(json(StatusCode::CREATED, &view))
}

async fn view(State(svc): State<Svc>, Path(id): Path<String>) -> Reply {
    let view = blocking(&svc, move |s| s.view(&id)).await?;
    Ok(json(StatusCode::OK, &view))
}

async fn act(svc: Svc, id: String, action: Action) -> Reply {
    let r = blocking(&svc, move |s| s.act(&id, action)).await?;
    Ok(json(StatusCode::OK, &r))
}

async fn tier1(
    State(svc): State<Svc>,
    Path(id): Path<String>,
    req: Result<Json<Tier1Request>, JsonRejection>,
) -> Reply {
    let r = body(req)?;
    act(svc, id, Action::Tier1 { question_id: r.question_id, choice_index: r.choice_index }).await
}

async fn tier2(State(svc): State<Svc>, Path(id): Path<String>, req: Result<Json<TextRequest>, JsonRejection>) -> Reply {
    act(svc, id, Action::Tier2 { text: body(req)?.text }).await
}

async fn message(
    State(svc): State<Svc>,
    Path(id): Path<String>,
    req: Result<Json<TextRequest>, JsonRejection>,
) -> Reply {
    act(svc, id, Action::Message { text: body(req)?.text }).await
}

async fn abort(State(svc): State<Svc>, Path(id): Path<String>, req: Option<Json<Value>>) -> Reply {
    let r: AbortRequest = req.and_then(|Json(v)| serde_json::from_value(v).ok()).unwrap_or_default();
    let reason = r.reason.filter(|x| !x.trim().is_empty()).unwrap_or_else(|| "ended by request".into());
    act(svc, id, Action::Abort { reason }).await
}

async fn report(State(svc): State<Svc>, Path(id): Path<String>) -> Reply {
    let text = blocking(&svc, move |s| s.report(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

async fn not_found() -> Response {
    let e = serde_json::json!({ "code": "NOT_FOUND", "message": "no such route", "detail": null });
    (StatusCode::NOT_FOUND, Json(e)).into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    let api = Router::new()
        .route("/assignments", get(assignments))
        .route("/submissions", post(submit))
        .route("/sessions", post(start))
        .route("/sessions/:id", get(view))
        .route("/sessions/:id/tier1", post(tier1))
        .route("/sessions/:id/tier2", post(tier2))
        .route("/sessions/:id/message", post(message))
        .route("/sessions/:id/abort", post(abort))
        .route("/sessions/:id/report", get(report));
    Router::new().nest("/api/v1", api).fallback(not_found).with_state(svc)
}
