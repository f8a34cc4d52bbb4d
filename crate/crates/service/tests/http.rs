mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use common::*;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use socratic_service::http::router;
use tower::ServiceExt;

struct Api {
    h: Harness,
    app: Router,
}

impl Api {
    fn new() -> Api {
        let h = harness();
        let app = router(h.svc.clone());
        Api { h, app }
    }

    async fn raw(&self, method: &str, path: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
        let mut req = Request::builder().method(method).uri(path);
        let body = match body {
            Some(b) => {
                req = req.header("content-type", "application/json");
                Body::from(b)
            }
            None => Body::empty(),
        };
        let resp = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
    }

    async fn call(&self, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (s, b) = self.raw(method, &format!("/api/v1{path}"), body.map(|v| v.to_string())).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    async fn session(&self) -> (String, Value) {
        let (s, sub) =
            self.call("POST", "/submissions", Some(json!({"assignment_id": "sum-below", "source": P1}))).await;
        assert_eq!(s, StatusCode::CREATED);
        let (s, v) = self
            .call("POST", "/sessions", Some(json!({"submission_id": sub["submission_id"], "mode": "FORMATIVE", "seed": 5, "question_budget": 2})))
            .await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        (v["session_id"].as_str().unwrap().to_owned(), v)
    }
}

fn assert_error(v: &Value, code: &str) {
    assert_eq!(v["code"], code, "{v}");
    assert!(v["message"].is_string());
    assert!(v.get("detail").is_some());
}

#[tokio::test]
async fn lists_assignments() {
    let api = Api::new();
    let (s, v) = api.call("GET", "/assignments", None).await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|a| a["assignment_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["fill", "print-five", "sum-below"]);
}

#[tokio::test]
async fn submission_results() {
    let api = Api::new();
    let (s, v) = api.call("POST", "/submissions", Some(json!({"assignment_id": "sum-below", "source": P1}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["tests"].as_array().unwrap().len(), 3);
    assert!(v["tests"].as_array().unwrap().iter().all(|t| t["passed"] == true));
    let (s, v) =
        api.call("POST", "/submissions", Some(json!({"assignment_id": "sum-below", "source": "int main( {"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&v, "PARSE_ERROR");
    assert_eq!(v["detail"]["line"], 1);
    let (s, v) = api.call("POST", "/submissions", Some(json!({"assignment_id": "none", "source": P1}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "UNKNOWN_ASSIGNMENT");
    let (s, v) = api.call("POST", "/submissions", Some(json!({"source": P1}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error(&v, "VALIDATION");
}

#[tokio::test]
async fn a_whole_session_over_http() {
    let api = Api::new();
    let (id, v) = api.session().await;
    assert_eq!(v["state"], "TIER1_PENDING");
    let (s, v) = api.call("GET", &format!("/sessions/{id}/report"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error(&v, "SESSION_NOT_FINISHED");
    for _ in 0..20 {
        let (_, v) = api.call("GET", &format!("/sessions/{id}"), None).await;
        match v["state"].as_str().unwrap() {
            "TIER1_PENDING" => {
                let qid = v["current_question"]["question_id"].clone();
                let right = api.h.correct_index(&id);
                let (s, out) = api
                    .call(
                        "POST",
                        &format!("/sessions/{id}/tier1"),
                        Some(json!({"question_id": qid, "choice_index": right})),
                    )
                    .await;
                assert_eq!(s, StatusCode::OK);
                assert_eq!(out["outcome"], "TIER1_RECORDED");
                assert_eq!(out["session"]["state"], "TIER2_PENDING");
            }
            "TIER2_PENDING" | "SCAFFOLDING" => {
                let text = full_answer(&api.h.reference(&id));
                let (s, out) = api.call("POST", &format!("/sessions/{id}/tier2"), Some(json!({"text": text}))).await;
                assert_eq!(s, StatusCode::OK);
                assert_eq!(out["outcome"], "VERDICT");
                assert_eq!(out["verdict"]["action"], "PASS");
            }
            _ => break,
        }
    }
    let (s, a) = api.raw("GET", &format!("/api/v1/sessions/{id}/report"), None).await;
    assert_eq!(s, StatusCode::OK);
    let (_, b) = api.raw("GET", &format!("/api/v1/sessions/{id}/report"), None).await;
    assert_eq!(a, b);
    let r: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(r["final_grade"], 100);
    assert_eq!(a, api.h.svc.report(&id).unwrap().into_bytes());
}

#[tokio::test]
async fn session_errors_map_to_statuses() {
    let api = Api::new();
    let (id, v) = api.session().await;
    let qid = v["current_question"]["question_id"].clone();
    let (s, v) = api.call("POST", &format!("/sessions/{id}/tier2"), Some(json!({"text": "the loop"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error(&v, "WRONG_STATE");
    assert_eq!(v["detail"]["state"], "TIER1_PENDING");
    let (s, v) =
        api.call("POST", &format!("/sessions/{id}/tier1"), Some(json!({"question_id": qid, "choice_index": 9}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error(&v, "INVALID_CHOICE");
    let (s, _) =
        api.call("POST", &format!("/sessions/{id}/tier1"), Some(json!({"question_id": qid, "choice_index": 0}))).await;
    assert_eq!(s, StatusCode::OK);
    let (s, v) =
        api.call("POST", &format!("/sessions/{id}/tier1"), Some(json!({"question_id": qid, "choice_index": 0}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error(&v, "STALE_QUESTION");
    let (s, v) = api.call("POST", &format!("/sessions/{id}/tier2"), Some(json!({"text": "  "}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error(&v, "EMPTY_ANSWER");
    let (s, v) =
        api.call("POST", &format!("/sessions/{id}/message"), Some(json!({"text": "show me the solution"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["outcome"], "REPLY");
    assert_eq!(v["ruling"]["classification"], "SOLUTION_REQUEST");
    let (s, v) = api.call("GET", "/sessions/does-not-exist", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "UNKNOWN_SESSION");
    let (s, v) = api.call("POST", &format!("/sessions/{id}/abort"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["session"]["state"], "ABORTED");
    let (s, _) = api.call("GET", &format!("/sessions/{id}/report"), None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _) = api.call("GET", "/nowhere", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn summative_requires_a_token_over_http() {
    let api = Api::new();
    let (_, sub) = api.call("POST", "/submissions", Some(json!({"assignment_id": "sum-below", "source": P1}))).await;
    let req = json!({"submission_id": sub["submission_id"], "mode": "SUMMATIVE", "seed": 1});
    let (s, v) = api.call("POST", "/sessions", Some(req)).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    assert_error(&v, "PROCTOR_TOKEN_REQUIRED");
    let req = json!({"submission_id": sub["submission_id"], "mode": "SUMMATIVE", "seed": 1, "proctor_token": "t"});
    let (s, v) = api.call("POST", "/sessions", Some(req)).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["mode"], "SUMMATIVE");
    assert!(v["deadline"].is_u64());
}
