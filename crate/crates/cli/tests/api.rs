use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use base64::Engine;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::sync::Arc;
use svrt_cli::server::router;
use svrt_core::harness::{SessionParams, SessionRegistry};
use svrt_core::problems::ProblemId;
use tower::ServiceExt;

fn app_with(k: usize, max: usize) -> (Router, Arc<SessionRegistry>) {
    let params = SessionParams {
        k_consecutive: k,
        max_trials: max,
        image_size: 64,
    };
    let problems = vec![ProblemId::new(1).unwrap(), ProblemId::new(2).unwrap()];
    let reg = Arc::new(SessionRegistry::new(problems, params, 3).unwrap());
    (router(reg.clone()), reg)
}

fn app(k: usize, max: usize) -> Router {
    app_with(k, max).0
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or(Value::Null)
    };
    (status, value)
}

async fn open(app: &Router, problem: u32) -> String {
    let (status, body) = call(app, Method::POST, "/api/session", Some(json!({ "problem": problem }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn next_returns_a_decodable_image_and_is_idempotent() {
    let app = app(10, 50);
    let id = open(&app, 2).await;
    let (status, a) = call(&app, Method::GET, &format!("/api/session/{id}/next"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((a["trial_index"].as_u64(), a["width"].as_u64(), a["height"].as_u64()), (Some(0), Some(64), Some(64)));
    let pixels = base64::engine::general_purpose::STANDARD
        .decode(a["pixels"].as_str().unwrap())
        .unwrap();
    assert_eq!(pixels.len(), 64 * 64);
    assert!(pixels.contains(&0) && pixels.contains(&255));
    let (_, b) = call(&app, Method::GET, &format!("/api/session/{id}/next"), None).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn answer_reveals_truth_and_history_records_it() {
    let app = app(10, 50);
    let id = open(&app, 1).await;
    for i in 0..3u64 {
        let (_, next) = call(&app, Method::GET, &format!("/api/session/{id}/next"), None).await;
        assert_eq!(next["trial_index"].as_u64(), Some(i));
        let (status, out) =
            call(&app, Method::POST, &format!("/api/session/{id}/answer"), Some(json!({ "label": 1 }))).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(out["correct"].as_bool(), Some(out["true_label"] == 1));
        assert_eq!(out["status"], "active");
        assert_eq!(out["trials"].as_u64(), Some(i + 1));
    }
    let (status, history) = call(&app, Method::GET, &format!("/api/session/{id}/history"), None).await;
    assert_eq!(status, StatusCode::OK);
    let history = history.as_array().unwrap();
    assert_eq!(history.len(), 3);
    for (i, h) in history.iter().enumerate() {
        assert_eq!(h["trial_index"].as_u64(), Some(i as u64));
        assert_eq!(h["given_label"], 1);
        assert_eq!(h["correct"].as_bool(), Some(h["true_label"] == 1));
        assert!(!h["pixels"].as_str().unwrap().is_empty());
    }
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let app = app(10, 50);
    let (status, body) = call(&app, Method::GET, "/api/session/feedface/next", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "unknown_session");
    let (status, _) = call(&app, Method::POST, "/api/session/feedface/answer", Some(json!({ "label": 0 }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = open(&app, 1).await;
    // Answer before any image was shown.
    let (status, body) = call(&app, Method::POST, &format!("/api/session/{id}/answer"), Some(json!({ "label": 0 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "session_conflict");
    call(&app, Method::GET, &format!("/api/session/{id}/next"), None).await;
    let (status, _) = call(&app, Method::POST, &format!("/api/session/{id}/answer"), Some(json!({ "label": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, Method::POST, &format!("/api/session/{id}/answer"), Some(json!({ "label": 1 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, _) = call(&app, Method::POST, &format!("/api/session/{id}/answer"), Some(json!({ "label": 2 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = call(&app, Method::POST, "/api/session", Some(json!({ "problem": 3 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "unknown_problem");
    // Served problems only.
    let (status, _) = call(&app, Method::POST, "/api/session", Some(json!({ "problem": 4 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

/// Play a session to the end through the API. The client cannot see the
/// true label before answering, so the test reads it from the registry.
async fn finish(app: &Router, reg: &SessionRegistry, problem: u32, correct: bool) -> (String, Value) {
    let id = open(app, problem).await;
    loop {
        let (status, _) = call(app, Method::GET, &format!("/api/session/{id}/next"), None).await;
        assert_eq!(status, StatusCode::OK);
        let truth = reg.with_session(&id, |s| s.next_trial()).unwrap().true_label.get();
        let label = if correct { truth } else { 1 - truth };
        let (_, out) =
            call(app, Method::POST, &format!("/api/session/{id}/answer"), Some(json!({ "label": label }))).await;
        if out["status"] != "active" {
            return (id, out);
        }
    }
}

#[tokio::test]
async fn cohort_counts_finished_sessions() {
    let (app, reg) = app_with(10, 50);
    let (status, empty) = call(&app, Method::GET, "/api/cohort/1", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(empty, json!({ "p_a": 0, "p_n": 0, "n": 0, "accuracy": null }));

    for _ in 0..3 {
        let (_, out) = finish(&app, &reg, 1, true).await;
        assert_eq!((out["status"].as_str(), out["trials"].as_u64()), (Some("solved"), Some(10)));
    }
    let (_, out) = finish(&app, &reg, 1, false).await;
    assert_eq!((out["status"].as_str(), out["trials"].as_u64()), (Some("failed"), Some(50)));
    // An unfinished session does not count.
    let open_id = open(&app, 1).await;
    call(&app, Method::GET, &format!("/api/session/{open_id}/next"), None).await;

    let (_, body) = call(&app, Method::GET, "/api/cohort/1", None).await;
    assert_eq!(body, json!({ "p_a": 3, "p_n": 1, "n": 4, "accuracy": 0.875 }));
    let (status, body) = call(&app, Method::GET, "/api/cohort/2", None).await;
    assert_eq!((status, body["n"].as_u64()), (StatusCode::OK, Some(0)));
    let (status, _) = call(&app, Method::GET, "/api/cohort/99", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn finished_sessions_refuse_more_trials() {
    let (app, reg) = app_with(2, 4);
    let (id, out) = finish(&app, &reg, 2, true).await;
    assert_eq!((out["status"].as_str(), out["trials"].as_u64()), (Some("solved"), Some(2)));
    let (status, body) = call(&app, Method::GET, &format!("/api/session/{id}/next"), None).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::CONFLICT, Some("session_conflict")));
    let (status, history) = call(&app, Method::GET, &format!("/api/session/{id}/history"), None).await;
    assert_eq!((status, history.as_array().map(Vec::len)), (StatusCode::OK, Some(2)));
}
