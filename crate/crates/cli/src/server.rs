//! JSON API for the human-trial front end.

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::sync::Arc;
use svrt_core::harness::{human_accuracy, AnswerOutcome, SessionRegistry, TrialImage};
use svrt_core::problems::{ClassLabel, ProblemId};
use svrt_core::Error;

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::SessionConflict { .. } => StatusCode::CONFLICT,
            Error::InvalidArgument(_) | Error::UnknownProblem(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = json!({ "error": self.0.kind(), "message": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = Arc<SessionRegistry>;

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub problem: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NextResponse {
    pub trial_index: usize,
    pub width: u32,
    pub height: u32,
    /// Base64 of row-major 8-bit grayscale pixels.
    pub pixels: String,
}

#[derive(Debug, Deserialize)]
pub struct AnswerRequest {
    pub label: u8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub trial_index: usize,
    pub width: u32,
    pub height: u32,
    pub pixels: String,
    pub true_label: u8,
    pub given_label: Option<u8>,
    pub correct: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CohortResponse {
    pub p_a: u64,
    pub p_n: u64,
    pub n: u64,
    /// Absent while no session has finished.
    pub accuracy: Option<f64>,
}

fn encode(image: &TrialImage) -> String {
    STANDARD.encode(&image.pixels)
}

async fn create(State(reg): State<Shared>, Json(req): Json<CreateRequest>) -> ApiResult<CreateResponse> {
    let problem = ProblemId::new(req.problem)?;
    Ok(Json(CreateResponse {
        session_id: reg.create(problem)?,
    }))
}

async fn next(State(reg): State<Shared>, Path(id): Path<String>) -> ApiResult<NextResponse> {
    let resp = reg.with_session(&id, |s| {
        let trial = s.next_trial()?;
        let image = s.image(&trial)?;
        Ok(NextResponse {
            trial_index: trial.index,
            width: image.width,
            height: image.height,
            pixels: encode(&image),
        })
    })?;
    Ok(Json(resp))
}

async fn answer(
    State(reg): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<AnswerRequest>,
) -> ApiResult<AnswerOutcome> {
    let label = ClassLabel::new(req.label)?;
    Ok(Json(reg.answer(&id, label)?))
}

async fn history(State(reg): State<Shared>, Path(id): Path<String>) -> ApiResult<Vec<HistoryEntry>> {
    let entries = reg.with_session(&id, |s| {
        s.history()
            .iter()
            .filter(|t| t.given_label.is_some())
            .map(|t| {
                let image = s.image(t)?;
                Ok(HistoryEntry {
                    trial_index: t.index,
                    width: image.width,
                    height: image.height,
                    pixels: encode(&image),
                    true_label: t.true_label.get(),
                    given_label: t.given_label.map(ClassLabel::get),
                    correct: t.correct,
                })
            })
            .collect()
    })?;
    Ok(Json(entries))
}

async fn cohort(State(reg): State<Shared>, Path(problem): Path<u32>) -> ApiResult<CohortResponse> {
    let stats = reg.cohort(ProblemId::new(problem)?);
    let accuracy = match human_accuracy(&stats) {
        Ok(a) => Some(a),
        Err(Error::EmptyCohort) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Json(CohortResponse {
        p_a: stats.p_a,
        p_n: stats.p_n,
        n: stats.n,
        accuracy,
    }))
}

pub fn router(registry: Shared) -> Router {
    Router::new()
        .route("/api/session", post(create))
        .route("/api/session/:id/next", get(next))
        .route("/api/session/:id/answer", post(answer))
        .route("/api/session/:id/history", get(history))
        .route("/api/cohort/:problem", get(cohort))
        .with_state(registry)
}
