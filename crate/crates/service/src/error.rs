use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use coadapt_core::Error as CoreError;
use serde::Serialize;
use serde_json::Value;

/// Uniform error body: `{code, message, detail}`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                detail: Value::Null,
            },
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = detail;
        self
    }

    pub fn session_not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "session-not-found", format!("no session {id}"))
            .with_detail(serde_json::json!({ "session": id }))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::InfeasibleScenario(v) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "infeasible-scenario", message)
                    .with_detail(serde_json::to_value(v).unwrap_or(Value::Null))
            }
            CoreError::DimensionMismatch { what, expected, found } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "dimension-mismatch", message)
                    .with_detail(serde_json::json!({ "what": what, "expected": expected, "found": found }))
            }
            CoreError::OutOfDomain { .. } | CoreError::Invalid(_) | CoreError::Json(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-input", message)
            }
            CoreError::Io(_) => ApiError::internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
