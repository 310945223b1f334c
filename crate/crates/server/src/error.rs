use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("unknown pattern {0:?}")]
    UnknownPattern(String),
    #[error("{0}")]
    InvalidOp(String),
    #[error("no selection has been made")]
    NoSelection,
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownDataset(_) | ServiceError::UnknownSession(_) | ServiceError::UnknownPattern(_) => {
                StatusCode::NOT_FOUND
            }
            ServiceError::InvalidOp(_) | ServiceError::NoSelection => StatusCode::CONFLICT,
            ServiceError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}
