use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use padkit_core::categorizer::SessionError;
use padkit_core::graphics::GraphicsError;
use padkit_core::metrics::MetricsError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::REVISION_HEADER;

/// Error body `{code, message, location}` with its HTTP status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    #[serde(skip)]
    pub revision: u64,
    pub code: &'static str,
    pub message: String,
    pub location: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            revision: 0,
            code,
            message: message.into(),
            location: Value::Null,
        }
    }

    pub fn at(mut self, location: Value) -> Self {
        self.location = location;
        self
    }

    pub fn with_revision(mut self, revision: u64) -> Self {
        self.revision = revision;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status;
        let revision = self.revision;
        let mut response = (status, axum::Json(&self)).into_response();
        response
            .headers_mut()
            .insert(REVISION_HEADER, revision.into());
        response
    }
}

impl From<SessionError> for ApiError {
    fn from(err: SessionError) -> Self {
        use SessionError as E;
        let message = err.to_string();
        let (status, code, location) = match &err {
            E::UnknownNode(n) => (StatusCode::NOT_FOUND, "unknown_node", json!({ "node": n })),
            E::UnknownCategory(c) => (
                StatusCode::NOT_FOUND,
                "unknown_category",
                json!({ "category": c }),
            ),
            E::AlreadyGrouped(n) => (
                StatusCode::CONFLICT,
                "already_grouped",
                json!({ "node": n }),
            ),
            E::NotGrouped(n) => (StatusCode::CONFLICT, "not_grouped", json!({ "node": n })),
            E::NotAMember { node, category } => (
                StatusCode::CONFLICT,
                "not_a_member",
                json!({ "node": node, "category": category }),
            ),
            E::NestedSubcategory(c) => (
                StatusCode::CONFLICT,
                "nested_subcategory",
                json!({ "category": c }),
            ),
            E::AlreadyParented(c) => (
                StatusCode::CONFLICT,
                "already_parented",
                json!({ "category": c }),
            ),
            E::DuplicateTriad(ru) => (StatusCode::CONFLICT, "duplicate_triad", json!({ "ru": ru })),
            E::Invalid(report) => (
                StatusCode::CONFLICT,
                "invalid_result",
                report
                    .errors
                    .first()
                    .map_or(Value::Null, |issue| json!(issue.location)),
            ),
            E::KindMismatch { node, .. } => (
                StatusCode::BAD_REQUEST,
                "kind_mismatch",
                json!({ "node": node }),
            ),
            E::SameNode => (StatusCode::BAD_REQUEST, "same_node", Value::Null),
            E::MultilineText(field) | E::EmptyText(field) => (
                StatusCode::BAD_REQUEST,
                "invalid_text",
                json!({ "field": field }),
            ),
            E::MissingCategoryText => (
                StatusCode::BAD_REQUEST,
                "missing_category_text",
                json!({ "field": "category_text" }),
            ),
            E::EmptyMembers => (StatusCode::BAD_REQUEST, "empty_members", Value::Null),
            E::DuplicateMember(n) => (
                StatusCode::BAD_REQUEST,
                "duplicate_member",
                json!({ "node": n }),
            ),
            E::DuplicateCategory(c) => (
                StatusCode::BAD_REQUEST,
                "duplicate_category",
                json!({ "category": c }),
            ),
            E::MixedKinds => (StatusCode::BAD_REQUEST, "mixed_kinds", Value::Null),
            E::Replay(_) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                "replay_failed",
                Value::Null,
            ),
        };
        ApiError::new(status, code, message).at(location)
    }
}

impl From<MetricsError> for ApiError {
    fn from(err: MetricsError) -> Self {
        let code = match err {
            MetricsError::EmptyCorpus => "empty_corpus",
            MetricsError::NoTriads => "no_triads",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, err.to_string())
    }
}

impl From<GraphicsError> for ApiError {
    fn from(err: GraphicsError) -> Self {
        let message = err.to_string();
        match err {
            GraphicsError::UnknownCategory(label) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_category", message)
                    .at(json!({ "label": label }))
            }
            GraphicsError::KindMismatch { label, .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "kind_mismatch", message)
                    .at(json!({ "label": label }))
            }
            GraphicsError::NotMetricCategory(label) => {
                ApiError::new(StatusCode::BAD_REQUEST, "not_metric_category", message)
                    .at(json!({ "label": label }))
            }
            GraphicsError::Cycle(ids) => ApiError::new(StatusCode::CONFLICT, "cycle", message)
                .at(json!({ "categories": ids })),
            GraphicsError::EmptyCounts | GraphicsError::InvalidWidths { .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid_widths", message)
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}
