use axum::extract::rejection::{JsonRejection, PathRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use examd_core::exam::ExamError;
use examd_core::report::ReportError;
use examd_core::session::SessionError;
use examd_core::store::StoreError;
use examd_core::AuthError;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Stable machine-readable error codes of the HTTP API.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    BadCredentials,
    Unauthorized,
    Forbidden,
    InvalidState,
    DeadlineExceeded,
    NotInForm,
    InvalidChoice,
    DuplicateSession,
    NoSession,
    InsufficientBank,
    InvalidQuestion,
    InvalidAccount,
    DuplicateUser,
    UserNotFound,
    NotRemovable,
    DurableWrite,
    StoreCorrupt,
    Integrity,
    BadRequest,
    NotFound,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 21] = [
        ErrorCode::BadCredentials,
        ErrorCode::Unauthorized,
        ErrorCode::Forbidden,
        ErrorCode::InvalidState,
        ErrorCode::DeadlineExceeded,
        ErrorCode::NotInForm,
        ErrorCode::InvalidChoice,
        ErrorCode::DuplicateSession,
        ErrorCode::NoSession,
        ErrorCode::InsufficientBank,
        ErrorCode::InvalidQuestion,
        ErrorCode::InvalidAccount,
        ErrorCode::DuplicateUser,
        ErrorCode::UserNotFound,
        ErrorCode::NotRemovable,
        ErrorCode::DurableWrite,
        ErrorCode::StoreCorrupt,
        ErrorCode::Integrity,
        ErrorCode::BadRequest,
        ErrorCode::NotFound,
        ErrorCode::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::BadCredentials => "BAD_CREDENTIALS",
            ErrorCode::Unauthorized => "UNAUTHORIZED",
            ErrorCode::Forbidden => "FORBIDDEN",
            ErrorCode::InvalidState => "INVALID_STATE",
            ErrorCode::DeadlineExceeded => "DEADLINE_EXCEEDED",
            ErrorCode::NotInForm => "NOT_IN_FORM",
            ErrorCode::InvalidChoice => "INVALID_CHOICE",
            ErrorCode::DuplicateSession => "DUPLICATE_SESSION",
            ErrorCode::NoSession => "NO_SESSION",
            ErrorCode::InsufficientBank => "INSUFFICIENT_BANK",
            ErrorCode::InvalidQuestion => "INVALID_QUESTION",
            ErrorCode::InvalidAccount => "INVALID_ACCOUNT",
            ErrorCode::DuplicateUser => "DUPLICATE_USER",
            ErrorCode::UserNotFound => "USER_NOT_FOUND",
            ErrorCode::NotRemovable => "NOT_REMOVABLE",
            ErrorCode::DurableWrite => "DURABLE_WRITE",
            ErrorCode::StoreCorrupt => "STORE_CORRUPT",
            ErrorCode::Integrity => "INTEGRITY",
            ErrorCode::BadRequest => "BAD_REQUEST",
            ErrorCode::NotFound => "NOT_FOUND",
            ErrorCode::Internal => "INTERNAL",
        }
    }

    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadCredentials | ErrorCode::Unauthorized => StatusCode::UNAUTHORIZED,
            ErrorCode::Forbidden => StatusCode::FORBIDDEN,
            ErrorCode::InvalidState
            | ErrorCode::DeadlineExceeded
            | ErrorCode::DuplicateSession
            | ErrorCode::DuplicateUser
            | ErrorCode::NotRemovable => StatusCode::CONFLICT,
            ErrorCode::NotInForm | ErrorCode::InvalidChoice | ErrorCode::BadRequest => {
                StatusCode::BAD_REQUEST
            }
            ErrorCode::NoSession | ErrorCode::UserNotFound | ErrorCode::NotFound => {
                StatusCode::NOT_FOUND
            }
            ErrorCode::InvalidQuestion | ErrorCode::InvalidAccount => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ErrorCode::InsufficientBank => StatusCode::SERVICE_UNAVAILABLE,
            ErrorCode::DurableWrite
            | ErrorCode::StoreCorrupt
            | ErrorCode::Integrity
            | ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Error body: `{"error": {"code": ..., "message": ..., "details": ...}}`.
#[derive(Debug)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn body(&self) -> Value {
        let mut err = serde_json::json!({
            "code": self.code.as_str(),
            "message": self.message,
        });
        if let Some(d) = &self.details {
            err["details"] = d.clone();
        }
        serde_json::json!({ "error": err })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self.body())).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        let code = match e {
            SessionError::InvalidState { .. } => ErrorCode::InvalidState,
            SessionError::DeadlineExceeded { .. } => ErrorCode::DeadlineExceeded,
            SessionError::NotInForm(_) => ErrorCode::NotInForm,
            SessionError::ChoiceOutOfRange(_) => ErrorCode::InvalidChoice,
            SessionError::DuplicateSession(_) => ErrorCode::DuplicateSession,
            SessionError::UnknownSession(_) => ErrorCode::NoSession,
            SessionError::Assembly(inner) => return inner.into(),
        };
        ApiError::new(code, message)
    }
}

impl From<ExamError> for ApiError {
    fn from(e: ExamError) -> Self {
        match &e {
            ExamError::InsufficientBank(report) => {
                let details = serde_json::to_value(report).unwrap_or(Value::Null);
                ApiError::new(ErrorCode::InsufficientBank, e.to_string()).with_details(details)
            }
            ExamError::NotInForm(_) => ApiError::new(ErrorCode::NotInForm, e.to_string()),
        }
    }
}

impl From<AuthError> for ApiError {
    fn from(e: AuthError) -> Self {
        let message = e.to_string();
        match e {
            AuthError::BadCredentials => ApiError::new(ErrorCode::BadCredentials, message),
            AuthError::Unauthenticated => ApiError::new(ErrorCode::Unauthorized, message),
            AuthError::Forbidden => ApiError::new(ErrorCode::Forbidden, message),
            AuthError::EmptyName => ApiError::new(ErrorCode::InvalidAccount, message),
            AuthError::Store(inner) => inner.into(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::Open { .. } => ErrorCode::Internal,
            StoreError::Corrupt { .. } => ErrorCode::StoreCorrupt,
            StoreError::DurableWrite(_) => ErrorCode::DurableWrite,
            StoreError::DuplicateUser(_) => ErrorCode::DuplicateUser,
            StoreError::UserNotFound(_) => ErrorCode::UserNotFound,
            StoreError::NotRemovable(_) => ErrorCode::NotRemovable,
            StoreError::InvalidAccount(_) => ErrorCode::InvalidAccount,
            StoreError::InvalidQuestion(defects) => {
                let details = serde_json::to_value(defects).unwrap_or(Value::Null);
                return ApiError::new(ErrorCode::InvalidQuestion, e.to_string())
                    .with_details(details);
            }
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        let code = match &e {
            ReportError::Integrity { .. } => ErrorCode::Integrity,
            ReportError::Csv(_) => ErrorCode::Internal,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(ErrorCode::BadRequest, e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::new(ErrorCode::BadRequest, e.body_text())
    }
}
