use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::json;
use xrepair_core::repair::{RepairError, TaskError};
use xrepair_core::shapley::ShapleyError;
use xrepair_core::{DcError, Table, TableError};

/// One located problem in submitted input.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(source: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            source,
            line: None,
            column: None,
            constraint: None,
            message: message.into(),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub diagnostics: Vec<Diagnostic>,
    pub last_table: Option<Table>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
            diagnostics: Vec::new(),
            last_table: None,
        }
    }

    pub fn not_found(what: &str) -> ApiError {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("{what} not found"),
        )
    }

    pub fn invalid(diagnostic: Diagnostic) -> ApiError {
        let mut e = ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_input",
            diagnostic.message.clone(),
        );
        e.diagnostics.push(diagnostic);
        e
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::CONFLICT, code, message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<TableError> for ApiError {
    fn from(e: TableError) -> Self {
        ApiError::invalid(Diagnostic::new("table", e.to_string()))
    }
}

pub fn dc_diagnostic(e: &DcError) -> Diagnostic {
    match e {
        DcError::Parse(p) => Diagnostic {
            line: Some(p.line),
            column: Some(p.column),
            ..Diagnostic::new("constraints", e.to_string())
        },
        DcError::Bind { dc, .. } | DcError::Type { dc, .. } => Diagnostic {
            constraint: Some(dc.clone()),
            ..Diagnostic::new("constraints", e.to_string())
        },
    }
}

impl From<DcError> for ApiError {
    fn from(e: DcError) -> Self {
        ApiError::invalid(dc_diagnostic(&e))
    }
}

impl From<RepairError> for ApiError {
    fn from(e: RepairError) -> Self {
        match e {
            RepairError::Constraint(dc) => dc.into(),
            RepairError::Rule { .. } => {
                ApiError::invalid(Diagnostic::new("algorithm", e.to_string()))
            }
            RepairError::Fixpoint { ref last, .. } => {
                let mut err = ApiError::conflict("no_fixpoint", e.to_string());
                err.last_table = Some((**last).clone());
                err
            }
            RepairError::BlackBox(_) | RepairError::Contract(_) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "black_box_failure", e.to_string())
            }
        }
    }
}

impl From<TaskError> for ApiError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Table(t) => t.into(),
            TaskError::Repair(r) => r.into(),
            TaskError::NotRepaired(_) => ApiError::conflict("not_repaired", e.to_string()),
        }
    }
}

impl From<ShapleyError> for ApiError {
    fn from(e: ShapleyError) -> Self {
        match e {
            ShapleyError::Repair(r) => r.into(),
            other => ApiError::invalid(Diagnostic::new("explain", other.to_string())),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({
            "code": self.code,
            "message": self.message,
        });
        if !self.diagnostics.is_empty() {
            body["diagnostics"] = json!(self.diagnostics);
        }
        if let Some(t) = &self.last_table {
            body["last_table"] = json!(t);
        }
        (self.status, Json(json!({ "error": body }))).into_response()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xrepair_core::repair::BlackBoxFailure;

    #[test]
    fn repair_errors_map_to_statuses() {
        let last = xrepair_core::parse_table("A\nx\n").unwrap();
        let e: ApiError = RepairError::Fixpoint {
            sweeps: 4,
            last: Box::new(last.clone()),
        }
        .into();
        assert_eq!(e.status, StatusCode::CONFLICT);
        assert_eq!(e.last_table, Some(last));
        let e: ApiError =
            RepairError::BlackBox(BlackBoxFailure::Timeout(std::time::Duration::from_secs(1)))
                .into();
        assert_eq!(e.status, StatusCode::BAD_GATEWAY);
        let e: ApiError = RepairError::Contract("dropped a row".into()).into();
        assert_eq!(e.status, StatusCode::BAD_GATEWAY);
    }
}
