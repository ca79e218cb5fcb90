use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use uuid::Uuid;
use xrepair_core::repair::checked_repair;
use xrepair_core::shapley::{cell_players, Imputation, Mode, DEFAULT_ENUMERATION_CAP};
use xrepair_core::{diff_tables, parse_dcs, parse_table, CellRef, DenialConstraint, Table, Value};

use crate::error::{ApiError, Diagnostic};
use crate::jobs::{CellMethod, ExplainParams, JobRecord, JobStatus, DEFAULT_SAMPLES};
use crate::state::{AppState, Repaired, Session};

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/repair", post(run_repair))
        .route("/sessions/{id}/explain", post(submit_explain))
        .route("/sessions/{id}/cells", axum::routing::patch(edit_cells))
        .route(
            "/sessions/{id}/constraints",
            axum::routing::put(edit_constraints),
        )
        .route("/jobs/{id}", get(get_job))
        .route("/algorithms", get(list_algorithms))
        .with_state(state)
}

type ApiResult = Result<Response, ApiError>;

// Ids are uuids; anything else cannot name a stored object.
fn check_id(id: &str, what: &str) -> Result<(), ApiError> {
    Uuid::parse_str(id)
        .map(|_| ())
        .map_err(|_| ApiError::not_found(what))
}

fn bad_body(e: impl std::fmt::Display) -> ApiError {
    ApiError::invalid(Diagnostic::new("body", e.to_string()))
}

// Json extractor whose rejection is a 422 in our error format.
struct Body<T>(T);

impl<S: Send + Sync, T: serde::de::DeserializeOwned> axum::extract::FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, ApiError> {
        let Json(v) = Json::<T>::from_request(req, state)
            .await
            .map_err(|e| bad_body(e.body_text()))?;
        Ok(Body(v))
    }
}

fn parse_constraints(text: &str, dirty: &Table) -> Result<Vec<DenialConstraint>, ApiError> {
    let dcs = parse_dcs(text).map_err(|e| {
        ApiError::invalid(Diagnostic {
            line: Some(e.line),
            column: Some(e.column),
            ..Diagnostic::new("constraints", e.to_string())
        })
    })?;
    for dc in &dcs {
        dc.bind(dirty.schema())?;
    }
    Ok(dcs)
}

#[derive(Deserialize)]
struct CreateSession {
    table: String,
    #[serde(default)]
    constraints: String,
    #[serde(default = "reference")]
    algorithm: String,
}

fn reference() -> String {
    "reference".into()
}

async fn create_session(
    State(state): State<AppState>,
    Body(req): Body<CreateSession>,
) -> ApiResult {
    let dirty = parse_table(&req.table)?;
    let constraints = parse_constraints(&req.constraints, &dirty)?;
    if state.algorithm(&req.algorithm).is_none() {
        return Err(ApiError::invalid(Diagnostic::new(
            "algorithm",
            format!(
                "unknown algorithm {:?}; available: {}",
                req.algorithm,
                state.algorithm_names().join(", ")
            ),
        )));
    }
    let session = Session {
        id: Uuid::new_v4().to_string(),
        revision: 0,
        algorithm: req.algorithm,
        dirty,
        constraints,
        repaired: None,
    };
    let handle = state.insert_session(session)?;
    let s = handle.read().await;
    Ok((StatusCode::CREATED, Json(s.view())).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    check_id(&id, "session")?;
    let handle = state.session(&id)?;
    let s = handle.read().await;
    Ok(Json(s.view()).into_response())
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    check_id(&id, "session")?;
    let handle = state.session(&id)?;
    // wait for writers on this session to finish
    let _guard = handle.write().await;
    state.remove_session(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

fn repair_payload(s: &Session, recomputed: bool) -> Response {
    let r = s.repaired.as_ref().expect("repaired");
    Json(json!({
        "session": s.id,
        "revision": s.revision,
        "clean": r.clean,
        "changes": r.changes,
        "recomputed": recomputed,
    }))
    .into_response()
}

async fn run_repair(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    check_id(&id, "session")?;
    let handle = state.session(&id)?;
    let mut s = handle.write().await;
    if s.repaired.is_some() {
        return Ok(repair_payload(&s, false));
    }
    let alg = state
        .algorithm(&s.algorithm)
        .ok_or_else(|| ApiError::internal(format!("algorithm {:?} is gone", s.algorithm)))?;
    let (dcs, dirty) = (s.constraints.clone(), s.dirty.clone());
    let clean = tokio::task::spawn_blocking(move || checked_repair(&*alg, &dcs, &dirty))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let changes = diff_tables(&s.dirty, &clean).map_err(|e| ApiError::internal(e.to_string()))?;
    s.repaired = Some(Repaired { clean, changes });
    state.persist(&s)?;
    Ok(repair_payload(&s, true))
}

// A cell given as `{"row": 5, "attr": "Country"}` or as `"5:Country"`.
fn parse_target(v: &serde_json::Value) -> Result<CellRef, ApiError> {
    match v {
        serde_json::Value::String(t) => Ok(CellRef::parse(t)?),
        other => serde_json::from_value(other.clone()).map_err(bad_body),
    }
}

// Untagged and flattened serde forms buffer numbers in a way that loses
// arbitrary-precision values, so these bodies are spelled out by hand.
#[derive(Deserialize)]
struct ExplainRequest {
    target: serde_json::Value,
    mode: Mode,
    #[serde(default)]
    method: CellMethod,
    #[serde(default = "default_samples")]
    m: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    imputation: Imputation,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

async fn submit_explain(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<ExplainRequest>,
) -> ApiResult {
    check_id(&id, "session")?;
    let target = parse_target(&req.target)?;
    let params = ExplainParams {
        mode: req.mode,
        method: req.method,
        m: req.m,
        seed: req.seed,
        imputation: req.imputation,
    };
    if params.mode == Mode::Cells && params.method == CellMethod::Sampling && params.m == 0 {
        return Err(ApiError::invalid(Diagnostic::new(
            "explain",
            "m must be at least 1",
        )));
    }
    let handle = state.session(&id)?;
    let s = handle.read().await;
    s.dirty.resolve(&target)?;
    let Some(repaired) = &s.repaired else {
        return Err(ApiError::conflict(
            "repair_required",
            format!("revision {} has not been repaired yet", s.revision),
        ));
    };
    let Some(change) = repaired.changes.iter().find(|c| c.cell == target) else {
        return Err(ApiError::conflict(
            "not_repaired",
            format!("{target} was not changed by the repair; only changed cells are explainable"),
        ));
    };
    let job = JobRecord {
        id: Uuid::new_v4().to_string(),
        session: s.id.clone(),
        revision: s.revision,
        target,
        params,
        status: JobStatus::Pending,
        result: None,
        error: None,
        algorithm: s.algorithm.clone(),
        table: s.dirty.clone(),
        constraints: s.constraints.iter().map(ToString::to_string).collect(),
        expected: change.after.clone(),
    };
    if job.params.mode == Mode::Cells && job.params.method == CellMethod::Exact {
        let players = cell_players(&job.task().map_err(ApiError::internal)?).len();
        if players > DEFAULT_ENUMERATION_CAP {
            return Err(ApiError::invalid(Diagnostic::new(
                "explain",
                format!("{players} cells exceed the enumeration cap of {DEFAULT_ENUMERATION_CAP}; use sampling"),
            )));
        }
    }
    drop(s);
    let body = json!(job.view(false));
    state.submit(job)?;
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    check_id(&id, "job")?;
    let job = state.job(&id).ok_or_else(|| ApiError::not_found("job"))?;
    let stale = state.revision_of(&job.session).await != Some(job.revision);
    Ok(Json(job.view(stale)).into_response())
}

#[derive(Deserialize)]
struct CellEdit {
    #[serde(rename = "ref")]
    cell: serde_json::Value,
    value: Value,
}

async fn edit_cells(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<serde_json::Value>,
) -> ApiResult {
    check_id(&id, "session")?;
    // either {"edits": [...]} or a single {"ref", "value"}
    let edits: Vec<CellEdit> = match req.get("edits") {
        Some(list) => serde_json::from_value(list.clone()),
        None => serde_json::from_value(req).map(|e| vec![e]),
    }
    .map_err(bad_body)?;
    let handle = state.session(&id)?;
    let mut s = handle.write().await;
    let mut table = s.dirty.clone();
    for edit in edits {
        let pos = table.resolve(&parse_target(&edit.cell)?)?;
        table.set(pos, edit.value);
    }
    let mut next = s.clone();
    next.dirty = table;
    next.revision += 1;
    next.repaired = None;
    state.persist(&next)?;
    *s = next;
    Ok(Json(s.view()).into_response())
}

#[derive(Deserialize)]
struct ConstraintEdit {
    constraints: String,
}

async fn edit_constraints(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<ConstraintEdit>,
) -> ApiResult {
    check_id(&id, "session")?;
    let handle = state.session(&id)?;
    let mut s = handle.write().await;
    let constraints = parse_constraints(&req.constraints, &s.dirty)?;
    let mut next = s.clone();
    next.constraints = constraints;
    next.revision += 1;
    next.repaired = None;
    state.persist(&next)?;
    *s = next;
    Ok(Json(s.view()).into_response())
}

async fn list_algorithms(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "algorithms": state.algorithm_names() }))
}
