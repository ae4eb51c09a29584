use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use padkit_core::graphics::{self, DagOptions, DyadCount, GraphDoc, Widths};
use padkit_core::ingest::{to_json_string, to_json_value};
use padkit_core::metrics;
use padkit_core::{CategoryId, Kind, NodeId, RuId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;
use crate::{AppState, Snapshot, REVISION_HEADER};

type Shared = Arc<AppState>;
type ApiResult = Result<Response, ApiError>;

const MAX_POLL: Duration = Duration::from_secs(60);
const DEFAULT_POLL: Duration = Duration::from_secs(25);

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/session", get(session))
        .route("/api/corpus", get(corpus))
        .route("/api/pool", get(pool))
        .route("/api/stats", get(stats))
        .route("/api/relabel-log.csv", get(relabel_log))
        .route("/api/changes", get(changes))
        .route("/api/graphs/{file}", get(graph))
        .route("/api/graphs/dyads/{file}", get(dyads))
        .route("/api/graphs/taxonomy/{file}", get(taxonomy))
        .route("/api/codes", post(add_code))
        .route("/api/triads", post(add_triad))
        .route("/api/group", post(group))
        .route("/api/spawn", post(spawn))
        .route("/api/orphan", post(orphan))
        .route("/api/subcategory", post(subcategory))
        .route("/api/supercategory", post(supercategory))
        .route("/api/category/{id}/text", post(category_text))
        .route("/api/save", post(save))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state)
}

fn envelope<T: Serialize>(revision: u64, data: T) -> Response {
    let mut response = Json(json!({ "revision": revision, "data": data })).into_response();
    response
        .headers_mut()
        .insert(REVISION_HEADER, revision.into());
    response
}

fn text(revision: u64, content_type: &'static str, body: String) -> Response {
    let mut response = ([(header::CONTENT_TYPE, content_type)], body).into_response();
    response
        .headers_mut()
        .insert(REVISION_HEADER, revision.into());
    response
}

fn dot(snapshot: &Snapshot, doc: &GraphDoc) -> Response {
    text(
        snapshot.revision,
        "text/vnd.graphviz; charset=utf-8",
        doc.to_dot(),
    )
}

fn body<T: DeserializeOwned>(
    payload: Result<Json<T>, JsonRejection>,
    revision: u64,
) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::from(e).with_revision(revision))
}

fn query<T>(params: Result<Query<T>, QueryRejection>, revision: u64) -> Result<T, ApiError> {
    params
        .map(|Query(v)| v)
        .map_err(|e| ApiError::from(e).with_revision(revision))
}

/// Strips the `.dot` suffix of a path segment.
fn dot_stem(file: &str, revision: u64) -> Result<&str, ApiError> {
    file.strip_suffix(".dot").ok_or_else(|| {
        ApiError::not_found(format!("unknown graph `{file}`")).with_revision(revision)
    })
}

async fn session(State(state): State<Shared>) -> Response {
    let snap = state.snapshot();
    envelope(
        snap.revision,
        json!({ "id": state.session_id(), "revision": snap.revision }),
    )
}

async fn corpus(State(state): State<Shared>) -> Response {
    let snap = state.snapshot();
    envelope(snap.revision, to_json_value(snap.corpus()))
}

#[derive(Deserialize)]
struct PoolQuery {
    kind: Option<String>,
}

fn parse_kind(text: &str, revision: u64) -> Result<Kind, ApiError> {
    text.parse::<Kind>().map_err(|_| {
        ApiError::bad_request(format!("unknown kind `{text}`, expected P, A or D"))
            .at(json!({ "field": "kind" }))
            .with_revision(revision)
    })
}

async fn pool(
    State(state): State<Shared>,
    params: Result<Query<PoolQuery>, QueryRejection>,
) -> ApiResult {
    let snap = state.snapshot();
    let params = query(params, snap.revision)?;
    let kind = match params.kind.as_deref().filter(|k| !k.is_empty()) {
        None => None,
        Some(k) => Some(parse_kind(k, snap.revision)?),
    };
    Ok(envelope(snap.revision, snap.session.pool(kind)))
}

async fn stats(State(state): State<Shared>) -> ApiResult {
    let snap = state.snapshot();
    let set = metrics::all_metrics(snap.corpus())
        .map_err(|e| ApiError::from(e).with_revision(snap.revision))?;
    Ok(envelope(snap.revision, set))
}

async fn relabel_log(State(state): State<Shared>) -> Response {
    let snap = state.snapshot();
    text(
        snap.revision,
        "text/csv; charset=utf-8",
        snap.session.relabel_log_csv(),
    )
}

#[derive(Deserialize)]
struct GraphQuery {
    #[serde(default)]
    node_level: bool,
}

async fn graph(
    State(state): State<Shared>,
    Path(file): Path<String>,
    params: Result<Query<GraphQuery>, QueryRejection>,
) -> ApiResult {
    let snap = state.snapshot();
    let r = snap.revision;
    let params = query(params, r)?;
    let doc = match dot_stem(&file, r)? {
        "dag" => graphics::emit_causality_dag(
            snap.corpus(),
            &DagOptions {
                node_level: params.node_level,
                ..DagOptions::default()
            },
        ),
        "triads" => graphics::emit_triads_graphic(snap.corpus(), Widths::default()),
        other => {
            return Err(ApiError::not_found(format!("unknown graph `{other}`")).with_revision(r))
        }
    }
    .map_err(|e| ApiError::from(e).with_revision(r))?;
    Ok(dot(&snap, &doc))
}

#[derive(Deserialize)]
struct DyadQuery {
    #[serde(default)]
    count: DyadCountParam,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum DyadCountParam {
    #[default]
    Occurrence,
    RuBinary,
}

async fn dyads(
    State(state): State<Shared>,
    Path(file): Path<String>,
    params: Result<Query<DyadQuery>, QueryRejection>,
) -> ApiResult {
    let snap = state.snapshot();
    let r = snap.revision;
    let count = match query(params, r)?.count {
        DyadCountParam::Occurrence => DyadCount::Occurrence,
        DyadCountParam::RuBinary => DyadCount::RuBinary,
    };
    let label = dot_stem(&file, r)?;
    let doc = graphics::emit_pa_dyads(snap.corpus(), label, count, Widths::default())
        .map_err(|e| ApiError::from(e).with_revision(r))?;
    Ok(dot(&snap, &doc))
}

async fn taxonomy(State(state): State<Shared>, Path(file): Path<String>) -> ApiResult {
    let snap = state.snapshot();
    let r = snap.revision;
    let kind = parse_kind(dot_stem(&file, r)?, r)?;
    let doc = graphics::emit_taxonomy(snap.corpus(), kind)
        .map_err(|e| ApiError::from(e).with_revision(r))?;
    Ok(dot(&snap, &doc))
}

#[derive(Deserialize)]
struct ChangesQuery {
    #[serde(default)]
    since: u64,
    timeout_ms: Option<u64>,
}

/// Long poll: answers as soon as the revision exceeds `since`, or when the
/// timeout expires, with the operations committed after `since`.
async fn changes(
    State(state): State<Shared>,
    params: Result<Query<ChangesQuery>, QueryRejection>,
) -> ApiResult {
    let params = query(params, state.revision())?;
    let wait = params
        .timeout_ms
        .map_or(DEFAULT_POLL, Duration::from_millis)
        .min(MAX_POLL);
    let mut rx = state.subscribe();
    let _ = tokio::time::timeout(wait, rx.wait_for(|&r| r > params.since)).await;
    let snap = state.snapshot();
    let operations: Vec<_> = snap
        .session
        .journal()
        .iter()
        .filter(|c| c.revision > params.since)
        .map(|c| json!({ "revision": c.revision, "operation": c.operation }))
        .collect();
    Ok(envelope(
        snap.revision,
        json!({ "changed": snap.revision > params.since, "operations": operations }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddCode {
    kind: String,
    text: String,
    ru: String,
}

async fn add_code(
    State(state): State<Shared>,
    payload: Result<Json<AddCode>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let kind = parse_kind(&req.kind, state.revision())?;
    let (revision, node) = state
        .mutate(|s| s.add_code(kind, &req.text, &RuId::new(req.ru.trim())))
        .await?;
    Ok(envelope(revision, node))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddTriad {
    ru: String,
    p: NodeId,
    a: NodeId,
    d: NodeId,
}

async fn add_triad(
    State(state): State<Shared>,
    payload: Result<Json<AddTriad>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let (revision, triad) = state
        .mutate(|s| s.add_triad(&RuId::new(req.ru.trim()), req.p, req.a, req.d))
        .await?;
    Ok(envelope(revision, triad))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Group {
    subject: NodeId,
    neighbor: NodeId,
    category_text: Option<String>,
}

async fn group(
    State(state): State<Shared>,
    payload: Result<Json<Group>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let (revision, category) = state
        .mutate(|s| s.group_pair(req.subject, req.neighbor, req.category_text.as_deref()))
        .await?;
    Ok(envelope(revision, category))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Spawn {
    subject: NodeId,
    neighbor: NodeId,
    text: String,
}

async fn spawn(
    State(state): State<Shared>,
    payload: Result<Json<Spawn>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let (revision, category) = state
        .mutate(|s| s.spawn_category(req.subject, req.neighbor, &req.text))
        .await?;
    Ok(envelope(revision, category))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Orphan {
    node: NodeId,
}

async fn orphan(
    State(state): State<Shared>,
    payload: Result<Json<Orphan>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let (revision, node) = state.mutate(|s| s.keep_orphan(req.node)).await?;
    Ok(envelope(revision, json!({ "node": node })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Subcategory {
    category: CategoryId,
    members: Vec<NodeId>,
    text: String,
}

async fn subcategory(
    State(state): State<Shared>,
    payload: Result<Json<Subcategory>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let (revision, category) = state
        .mutate(|s| s.create_subcategory(req.category, &req.members, &req.text))
        .await?;
    Ok(envelope(revision, category))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Supercategory {
    children: Vec<CategoryId>,
    text: String,
}

async fn supercategory(
    State(state): State<Shared>,
    payload: Result<Json<Supercategory>, JsonRejection>,
) -> ApiResult {
    let req = body(payload, state.revision())?;
    let (revision, category) = state
        .mutate(|s| s.create_supercategory(&req.children, &req.text))
        .await?;
    Ok(envelope(revision, category))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryText {
    text: String,
}

async fn category_text(
    State(state): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<CategoryText>, JsonRejection>,
) -> ApiResult {
    let r = state.revision();
    let id: u32 = id.trim_start_matches('c').parse().map_err(|_| {
        ApiError::bad_request(format!("`{id}` is not a category id")).with_revision(r)
    })?;
    let req = body(payload, r)?;
    let (revision, category) = state
        .mutate(|s| s.revise_category_text(CategoryId(id), &req.text))
        .await?;
    Ok(envelope(revision, category))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Save {
    path: Option<PathBuf>,
}

/// Writes the current corpus document to `path` or the configured location.
async fn save(State(state): State<Shared>, payload: Option<Json<Save>>) -> ApiResult {
    let snap = state.snapshot();
    let r = snap.revision;
    let req = payload.map(|Json(s)| s).unwrap_or_default();
    let path = req
        .path
        .or_else(|| state.config().save_path.clone())
        .ok_or_else(|| {
            ApiError::bad_request("no save path given and none configured")
                .at(json!({ "field": "path" }))
                .with_revision(r)
        })?;
    let document = to_json_string(snap.corpus());
    let tmp = path.with_extension("json.tmp");
    let written = tokio::fs::write(&tmp, document.as_bytes()).await;
    let result = match written {
        Ok(()) => tokio::fs::rename(&tmp, &path).await,
        Err(e) => Err(e),
    };
    if let Err(e) = result {
        tracing::warn!(path = %path.display(), error = %e, "save failed");
        return Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "save_failed",
            e.to_string(),
        )
        .at(json!({ "path": path.display().to_string() }))
        .with_revision(r));
    }
    Ok(envelope(
        r,
        json!({ "path": path.display().to_string(), "bytes": document.len() }),
    ))
}
