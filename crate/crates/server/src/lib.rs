//! HTTP facade over an immutable warehouse instance.
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | GET | `/healthz` | | `ok` |
//! | GET | `/api/schema` | | dimensions and fact classes |
//! | GET | `/api/dimensions/{id}/members` | `?level=L` | members of level L in document order |
//! | POST | `/api/query` | pipeline JSON, optional `?format=json\|csv\|xml` | serialized cube view |
//! | POST | `/api/compile` | `{"pipeline": [...], "dialect": "xq31"}` | `{"xquery": "..."}` |
//!
//! Errors are `{"code", "message", "op_index"}` with status 400 for bad
//! requests and 404 for unknown dimensions or levels.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use xolap_core::algebra::{evaluate, Pipeline, PipelineError};
use xolap_core::codegen::{compile, QueryDialect};
use xolap_core::present::{serialize, Format};
use xolap_core::Instance;

type Shared = Arc<Instance>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
    op_index: Option<usize>,
}

impl ApiError {
    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: code.into(), message: message.into(), op_index: None }
    }

    fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self { status: StatusCode::NOT_FOUND, code: code.into(), message: message.into(), op_index: None }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: e.code().into(), message: e.to_string(), op_index: e.op_index() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "op_index": self.op_index });
        (self.status, Json(body)).into_response()
    }
}

pub fn router(instance: Shared) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/schema", get(schema))
        .route("/api/dimensions/{id}/members", get(members))
        .route("/api/query", post(query))
        .route("/api/compile", post(compile_query))
        .fallback(|| async { ApiError::not_found("not_found", "no such endpoint") })
        .layer(CorsLayer::permissive())
        .with_state(instance)
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(instance: Instance, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(instance, listener).await
}

pub async fn serve_on(instance: Instance, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(instance)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn schema(State(inst): State<Shared>) -> Json<Value> {
    Json(json!({
        "dimensions": inst.schema.dimensions,
        "fact_classes": inst.schema.fact_classes,
    }))
}

#[derive(Deserialize)]
struct LevelParam {
    level: Option<String>,
}

async fn members(
    State(inst): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<LevelParam>,
) -> Result<Json<Value>, ApiError> {
    let table = inst
        .dimension(&id)
        .ok_or_else(|| ApiError::not_found("unknown_dimension", format!("unknown dimension '{id}'")))?;
    let level = q.level.ok_or_else(|| ApiError::bad_request("missing_level", "query parameter 'level' is required"))?;
    let members = table.level_members(&level).ok_or_else(|| {
        ApiError::not_found("unknown_level", format!("unknown level '{level}' in dimension '{id}'"))
    })?;
    let list: Vec<Value> = members
        .map(|m| {
            let attributes: serde_json::Map<String, Value> =
                m.attribute_values.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect();
            let parent = m.parent.as_ref().map(|p| json!({ "level": p.level, "id": p.member }));
            json!({ "id": m.member_id, "attributes": attributes, "parent": parent })
        })
        .collect();
    Ok(Json(json!({ "dimension": id, "level": level, "members": list })))
}

#[derive(Deserialize)]
struct FormatParam {
    format: Option<String>,
}

async fn query(State(inst): State<Shared>, Query(q): Query<FormatParam>, body: String) -> Result<Response, ApiError> {
    let format = match q.format.as_deref() {
        None => Format::Json,
        Some(f) => f.parse::<Format>().map_err(|e| ApiError::bad_request("invalid_format", e.to_string()))?,
    };
    let pipeline = Pipeline::parse(&body)?;
    let state = pipeline.apply(&*inst)?;
    let view = evaluate(&*inst, &state).map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], serialize(&view, format)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompileRequest {
    pipeline: Value,
    dialect: Option<String>,
}

async fn compile_query(State(inst): State<Shared>, body: String) -> Result<Json<Value>, ApiError> {
    let req: CompileRequest =
        serde_json::from_str(&body).map_err(|e| ApiError::bad_request("malformed_request", e.to_string()))?;
    let dialect = match req.dialect.as_deref() {
        None => QueryDialect::default(),
        Some(d) => d.parse::<QueryDialect>().map_err(|e| ApiError::bad_request("invalid_dialect", e.to_string()))?,
    };
    let state = Pipeline::from_value(req.pipeline)?.apply(&*inst)?;
    let query = compile(&state, &inst.schema, dialect).map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
    Ok(Json(json!({ "xquery": query.text, "dialect": dialect.to_string(), "documents": query.documents })))
}
