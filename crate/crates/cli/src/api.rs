//! JSON HTTP API over the engine and the profile store.
//!
//! Every success body is `{engine_version, catalog_version, data}`; every
//! failure is `{error: {code, message, detail}}`. Bodies use the store's
//! canonical serialization, so identical requests give identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use libdex_core::exact::{self, Rational};
use libdex_core::reference::{reference_weighting, reference_weights};
use libdex_core::scoring::{compute_index, rank_libraries, weight_sensitivity};
use libdex_core::store::{canonical_json, profile_from_value, weights_from_value, ProfileStore};
use libdex_core::{builtin_catalog, AttributeId, Catalog, Error, LibraryProfile, Result, WeightVector};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::engine::{envelope, error_body, parse_range, rebalance, reference_payload};

pub struct AppState {
    pub catalog: Catalog,
    pub store: ProfileStore,
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

/// HTTP status for an engine error: malformed input 400, missing resources
/// 404, races 409, other client errors 422, server-side faults 500.
pub fn status_for(err: &Error) -> StatusCode {
    match err.code() {
        "PARSE" | "MISSING_KEY" => StatusCode::BAD_REQUEST,
        "UNKNOWN_LIBRARY" | "UNKNOWN_REVISION" => StatusCode::NOT_FOUND,
        "WRITE_CONFLICT" => StatusCode::CONFLICT,
        "IO" | "HASH_MISMATCH" | "REFERENCE_MISMATCH" | "INVALID_CATALOG" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

fn json_response(status: StatusCode, body: &Value) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], canonical_json(body)).into_response()
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(status_for(&self.0), &error_body(&self.0))
    }
}

type ApiResult = std::result::Result<Response, ApiError>;

fn ok(state: &AppState, data: Value) -> ApiResult {
    Ok(json_response(StatusCode::OK, &envelope(&state.catalog, data)))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("response serializes")
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| Error::parse("request body", e))
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/catalog", get(get_catalog))
        .route("/api/libraries", get(list_libraries))
        .route("/api/libraries/{id}", get(get_library))
        .route("/api/weights/reference", get(get_reference))
        .route("/api/score", post(score))
        .route("/api/rank", post(rank))
        .route("/api/whatif", post(whatif))
        .route("/api/weights/rebalance", post(rebalance_handler))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(addr: &str, store: ProfileStore, static_dir: Option<PathBuf>, log: &mut dyn Write) -> Result<()> {
    let reference = reference_weighting();
    if let Err(e) = reference.verify() {
        let _ = writeln!(log, "warning: {e}; serving the derived vector");
    }
    let state = Arc::new(AppState {
        catalog: builtin_catalog(),
        store,
    });
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| Error::Io {
        path: addr.into(),
        source,
    })?;
    let _ = writeln!(log, "listening on {addr}");
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| Error::Io {
            path: addr.into(),
            source,
        })
}

async fn get_catalog(State(s): State<Arc<AppState>>) -> ApiResult {
    ok(&s, to_value(&s.catalog))
}

async fn list_libraries(State(s): State<Arc<AppState>>) -> ApiResult {
    ok(&s, json!({ "libraries": s.store.list_profiles()? }))
}

#[derive(Deserialize)]
struct RevisionQuery {
    revision: Option<u64>,
}

async fn get_library(State(s): State<Arc<AppState>>, Path(id): Path<String>, Query(q): Query<RevisionQuery>) -> ApiResult {
    let record = s.store.get_profile(&id, q.revision)?;
    ok(&s, json!({ "record": record }))
}

async fn get_reference(State(s): State<Arc<AppState>>) -> ApiResult {
    ok(&s, reference_payload())
}

/// A stored library id or an inline profile document.
fn resolve_profile(state: &AppState, value: &Value) -> Result<LibraryProfile> {
    match value {
        Value::String(id) => Ok(state.store.get_profile(id, None)?.library_profile()),
        Value::Object(_) => profile_from_value(&state.catalog, value.clone()),
        _ => Err(Error::parse("request body", "expected a library id or a profile object")),
    }
}

fn resolve_weights(state: &AppState, value: Option<&Value>) -> Result<WeightVector> {
    match value {
        None | Some(Value::Null) => Ok(reference_weights()),
        Some(v) => Ok(weights_from_value(&state.catalog, v.clone())?.weights),
    }
}

#[derive(Deserialize)]
struct ScoreRequest {
    library_id: Option<String>,
    profile: Option<Value>,
    weights: Option<Value>,
}

pub fn score_request(state: &AppState, body: &Bytes) -> Result<Value> {
    let req: ScoreRequest = parse_body(body)?;
    let profile = match (req.library_id, req.profile) {
        (Some(id), None) => resolve_profile(state, &Value::String(id))?,
        (None, Some(p)) => resolve_profile(state, &p)?,
        _ => return Err(Error::parse("request body", "give exactly one of library_id and profile")),
    };
    let weights = resolve_weights(state, req.weights.as_ref())?;
    Ok(json!({ "report": compute_index(&state.catalog, &profile, &weights)? }))
}

async fn score(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let data = score_request(&s, &body)?;
    ok(&s, data)
}

#[derive(Deserialize)]
struct RankRequest {
    #[serde(default)]
    library_ids: Vec<String>,
    #[serde(default)]
    profiles: Vec<Value>,
    weights: Option<Value>,
}

async fn rank(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: RankRequest = parse_body(&body)?;
    let mut profiles = req
        .library_ids
        .iter()
        .map(|id| resolve_profile(&s, &Value::String(id.clone())))
        .collect::<Result<Vec<_>>>()?;
    for p in &req.profiles {
        profiles.push(resolve_profile(&s, p)?);
    }
    let weights = resolve_weights(&s, req.weights.as_ref())?;
    let ranked = rank_libraries(&s.catalog, &profiles, &weights)?;
    ok(&s, json!({ "ranking": ranked }))
}

#[derive(Deserialize)]
struct WhatifRequest {
    a: Value,
    b: Value,
    attribute: Value,
    range: Option<Value>,
    weights: Option<Value>,
}

fn rational_field(v: &Value, what: &str) -> Result<Rational> {
    exact::from_json_value(v).map_err(|e| Error::InvalidRange(format!("{what}: {e}")))
}

async fn whatif(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: WhatifRequest = parse_body(&body)?;
    let a = resolve_profile(&s, &req.a)?;
    let b = resolve_profile(&s, &req.b)?;
    let attribute = match &req.attribute {
        Value::Number(n) => s.catalog.resolve_attribute(&n.to_string())?,
        Value::String(t) => s.catalog.resolve_attribute(t)?,
        _ => return Err(Error::UnknownAttribute(req.attribute.to_string()).into()),
    };
    let (lo, hi) = match &req.range {
        None | Some(Value::Null) => (exact::int(0), exact::int(3)),
        Some(Value::String(text)) => parse_range(text)?,
        Some(Value::Array(pair)) if pair.len() == 2 => (rational_field(&pair[0], "lo")?, rational_field(&pair[1], "hi")?),
        Some(other) => return Err(Error::InvalidRange(format!("range {other} is not [lo, hi] or \"lo:hi\"")).into()),
    };
    let weights = resolve_weights(&s, req.weights.as_ref())?;
    let report = weight_sensitivity(&s.catalog, &a, &b, &weights, attribute, &lo, &hi)?;
    ok(&s, json!({ "sensitivity": report }))
}

#[derive(Deserialize)]
struct RebalanceRequest {
    weights: Value,
    /// Attributes set to the given value.
    #[serde(default)]
    pins: BTreeMap<String, Value>,
    /// Attributes kept at their current value.
    #[serde(default)]
    pinned: Vec<Value>,
}

fn attribute_token(catalog: &Catalog, v: &Value) -> Result<AttributeId> {
    match v {
        Value::String(t) => catalog.resolve_attribute(t),
        other => catalog.resolve_attribute(&other.to_string()),
    }
}

async fn rebalance_handler(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: RebalanceRequest = parse_body(&body)?;
    let weights = weights_from_value(&s.catalog, req.weights)?.weights;
    let pins = req
        .pins
        .iter()
        .map(|(k, v)| Ok((s.catalog.resolve_attribute(k)?, rational_field(v, "pin")?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let fixed = req
        .pinned
        .iter()
        .map(|v| attribute_token(&s.catalog, v))
        .collect::<Result<BTreeSet<_>>>()?;
    let out = rebalance(&s.catalog, &weights, &pins, &fixed)?;
    let sum = out.sum();
    ok(
        &s,
        json!({ "weights": out, "sum": exact::to_json_value(&sum), "sum_display": exact::fmt_fixed(&sum, 2) }),
    )
}
