use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use libdex_cli::api::{router, AppState};
use libdex_core::reference::{bouncy_castle, tink};
use libdex_core::store::ProfileStore;
use libdex_core::builtin_catalog;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &tempfile::TempDir) -> Router {
    let catalog = builtin_catalog();
    let store = ProfileStore::open(dir.path()).unwrap();
    store.save_profile(&catalog, &tink(&catalog).unwrap(), false).unwrap();
    store.save_profile(&catalog, &bouncy_castle(&catalog).unwrap(), false).unwrap();
    router(Arc::new(AppState { catalog, store }), None)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
    (status, serde_json::from_slice(&bytes).unwrap(), bytes)
}

#[tokio::test]
async fn catalog_and_versions() {
    let dir = tempfile::tempdir().unwrap();
    let (status, v, bytes) = call(&app(&dir), "GET", "/api/catalog", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["catalog_version"], "cryptolib-2021.1");
    assert!(v["engine_version"].is_string());
    assert_eq!(v["data"]["attributes"].as_array().unwrap().len(), 15);
    assert_eq!(bytes.last(), Some(&b'\n'));
}

#[tokio::test]
async fn libraries_listing_and_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let (_, v, _) = call(&app, "GET", "/api/libraries", None).await;
    let names: Vec<_> = v["data"]["libraries"].as_array().unwrap().iter().map(|l| l["name"].clone()).collect();
    assert_eq!(names, [json!("Bouncy Castle"), json!("Tink")]);
    let (status, v, _) = call(&app, "GET", "/api/libraries/tink?revision=1", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["record"]["revision"], 1);
    let (status, v, _) = call(&app, "GET", "/api/libraries/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "UNKNOWN_LIBRARY");
    assert_eq!(v["error"]["detail"]["library_id"], "nope");
}

#[tokio::test]
async fn rank_orders_tink_first() {
    let dir = tempfile::tempdir().unwrap();
    let (status, v, _) = call(
        &app(&dir),
        "POST",
        "/api/rank",
        Some(json!({"library_ids": ["bouncy-castle", "tink"]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let ranking = v["data"]["ranking"].as_array().unwrap();
    assert_eq!(ranking[0]["library"]["name"], "Tink");
    assert_eq!(ranking[0]["total_display"], "16.75");
    assert_eq!(ranking[1]["total_display"], "7.08");
}

#[tokio::test]
async fn rank_without_libraries_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (status, v, _) = call(&app(&dir), "POST", "/api/rank", Some(json!({}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "EMPTY_INPUT");
}

#[tokio::test]
async fn score_rejects_weights_summing_to_14() {
    let dir = tempfile::tempdir().unwrap();
    let weights: serde_json::Map<String, Value> = (1..=15).map(|i| (i.to_string(), json!(if i == 1 { 0 } else { 1 }))).collect();
    let (status, v, _) = call(
        &app(&dir),
        "POST",
        "/api/score",
        Some(json!({"library_id": "tink", "weights": weights})),
    )
    .await;
    assert!(status.is_client_error());
    assert_eq!(v["error"]["code"], "WEIGHT_SUM");
    assert_eq!(v["error"]["detail"]["sum"], "14");
}

#[tokio::test]
async fn score_inline_profile_and_malformed_body() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let profile: Value = serde_json::from_str(libdex_core::reference::BOUNCY_CASTLE_JSON).unwrap();
    let (status, v, _) = call(&app, "POST", "/api/score", Some(json!({ "profile": profile }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["report"]["total_exact"], "85/12");

    let req = Request::builder()
        .method("POST")
        .uri("/api/score")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn reference_weights_report_derivation() {
    let dir = tempfile::tempdir().unwrap();
    let (_, v, _) = call(&app(&dir), "GET", "/api/weights/reference", None).await;
    let d = &v["data"];
    assert_eq!(d["expected"]["4"], 0.5);
    assert_eq!(d["expected"]["6"], 0.75);
    assert_eq!(d["weights"]["1"], 1.5);
    assert_eq!(d["mismatches"], json!([4, 6]));
    assert_eq!(d["trace"]["total_ranks"]["14"], 10.5);
}

#[tokio::test]
async fn whatif_and_rebalance() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let (status, v, _) = call(
        &app,
        "POST",
        "/api/whatif",
        Some(json!({"a": "bouncy-castle", "b": "tink", "attribute": "Security", "range": [0, 3]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["sensitivity"]["crossovers"], json!([]));

    let (_, reference, _) = call(&app, "GET", "/api/weights/reference", None).await;
    let (status, v, _) = call(
        &app,
        "POST",
        "/api/weights/rebalance",
        Some(json!({"weights": reference["data"]["weights"], "pins": {"15": 1.5, "14": 2}})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["data"]["sum"], 15);
    assert_eq!(v["data"]["weights"]["14"], 2);
    assert_eq!(v["data"]["weights"]["15"], 1.5);

    let (status, v, _) = call(
        &app,
        "POST",
        "/api/weights/rebalance",
        Some(json!({"weights": reference["data"]["weights"], "pins": {"1": 20}})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "INFEASIBLE_PIN");
}

#[tokio::test]
async fn repeated_requests_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let body = json!({"library_ids": ["tink", "bouncy-castle"]});
    let (_, _, first) = call(&app, "POST", "/api/rank", Some(body.clone())).await;
    let (_, _, second) = call(&app, "POST", "/api/rank", Some(body)).await;
    assert_eq!(first, second);
}
