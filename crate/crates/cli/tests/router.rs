use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use lgc::generators::{community_graph, worked_example};
use lgc::Graph;
use lgc_cli::server::router;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(g: &Arc<Graph>, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = router(Arc::clone(g)).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

#[tokio::test]
async fn graph_stats_route() {
    let g = Arc::new(worked_example());
    let (status, v) = call(&g, Method::GET, "/api/v1/graph", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["v"], 1);
    assert_eq!((v["n"].as_u64(), v["m"].as_u64()), (Some(8), Some(8)));
}

#[tokio::test]
async fn neighbors_route() {
    let g = Arc::new(worked_example());
    let (status, v) = call(&g, Method::GET, "/api/v1/vertex/3/neighbors?limit=2", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["neighbors"], json!([2, 4]));
    assert_eq!(v["truncated"], true);
    let (_, v) = call(&g, Method::GET, "/api/v1/vertex/3/neighbors", None).await;
    assert_eq!(v["neighbors"], json!([2, 4, 5, 6]));
    assert_eq!(v["truncated"], false);
    for bad in ["8", "x", "-1"] {
        let (status, v) = call(&g, Method::GET, &format!("/api/v1/vertex/{bad}/neighbors"), None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(v["field"], "id");
    }
}

#[tokio::test]
async fn cluster_route() {
    let g = Arc::new(community_graph(4, 40, 6, 1, 9));
    let body = r#"{"algorithm":"pr-nibble-opt","seed":5,"alpha":0.05,"epsilon":1e-5}"#;
    let (status, v) = call(&g, Method::POST, "/api/v1/cluster", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["v"], 1);
    assert_eq!(v["algorithm"], "pr_nibble_optimized");
    assert!(!v["cluster"].as_array().unwrap().is_empty());
    assert_eq!(v["mass_check"]["conserved"], true);

    let (status, v) = call(&g, Method::POST, "/api/v1/cluster", Some(r#"{"algorithm":"hkpr","seed":500}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v, json!({"v":1,"code":"out_of_range","message":v["message"],"field":"seed"}));

    let (status, v) = call(&g, Method::POST, "/api/v1/cluster", Some(r#"{"algorithm":"nibble","seed":1,"alpha":1.5}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["field"], "alpha");
}

#[tokio::test]
async fn malformed_bodies_are_rejected() {
    let g = Arc::new(worked_example());
    for body in ["{", "[]", r#"{"seed":1}"#, r#"{"algorithm":"nibble","seed":1,"extra":2}"#, r#"{"algorithm":"nibble","seed":-1}"#] {
        let (status, v) = call(&g, Method::POST, "/api/v1/cluster", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(v["code"], "bad_request");
        assert_eq!(v["v"], 1);
    }
}

#[tokio::test]
async fn sweep_route() {
    let g = Arc::new(worked_example());
    let body = r#"{"entries":[[0,0.4],[1,0.3],[2,0.3],[3,0.2]]}"#;
    let (status, v) = call(&g, Method::POST, "/api/v1/sweep", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["best_set"], json!([0, 1, 2]));
    assert_eq!(v["best_conductance"].as_f64(), Some(1.0 / 7.0));
    let (status, v) = call(&g, Method::POST, "/api/v1/sweep", Some(r#"{"entries":[]}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "empty_sweep");
}

#[tokio::test]
async fn schema_route_and_unknown_paths() {
    let g = Arc::new(worked_example());
    let (status, v) = call(&g, Method::GET, "/api/v1/schema", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["$defs"]["ClusterRequest"].is_object());
    let (status, _) = call(&g, Method::GET, "/api/v2/graph", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&g, Method::GET, "/api/v1/cluster", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
}
