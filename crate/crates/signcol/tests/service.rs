mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use common::{api_fixture, get, post, start_service, wait_for_frames};
use futures::StreamExt;
use serde_json::json;
use signcol::capture::{record_scripted, CaptureParams};
use signcol::catalog::Catalog;
use signcol::layout::validate_session;
use signcol::preview::PreviewMessage;
use signcol::service::{Service, ServiceConfig, ServiceError};

#[tokio::test(flavor = "multi_thread")]
async fn empty_stats_and_catalog_errors() {
    let dir = tempfile::tempdir().unwrap();
    let svc = start_service(dir.path(), 30.0).await;
    let client = reqwest::Client::new();
    let base = svc.base.clone();

    let (s, stats) = get(&client, format!("{base}/api/stats")).await;
    assert_eq!(s, 200);
    let cats = stats["categories"].as_array().unwrap();
    assert_eq!(cats.len(), 8);
    assert!(cats.iter().all(|c| c["recording_count"] == 0 && c["defined_item_count"] == 0));

    let (s, body) = post(&client, format!("{base}/api/sessions"), json!({"item_id": 99, "performer_id": 1})).await;
    assert_eq!(s, 404, "{body}");
    assert!(body["error"].is_string());

    let (item, _) = api_fixture(&client, &base, "cat2").await;
    let (s, _) = post(&client, format!("{base}/api/languages"), json!({"name": "kurdish sign"})).await;
    assert_eq!(s, 409);
    let (s, _) = post(&client, format!("{base}/api/items"), json!({"name": "x", "category": "cat9", "language_id": 1})).await;
    assert_eq!(s, 422);
    let (s, _) = post(&client, format!("{base}/api/items"), json!({"name": "x", "category": 3, "language_id": 77})).await;
    assert_eq!(s, 422);
    let (s, _) = post(&client, format!("{base}/api/performers"), json!({"name": "old", "age": 300})).await;
    assert_eq!(s, 422);

    let (s, items) = get(&client, format!("{base}/api/items?category=cat2&search=HEL")).await;
    assert_eq!(s, 200);
    assert_eq!(items.as_array().unwrap().len(), 1);
    assert_eq!(items[0]["id"], item);
    let (_, items) = get(&client, format!("{base}/api/items?category=cat3")).await;
    assert!(items.as_array().unwrap().is_empty());
    let (s, _) = get(&client, format!("{base}/api/items?category=nope")).await;
    assert_eq!(s, 422);
    let (_, stats) = get(&client, format!("{base}/api/stats")).await;
    assert_eq!(stats["categories"][1]["defined_item_count"], 1);
    svc.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn lifecycle_conflicts_and_discard() {
    let dir = tempfile::tempdir().unwrap();
    let svc = start_service(dir.path(), 60.0).await;
    let client = reqwest::Client::new();
    let base = svc.base.clone();
    let (item, performer) = api_fixture(&client, &base, "cat5").await;

    let (s, created) = post(&client, format!("{base}/api/sessions"), json!({"item_id": item, "performer_id": performer})).await;
    assert_eq!(s, 200, "{created}");
    assert_eq!(created["state"], "initialized");
    assert_eq!(created["category"], "cat5");
    let id = created["id"].as_str().unwrap().to_string();

    let (s, _) = post(&client, format!("{base}/api/sessions"), json!({"item_id": item, "performer_id": performer})).await;
    assert_eq!(s, 409, "second active session");
    let (s, body) = post(&client, format!("{base}/api/sessions/{id}/save"), json!({})).await;
    assert_eq!((s, body["state"].as_str()), (409, Some("initialized")));
    let (s, _) = post(&client, format!("{base}/api/sessions/{id}/explode"), json!({})).await;
    assert_eq!(s, 404);

    // Start then immediately stop: whatever was written must be consistent.
    let (s, _) = post(&client, format!("{base}/api/sessions/{id}/start"), json!({})).await;
    assert_eq!(s, 200);
    let (s, stopped) = post(&client, format!("{base}/api/sessions/{id}/stop"), json!({})).await;
    assert_eq!(s, 200);
    assert_eq!(stopped["state"], "stopped");
    let folder = PathBuf::from(stopped["folder"].as_str().unwrap());
    let report = validate_session(&folder);
    assert!(report.is_valid(), "{report}");
    let (_, again) = get(&client, format!("{base}/api/sessions/{id}")).await;
    assert_eq!(again["frames_written"], stopped["frames_written"]);

    let (s, _) = post(&client, format!("{base}/api/sessions/{id}/start"), json!({})).await;
    assert_eq!(s, 409, "no restart after stop");
    let (s, discarded) = post(&client, format!("{base}/api/sessions/{id}/discard"), json!({})).await;
    assert_eq!(s, 200);
    assert_eq!(discarded["state"], "discarded");
    assert!(!folder.exists());
    let (s, _) = get(&client, format!("{base}/api/sessions/{id}")).await;
    assert_eq!(s, 410);
    let (s, _) = get(&client, format!("{base}/api/sessions/nope")).await;
    assert_eq!(s, 404);

    // A discarded session no longer blocks a new one; save twice conflicts.
    let (s, created) = post(&client, format!("{base}/api/sessions"), json!({"item_id": item, "performer_id": performer, "frames": 3})).await;
    assert_eq!(s, 200);
    let id = created["id"].as_str().unwrap().to_string();
    post(&client, format!("{base}/api/sessions/{id}/start"), json!({})).await;
    wait_for_frames(&client, &base, &id, 3).await;
    post(&client, format!("{base}/api/sessions/{id}/stop"), json!({})).await;
    let (s, saved) = post(&client, format!("{base}/api/sessions/{id}/save"), json!({})).await;
    assert_eq!((s, saved["state"].as_str(), saved["frames_written"].as_u64()), (200, Some("saved"), Some(3)));
    let (s, body) = post(&client, format!("{base}/api/sessions/{id}/save"), json!({})).await;
    assert_eq!((s, body["state"].as_str()), (409, Some("saved")));
    let (_, sessions) = get(&client, format!("{base}/api/sessions")).await;
    assert_eq!(sessions.as_array().unwrap().len(), 2);
    let (_, recordings) = get(&client, format!("{base}/api/recordings")).await;
    assert_eq!(recordings.as_array().unwrap().len(), 1);
    assert_eq!(recordings[0]["frame_count"], 3);
    svc.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn preview_frames_are_a_subsequence_of_recorded_frames() {
    let dir = tempfile::tempdir().unwrap();
    let svc = start_service(dir.path(), 30.0).await;
    let client = reqwest::Client::new();
    let base = svc.base.clone();
    let (item, performer) = api_fixture(&client, &base, "cat8").await;
    let (mut ws, _) = tokio_tungstenite::connect_async(svc.ws.as_str()).await.unwrap();

    let (_, created) = post(&client, format!("{base}/api/sessions"), json!({"item_id": item, "performer_id": performer, "bodies": 2})).await;
    let id = created["id"].as_str().unwrap().to_string();
    post(&client, format!("{base}/api/sessions/{id}/start"), json!({})).await;
    let mut seen = Vec::new();
    while seen.len() < 8 {
        let msg = tokio::time::timeout(std::time::Duration::from_secs(30), ws.next()).await.unwrap().unwrap().unwrap();
        let text = msg.into_text().unwrap();
        let preview: PreviewMessage = serde_json::from_str(&text).unwrap();
        assert_eq!(preview.joints.len(), 50);
        assert_eq!((preview.color_width, preview.depth_width), (480, 256));
        seen.push((preview.frame_index, preview.timestamp));
    }
    let (_, stopped) = post(&client, format!("{base}/api/sessions/{id}/stop"), json!({})).await;
    let written = stopped["frames_written"].as_u64().unwrap();
    assert!(seen.windows(2).all(|w| w[0].0 < w[1].0), "{seen:?}");
    assert!(seen.iter().all(|&(i, _)| i < written));
    let timing = fs::read_to_string(PathBuf::from(stopped["folder"].as_str().unwrap()).join("timing/timestamps.csv")).unwrap();
    let rows: BTreeMap<u64, u64> = timing
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    for (i, t) in &seen {
        assert_eq!(rows.get(i), Some(t));
    }
    svc.stop().await;
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[tokio::test(flavor = "multi_thread")]
async fn api_capture_matches_cli_capture() {
    let dir = tempfile::tempdir().unwrap();
    let svc = start_service(&dir.path().join("api"), 30.0).await;
    let client = reqwest::Client::new();
    let base = svc.base.clone();
    let (item, performer) = api_fixture(&client, &base, "cat4").await;
    let (_, created) = post(
        &client,
        format!("{base}/api/sessions"),
        json!({"item_id": item, "performer_id": performer, "frames": 12, "seed": 7, "bodies": 2}),
    )
    .await;
    let id = created["id"].as_str().unwrap().to_string();
    post(&client, format!("{base}/api/sessions/{id}/start"), json!({})).await;
    wait_for_frames(&client, &base, &id, 12).await;
    post(&client, format!("{base}/api/sessions/{id}/stop"), json!({})).await;
    let (s, saved) = post(&client, format!("{base}/api/sessions/{id}/save"), json!({})).await;
    assert_eq!(s, 200, "{saved}");
    let api_folder = PathBuf::from(saved["folder"].as_str().unwrap());
    svc.stop().await;

    let mut catalog = Catalog::open_in_memory().unwrap();
    let lang = catalog.define_language("Kurdish Sign").unwrap();
    let item = catalog.define_item("hello", signcol_core::SignCategory::WordBySign, lang.id).unwrap();
    let performer = catalog.define_performer("Shvan K", 31, "").unwrap();
    let params = CaptureParams { seed: Some(7), bodies: Some(2), ..Default::default() };
    let (cli_session, _) =
        record_scripted(&mut catalog, &dir.path().join("cli"), item.id, performer.id, 12, &params, 30.0).unwrap();
    assert_eq!(cli_session.id, id);
    assert!(tree(&api_folder) == tree(cli_session.folder()), "session trees differ");
}

#[tokio::test(flavor = "multi_thread")]
async fn busy_port_is_a_startup_error() {
    let dir = tempfile::tempdir().unwrap();
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let mut config = ServiceConfig::new(dir.path());
    config.port = holder.local_addr().unwrap().port();
    assert!(matches!(Service::bind(config).await, Err(ServiceError::Bind { .. })));
}
