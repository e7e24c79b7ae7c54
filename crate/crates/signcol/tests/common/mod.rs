#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signcol::catalog::{Catalog, CatalogError, CategoryStats};
use signcol::recording::SavedRecording;
use signcol_core::SignCategory;

/// A language, one item per category and one performer.
pub struct Fixture {
    pub language: i64,
    pub items: [i64; 8],
    pub performer: i64,
}

pub fn fixture(catalog: &mut Catalog) -> Fixture {
    let language = catalog.define_language("Kurdish Sign").unwrap().id;
    let items = SignCategory::ALL.map(|c| catalog.define_item(&format!("sign {}", c.number()), c, language).unwrap().id);
    let performer = catalog.define_performer("Hawre A", 27, "0750").unwrap().id;
    Fixture { language, items, performer }
}

// In-memory model of the catalog's rows, used as the oracle for random traces.

#[derive(Debug, Clone, PartialEq)]
struct ItemRow {
    name: String,
    language: i64,
    category: SignCategory,
}

#[derive(Debug, Default)]
struct Model {
    languages: BTreeMap<i64, String>,
    items: BTreeMap<i64, ItemRow>,
    performers: BTreeMap<i64, (String, u32)>,
    recordings: BTreeMap<i64, (String, i64, i64)>,
    next: [i64; 4],
}

impl Model {
    fn take_id(&mut self, table: usize) -> i64 {
        self.next[table] += 1;
        self.next[table]
    }

    fn recount(&self) -> [(u64, u64); 8] {
        let mut out = [(0, 0); 8];
        for item in self.items.values() {
            out[usize::from(item.category.number()) - 1].0 += 1;
        }
        for (_, item, _) in self.recordings.values() {
            let c = self.items[item].category;
            out[usize::from(c.number()) - 1].1 += 1;
        }
        out
    }
}

const NAMES: [&str; 6] = ["ASL", "asl", "KSL", "BSL", "Ali", "  "];

fn pick_id<T>(rng: &mut ChaCha8Rng, rows: &BTreeMap<i64, T>) -> i64 {
    // Mostly existing ids, sometimes one that never existed.
    if rows.is_empty() || rng.random_bool(0.15) {
        return rng.random_range(1000..1010);
    }
    *rows.keys().nth(rng.random_range(0..rows.len())).unwrap()
}

fn stats_pairs(stats: &CategoryStats) -> [(u64, u64); 8] {
    let mut out = [(0, 0); 8];
    for (o, c) in out.iter_mut().zip(&stats.categories) {
        *o = (c.defined_item_count, c.recording_count);
    }
    out
}

/// Checks the catalog's rows, statistics and references against the model.
fn check(catalog: &Catalog, model: &Model, step: usize) -> Result<(), String> {
    let fail = |what: &str| Err(format!("step {step}: {what}"));
    let langs: BTreeMap<_, _> = catalog.languages().unwrap().into_iter().map(|l| (l.id, l.name)).collect();
    if langs != model.languages {
        return fail("languages differ from the model");
    }
    let items: BTreeMap<_, _> = catalog
        .items()
        .unwrap()
        .into_iter()
        .map(|i| (i.id, ItemRow { name: i.name, language: i.language_id, category: i.category }))
        .collect();
    if items != model.items {
        return fail("items differ from the model");
    }
    let performers: BTreeMap<_, _> =
        catalog.performers().unwrap().into_iter().map(|p| (p.id, (p.name, p.age))).collect();
    if performers != model.performers {
        return fail("performers differ from the model");
    }
    let recordings: BTreeMap<_, _> = catalog
        .recordings()
        .unwrap()
        .into_iter()
        .map(|r| (r.id, (r.folder_path, r.item_id, r.performer_id)))
        .collect();
    if recordings != model.recordings {
        return fail("recordings differ from the model");
    }
    // Referential integrity as seen through the public listing.
    if items.values().any(|i| !langs.contains_key(&i.language)) {
        return fail("item refers to a missing language");
    }
    if recordings.values().any(|(_, i, p)| !items.contains_key(i) || !performers.contains_key(p)) {
        return fail("recording refers to a missing item or performer");
    }
    let stats = catalog.category_stats().unwrap();
    if stats.categories.len() != 8 {
        return fail("stats do not list 8 categories");
    }
    if stats_pairs(&stats) != model.recount() {
        return fail(&format!("stats {:?} != recount {:?}", stats_pairs(&stats), model.recount()));
    }
    Ok(())
}

fn expect<T>(step: usize, op: &str, got: Result<T, CatalogError>, ok: bool) -> Result<Option<T>, String> {
    match (got, ok) {
        (Ok(v), true) => Ok(Some(v)),
        (Err(_), false) => Ok(None),
        (Ok(_), false) => Err(format!("step {step}: {op} succeeded but should have failed")),
        (Err(e), true) => Err(format!("step {step}: {op} failed unexpectedly: {e}")),
    }
}

/// Runs `steps` random operations against the catalog at `db`, checking it
/// against the model after every step and once more after reopening.
pub fn catalog_trace(seed: u64, steps: usize, db: &Path) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut catalog = Catalog::open(db).map_err(|e| e.to_string())?;
    let mut model = Model::default();
    for step in 0..steps {
        match rng.random_range(0..9) {
            0 => {
                let raw = NAMES[rng.random_range(0..NAMES.len())];
                let name = raw.trim();
                let ok = !name.is_empty() && !model.languages.values().any(|n| n.eq_ignore_ascii_case(name));
                if expect(step, "define language", catalog.define_language(raw), ok)?.is_some() {
                    let id = model.take_id(0);
                    model.languages.insert(id, name.to_string());
                }
            }
            1 | 2 => {
                let name = format!("item{}", rng.random_range(0..8));
                let language = pick_id(&mut rng, &model.languages);
                let category = SignCategory::ALL[rng.random_range(0..8)];
                let ok = model.languages.contains_key(&language)
                    && !model.items.values().any(|i| i.name == name && i.language == language);
                if expect(step, "define item", catalog.define_item(&name, category, language), ok)?.is_some() {
                    let id = model.take_id(1);
                    model.items.insert(id, ItemRow { name, language, category });
                }
            }
            3 => {
                let age = rng.random_range(0..140);
                let ok = (1..=130).contains(&age);
                if expect(step, "define performer", catalog.define_performer("P", age, ""), ok)?.is_some() {
                    let id = model.take_id(2);
                    model.performers.insert(id, ("P".into(), age));
                }
            }
            4 | 5 => {
                let folder = format!("/rec/{}", rng.random_range(0..40));
                let item = pick_id(&mut rng, &model.items);
                let performer = pick_id(&mut rng, &model.performers);
                let ok = model.items.contains_key(&item)
                    && model.performers.contains_key(&performer)
                    && !model.recordings.values().any(|(f, _, _)| *f == folder);
                let saved = SavedRecording { folder: folder.clone().into(), item_id: item, performer_id: performer, frame_count: 3 };
                if expect(step, "register", catalog.register_recording(&saved), ok)?.is_some() {
                    let id = model.take_id(3);
                    model.recordings.insert(id, (folder, item, performer));
                }
            }
            6 => {
                let id = pick_id(&mut rng, &model.languages);
                let ok = model.languages.contains_key(&id) && !model.items.values().any(|i| i.language == id);
                if expect(step, "delete language", catalog.delete_language(id), ok)?.is_some() {
                    model.languages.remove(&id);
                }
            }
            7 => {
                let id = pick_id(&mut rng, &model.items);
                let ok = model.items.contains_key(&id) && !model.recordings.values().any(|r| r.1 == id);
                if expect(step, "delete item", catalog.delete_item(id), ok)?.is_some() {
                    model.items.remove(&id);
                }
            }
            _ => {
                if rng.random_bool(0.5) {
                    let id = pick_id(&mut rng, &model.performers);
                    let ok = model.performers.contains_key(&id) && !model.recordings.values().any(|r| r.2 == id);
                    if expect(step, "delete performer", catalog.delete_performer(id), ok)?.is_some() {
                        model.performers.remove(&id);
                    }
                } else {
                    let id = pick_id(&mut rng, &model.recordings);
                    let ok = model.recordings.contains_key(&id);
                    if expect(step, "delete recording", catalog.delete_recording(id), ok)?.is_some() {
                        model.recordings.remove(&id);
                    }
                }
            }
        }
        check(&catalog, &model, step)?;
    }
    let before = catalog.snapshot().map_err(|e| e.to_string())?;
    drop(catalog);
    let reopened = Catalog::open(db).map_err(|e| e.to_string())?;
    if reopened.snapshot().map_err(|e| e.to_string())? != before {
        return Err("snapshot changed across reopen".into());
    }
    check(&reopened, &model, steps)
}

pub struct Running {
    pub base: String,
    pub ws: String,
    pub output_root: std::path::PathBuf,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    handle: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl Running {
    pub async fn stop(mut self) {
        let _ = self.shutdown.take().unwrap().send(());
        self.handle.take().unwrap().await.unwrap().unwrap();
    }
}

/// Starts the service on a free port with its data under `data_dir`.
pub async fn start_service(data_dir: &Path, rate: f64) -> Running {
    use signcol::service::{Service, ServiceConfig};
    let mut config = ServiceConfig::new(data_dir);
    config.port = 0;
    config.rate = Some(rate);
    let service = Service::bind(config).await.unwrap();
    let addr = service.local_addr().unwrap();
    let output_root = service.output_root().to_path_buf();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let handle = tokio::spawn(service.serve(async {
        let _ = rx.await;
    }));
    Running {
        base: format!("http://{addr}"),
        ws: format!("ws://{addr}/api/preview"),
        output_root,
        shutdown: Some(tx),
        handle: Some(handle),
    }
}

/// POSTs JSON and returns the status with the parsed body.
pub async fn post(client: &reqwest::Client, url: String, body: serde_json::Value) -> (u16, serde_json::Value) {
    let r = client.post(url).json(&body).send().await.unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap_or(serde_json::Value::Null))
}

pub async fn get(client: &reqwest::Client, url: String) -> (u16, serde_json::Value) {
    let r = client.get(url).send().await.unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap_or(serde_json::Value::Null))
}

/// Defines a language, one item of `category` and a performer through the
/// API; returns the item and performer ids.
pub async fn api_fixture(client: &reqwest::Client, base: &str, category: &str) -> (i64, i64) {
    let (s, lang) = post(client, format!("{base}/api/languages"), serde_json::json!({"name": "Kurdish Sign"})).await;
    assert_eq!(s, 200, "{lang}");
    let (s, item) = post(
        client,
        format!("{base}/api/items"),
        serde_json::json!({"name": "hello", "category": category, "language_id": lang["id"]}),
    )
    .await;
    assert_eq!(s, 200, "{item}");
    let (s, performer) =
        post(client, format!("{base}/api/performers"), serde_json::json!({"name": "Shvan K", "age": 31})).await;
    assert_eq!(s, 200, "{performer}");
    (item["id"].as_i64().unwrap(), performer["id"].as_i64().unwrap())
}

/// Polls the session until `frames_written` reaches `n`.
pub async fn wait_for_frames(client: &reqwest::Client, base: &str, id: &str, n: u64) -> serde_json::Value {
    let deadline = std::time::Instant::now() + std::time::Duration::from_secs(60);
    loop {
        let (s, body) = get(client, format!("{base}/api/sessions/{id}")).await;
        assert_eq!(s, 200, "{body}");
        if body["frames_written"].as_u64().unwrap() >= n {
            return body;
        }
        assert!(body["error"].is_null(), "{body}");
        assert!(std::time::Instant::now() < deadline, "timed out waiting for {n} frames: {body}");
        tokio::time::sleep(std::time::Duration::from_millis(20)).await;
    }
}
