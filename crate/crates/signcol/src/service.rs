//! HTTP and WebSocket facade over the catalog and the recorder.
//!
//! One session may be active (initialized, recording or stopped) at a time.
//! While recording, a pump thread pulls bundles from the configured source
//! at its nominal rate, appends them to the session and broadcasts a
//! downscaled preview. Slow preview clients miss frames rather than delay
//! the recording.

use std::collections::HashMap;
use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use signcol_core::{CoreError, FrameSource, SessionAction, SessionState, SignCategory};
use tokio::net::TcpListener;
use tokio::sync::broadcast;

use crate::capture::{build_source, resolve_output_root, resolve_rate, save_and_register, session_labels, AnySource, CaptureError, CaptureParams, SourceConfig};
use crate::catalog::{Catalog, CatalogError, DB_FILE_NAME};
use crate::preview::PreviewMessage;
use crate::recording::{create_session, RecordingError, Session};

pub const DEFAULT_PORT: u16 = 8731;
const PREVIEW_BUFFER: usize = 4;
const PUMP_POLL: Duration = Duration::from_millis(10);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    /// Defaults to `signcol.db` inside `data_dir`.
    pub db: Option<PathBuf>,
    /// Defaults to the catalog option, then `sessions` inside `data_dir`.
    pub output_root: Option<PathBuf>,
    pub source: SourceConfig,
    /// Defaults to the catalog option, then 30 fps.
    pub rate: Option<f64>,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            data_dir: data_dir.into(),
            db: None,
            output_root: None,
            source: SourceConfig::Synthetic,
            rate: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What the API reports about a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSessionState {
    pub id: String,
    pub state: String,
    pub frames_written: u64,
    pub item: String,
    pub performer: String,
    pub language: String,
    pub category: String,
    pub folder: PathBuf,
    pub elapsed_ms: u64,
    /// Set when the capture thread stopped on an error.
    pub error: Option<String>,
}

struct Pump {
    stop: Arc<AtomicBool>,
    handle: JoinHandle<Result<(), CaptureError>>,
}

struct Slot {
    session: Arc<Mutex<Session>>,
    source: Option<AnySource>,
    frame_limit: Option<u64>,
    pump: Option<Pump>,
    started: Option<Instant>,
    elapsed: Duration,
    error: Option<String>,
}

impl Slot {
    fn elapsed(&self) -> Duration {
        self.elapsed + self.started.map_or(Duration::ZERO, |t| t.elapsed())
    }

    fn view(&self) -> ApiSessionState {
        let session = lock(&self.session);
        let labels = session.labels();
        ApiSessionState {
            id: session.id.clone(),
            state: session.state().as_str().into(),
            frames_written: session.frames_written(),
            item: labels.item.clone(),
            performer: labels.performer.clone(),
            language: labels.language.clone(),
            category: labels.category.code().into(),
            folder: session.folder().to_path_buf(),
            elapsed_ms: self.elapsed().as_millis() as u64,
            error: self.error.clone(),
        }
    }

    /// Signals the pump and waits for it. Records its error, if any.
    fn join_pump(&mut self) {
        if let Some(pump) = self.pump.take() {
            pump.stop.store(true, Ordering::Relaxed);
            match pump.handle.join() {
                Ok(Ok(())) => {}
                Ok(Err(e)) => {
                    tracing::warn!(error = %e, "capture thread failed");
                    self.error = Some(e.to_string());
                }
                Err(_) => self.error = Some("capture thread panicked".into()),
            }
        }
        if let Some(t) = self.started.take() {
            self.elapsed += t.elapsed();
        }
    }
}

struct AppState {
    catalog: Mutex<Catalog>,
    sessions: Mutex<HashMap<String, Slot>>,
    preview: broadcast::Sender<Arc<str>>,
    output_root: PathBuf,
    source: SourceConfig,
    rate: f64,
}

type Shared = Arc<AppState>;

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    state: Option<SessionState>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        ApiError { status, message: message.to_string(), state: None }
    }

    fn conflict(state: SessionState, action: &str) -> Self {
        ApiError {
            status: StatusCode::CONFLICT,
            message: format!("session is {state}; cannot {action}"),
            state: Some(state),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({
            "error": self.message,
            "state": self.state.map(|s| s.as_str()),
        });
        (self.status, Json(body)).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let status = match e {
            CatalogError::NotFound(_) => StatusCode::NOT_FOUND,
            CatalogError::Uniqueness(_) | CatalogError::InUse(_) => StatusCode::CONFLICT,
            CatalogError::Reference(_) | CatalogError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            CatalogError::SchemaTooNew { .. } | CatalogError::Sqlite(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e)
    }
}

impl From<CaptureError> for ApiError {
    fn from(e: CaptureError) -> Self {
        match e {
            CaptureError::Catalog(e) => e.into(),
            CaptureError::Recording(RecordingError::State { state, action }) => ApiError::conflict(state, action),
            CaptureError::Recording(RecordingError::Core(e)) | CaptureError::Core(e) => {
                ApiError::new(StatusCode::BAD_REQUEST, e)
            }
            CaptureError::Invalid(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e),
            e => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e),
        }
    }
}

impl From<RecordingError> for ApiError {
    fn from(e: RecordingError) -> Self {
        CaptureError::from(e).into()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs blocking work (SQLite, file IO, thread joins) off the async workers.
async fn blocking<T: Send + 'static>(
    state: &Shared,
    f: impl FnOnce(&AppState) -> Result<T, ApiError> + Send + 'static,
) -> ApiResult<T> {
    let state = Arc::clone(state);
    match tokio::task::spawn_blocking(move || f(&state)).await {
        Ok(r) => r.map(Json),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e)),
    }
}

#[derive(Deserialize)]
struct NewLanguage {
    name: String,
}

/// Categories are accepted as `cat4`, `"4"` or `4`.
#[derive(Deserialize)]
#[serde(untagged)]
enum CategoryField {
    Number(u8),
    Text(String),
}

impl CategoryField {
    fn parse(self) -> Result<SignCategory, ApiError> {
        let parsed = match self {
            CategoryField::Number(n) => SignCategory::from_number(n).ok_or(()),
            CategoryField::Text(s) => s.parse().map_err(|_| ()),
        };
        parsed.map_err(|()| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "category must be cat1..cat8"))
    }
}

#[derive(Deserialize)]
struct NewItem {
    name: String,
    category: CategoryField,
    language_id: i64,
}

#[derive(Deserialize)]
struct NewPerformer {
    name: String,
    age: u32,
    #[serde(default)]
    phone: String,
}

#[derive(Deserialize)]
struct ItemQuery {
    category: Option<String>,
    search: Option<String>,
}

#[derive(Deserialize)]
struct NewSession {
    item_id: i64,
    performer_id: i64,
    /// Stop pulling frames after this many; recording continues until stop.
    frames: Option<u64>,
    #[serde(flatten)]
    params: CaptureParams,
}

async fn list_languages(State(s): State<Shared>) -> ApiResult<impl Serialize> {
    blocking(&s, |s| Ok(lock(&s.catalog).languages()?)).await
}

async fn create_language(State(s): State<Shared>, Json(req): Json<NewLanguage>) -> ApiResult<impl Serialize> {
    blocking(&s, move |s| Ok(lock(&s.catalog).define_language(&req.name)?)).await
}

async fn list_items(State(s): State<Shared>, Query(q): Query<ItemQuery>) -> ApiResult<impl Serialize> {
    let category = match q.category.filter(|c| !c.is_empty()) {
        Some(c) => Some(CategoryField::Text(c).parse()?),
        None => None,
    };
    blocking(&s, move |s| Ok(lock(&s.catalog).list_items(category, q.search.as_deref())?)).await
}

async fn create_item(State(s): State<Shared>, Json(req): Json<NewItem>) -> ApiResult<impl Serialize> {
    let category = req.category.parse()?;
    blocking(&s, move |s| Ok(lock(&s.catalog).define_item(&req.name, category, req.language_id)?)).await
}

async fn list_performers(State(s): State<Shared>) -> ApiResult<impl Serialize> {
    blocking(&s, |s| Ok(lock(&s.catalog).performers()?)).await
}

async fn create_performer(State(s): State<Shared>, Json(req): Json<NewPerformer>) -> ApiResult<impl Serialize> {
    blocking(&s, move |s| Ok(lock(&s.catalog).define_performer(&req.name, req.age, &req.phone)?)).await
}

async fn stats(State(s): State<Shared>) -> ApiResult<impl Serialize> {
    blocking(&s, |s| Ok(lock(&s.catalog).category_stats()?)).await
}

async fn list_recordings(State(s): State<Shared>) -> ApiResult<impl Serialize> {
    blocking(&s, |s| Ok(lock(&s.catalog).recordings()?)).await
}

async fn list_sessions(State(s): State<Shared>) -> ApiResult<Vec<ApiSessionState>> {
    blocking(&s, |s| {
        let sessions = lock(&s.sessions);
        let mut out: Vec<_> = sessions.values().map(Slot::view).collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    })
    .await
}

async fn create_session_handler(State(s): State<Shared>, Json(req): Json<NewSession>) -> ApiResult<ApiSessionState> {
    blocking(&s, move |s| {
        let mut sessions = lock(&s.sessions);
        if let Some(active) = sessions.values().find(|slot| !lock(&slot.session).state().is_terminal()) {
            let id = lock(&active.session).id.clone();
            return Err(ApiError::new(StatusCode::CONFLICT, format!("session {id} is still active")));
        }
        let labels = session_labels(&lock(&s.catalog), req.item_id, req.performer_id)?;
        let seed = req.params.seed.unwrap_or_else(rand::random);
        let source = build_source(&s.source, &labels, &req.params, seed, s.rate, req.frames)?;
        let session = create_session(labels, &s.output_root, seed, &source.calibration())?;
        let slot = Slot {
            session: Arc::new(Mutex::new(session)),
            source: Some(source),
            frame_limit: req.frames,
            pump: None,
            started: None,
            elapsed: Duration::ZERO,
            error: None,
        };
        let view = slot.view();
        tracing::info!(session = %view.id, "session created");
        sessions.insert(view.id.clone(), slot);
        Ok(view)
    })
    .await
}

fn find<'a>(sessions: &'a mut HashMap<String, Slot>, id: &str) -> Result<&'a mut Slot, ApiError> {
    let slot = sessions
        .get_mut(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("session {id} not found")))?;
    if lock(&slot.session).state() == SessionState::Discarded {
        return Err(ApiError::new(StatusCode::GONE, format!("session {id} was discarded")));
    }
    Ok(slot)
}

async fn get_session(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<ApiSessionState> {
    blocking(&s, move |s| Ok(find(&mut lock(&s.sessions), &id)?.view())).await
}

async fn session_action(
    State(s): State<Shared>,
    Path((id, action)): Path<(String, String)>,
) -> ApiResult<ApiSessionState> {
    let action: SessionAction =
        action.parse().map_err(|e: CoreError| ApiError::new(StatusCode::NOT_FOUND, e))?;
    blocking(&s, move |s| {
        let mut sessions = lock(&s.sessions);
        let slot = find(&mut sessions, &id)?;
        let current = lock(&slot.session).state();
        if current.apply(action).is_err() {
            return Err(ApiError::conflict(current, action.as_str()));
        }
        match action {
            SessionAction::Start => {
                lock(&slot.session).start()?;
                start_pump(s, slot);
            }
            SessionAction::Stop => {
                slot.join_pump();
                lock(&slot.session).stop()?;
            }
            SessionAction::Save => {
                let mut catalog = lock(&s.catalog);
                save_and_register(&mut catalog, &mut lock(&slot.session))?;
            }
            SessionAction::Discard => {
                // The slot stays behind so later requests get 410.
                lock(&slot.session).discard()?;
            }
        }
        let view = slot.view();
        tracing::info!(session = %view.id, state = %view.state, frames = view.frames_written, "session {}", action.as_str());
        Ok(view)
    })
    .await
}

fn start_pump(state: &AppState, slot: &mut Slot) {
    let Some(mut source) = slot.source.take() else { return };
    let stop = Arc::new(AtomicBool::new(false));
    let session = Arc::clone(&slot.session);
    let preview = state.preview.clone();
    let limit = slot.frame_limit;
    let flag = Arc::clone(&stop);
    let handle = std::thread::spawn(move || pump(&mut source, &session, &preview, &flag, limit));
    slot.pump = Some(Pump { stop, handle });
    slot.started = Some(Instant::now());
}

/// Appends frames at the source's nominal rate until stopped, the source
/// runs dry or `limit` frames are written.
fn pump(
    source: &mut AnySource,
    session: &Mutex<Session>,
    preview: &broadcast::Sender<Arc<str>>,
    stop: &AtomicBool,
    limit: Option<u64>,
) -> Result<(), CaptureError> {
    let period = Duration::from_secs_f64(1.0 / source.nominal_rate());
    let start = Instant::now();
    let mut written = 0u64;
    while !stop.load(Ordering::Relaxed) && limit.is_none_or(|l| written < l) {
        let due = start + period * written as u32;
        let now = Instant::now();
        if now < due {
            std::thread::sleep((due - now).min(PUMP_POLL));
            continue;
        }
        let Some(bundle) = source.next_bundle()? else { break };
        lock(session).append_frame(&bundle)?;
        written += 1;
        if preview.receiver_count() > 0 {
            if let Ok(json) = serde_json::to_string(&PreviewMessage::from_bundle(&bundle)) {
                let _ = preview.send(json.into());
            }
        }
    }
    Ok(())
}

async fn preview_socket(State(s): State<Shared>, ws: WebSocketUpgrade) -> Response {
    let rx = s.preview.subscribe();
    ws.on_upgrade(move |socket| stream_previews(socket, rx))
}

async fn stream_previews(mut socket: WebSocket, mut rx: broadcast::Receiver<Arc<str>>) {
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(text) => {
                    if socket.send(Message::Text(text.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/languages", get(list_languages).post(create_language))
        .route("/api/items", get(list_items).post(create_item))
        .route("/api/performers", get(list_performers).post(create_performer))
        .route("/api/stats", get(stats))
        .route("/api/recordings", get(list_recordings))
        .route("/api/sessions", get(list_sessions).post(create_session_handler))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/{action}", post(session_action))
        .route("/api/preview", get(preview_socket))
        .with_state(state)
}

/// A bound, not yet serving, service.
pub struct Service {
    state: Shared,
    listener: TcpListener,
}

impl Service {
    /// Opens the catalog and binds the listening socket. Port 0 picks a
    /// free port.
    pub async fn bind(config: ServiceConfig) -> Result<Service, ServiceError> {
        std::fs::create_dir_all(&config.data_dir)?;
        let db = config.db.clone().unwrap_or_else(|| config.data_dir.join(DB_FILE_NAME));
        let catalog = Catalog::open(&db)?;
        let output_root = resolve_output_root(&catalog, &config.data_dir, config.output_root)?;
        let rate = resolve_rate(&catalog, config.rate)?;
        let addr = format!("{}:{}", config.host, config.port);
        let listener = TcpListener::bind(&addr).await.map_err(|source| ServiceError::Bind { addr, source })?;
        let (preview, _) = broadcast::channel(PREVIEW_BUFFER);
        let state = Arc::new(AppState {
            catalog: Mutex::new(catalog),
            sessions: Mutex::new(HashMap::new()),
            preview,
            output_root,
            source: config.source,
            rate,
        });
        Ok(Service { state, listener })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn output_root(&self) -> &std::path::Path {
        &self.state.output_root
    }

    /// Serves until `shutdown` resolves, then stops any running capture.
    pub async fn serve(self, shutdown: impl Future<Output = ()> + Send + 'static) -> io::Result<()> {
        let state = Arc::clone(&self.state);
        axum::serve(self.listener, router(self.state)).with_graceful_shutdown(shutdown).await?;
        tokio::task::spawn_blocking(move || {
            for slot in lock(&state.sessions).values_mut() {
                slot.join_pump();
                let mut session = lock(&slot.session);
                if session.state() == SessionState::Recording {
                    let _ = session.stop();
                }
            }
        })
        .await
        .map_err(io::Error::other)
    }
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {}
        () = term => {}
    }
}
