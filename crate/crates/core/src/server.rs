//! HTTP session service.
//!
//! | method | path                           |                                   |
//! |--------|--------------------------------|-----------------------------------|
//! | GET    | `/services`                    | loadable services                 |
//! | POST   | `/sessions`                    | `{service, citizenId, mode}`      |
//! | GET    | `/sessions/{id}/page`          | page JSON, or HTML on `Accept`    |
//! | POST   | `/sessions/{id}/answers`       | `{answers}`                       |
//! | GET    | `/sessions/{id}/report`        | `?format=xml\|text`               |
//! | POST   | `/functions/{name}`            | fixture-backed data functions     |
//! | GET    | `/ui/...`                      | static web client                 |
//!
//! Each session sits behind its own lock, so requests for one session are
//! serialized while different sessions proceed independently. Session work
//! runs on the blocking pool because data administration calls may block.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use tower_http::services::ServeDir;

use crate::cui::{render_html, render_report, Page, ReportFormat};
use crate::data_admin::{
    DataAdminClient, DataAdminError, FixtureStore, FunctionRequest, FunctionResponse, MockDataAdmin,
};
use crate::interaction::{GeneratorMode, Phase, Session, SessionError, SessionSnapshot};
use crate::service::ServiceDirectory;
use crate::transform::Answers;

type SharedSession = Arc<Mutex<Session>>;

/// Sessions by id, optionally mirrored to a snapshot file.
#[derive(Default)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, SharedSession>>,
    snapshot_file: Option<PathBuf>,
    write_lock: Mutex<()>,
}

impl SessionStore {
    pub fn new(snapshot_file: Option<PathBuf>) -> Self {
        SessionStore {
            sessions: Mutex::default(),
            snapshot_file,
            write_lock: Mutex::default(),
        }
    }

    pub fn get(&self, id: &str) -> Option<SharedSession> {
        self.sessions.lock().unwrap().get(id).cloned()
    }

    pub fn insert(&self, session: Session) -> String {
        let id = session.id.clone();
        self.sessions
            .lock()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshots(&self) -> Vec<SessionSnapshot> {
        let all: Vec<SharedSession> = self.sessions.lock().unwrap().values().cloned().collect();
        let mut snaps: Vec<SessionSnapshot> =
            all.iter().map(|s| s.lock().unwrap().snapshot()).collect();
        snaps.sort_by(|a, b| a.id.cmp(&b.id));
        snaps
    }

    /// Writes every session to the snapshot file, if one is configured.
    pub fn persist(&self) {
        let Some(path) = &self.snapshot_file else {
            return;
        };
        let _guard = self.write_lock.lock().unwrap();
        let text = serde_json::to_string(&self.snapshots()).expect("snapshots serialize");
        let tmp = path.with_extension("tmp");
        if let Err(e) = std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, path)) {
            log::error!("cannot write snapshot {}: {e}", path.display());
        }
    }

    /// Restores sessions from the snapshot file; sessions of services that
    /// no longer load are dropped with a warning.
    pub fn restore(&self, services: &ServiceDirectory) -> std::io::Result<usize> {
        let Some(path) = &self.snapshot_file else {
            return Ok(0);
        };
        if !path.exists() {
            return Ok(0);
        }
        let text = std::fs::read_to_string(path)?;
        let snaps: Vec<SessionSnapshot> = serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let mut restored = 0;
        for snap in snaps {
            let id = snap.id.clone();
            let Some(service) = services.get(&snap.service) else {
                log::warn!("dropping session {id}: unknown service '{}'", snap.service);
                continue;
            };
            match Session::restore(snap, service) {
                Ok(s) => {
                    self.insert(s);
                    restored += 1;
                }
                Err(e) => log::warn!("dropping session {id}: {e}"),
            }
        }
        Ok(restored)
    }
}

pub struct ServerState {
    pub services: ServiceDirectory,
    pub client: Arc<dyn DataAdminClient>,
    /// Backs `/functions/{name}`.
    pub fixtures: FixtureStore,
    pub sessions: SessionStore,
}

impl ServerState {
    /// State with a fixture-backed data administration.
    pub fn with_fixtures(
        services: ServiceDirectory,
        fixtures: FixtureStore,
        snapshot_file: Option<PathBuf>,
    ) -> Self {
        ServerState {
            services,
            client: Arc::new(MockDataAdmin::new(fixtures.clone())),
            fixtures,
            sessions: SessionStore::new(snapshot_file),
        }
    }
}

type AppState = Arc<ServerState>;

fn error(status: StatusCode, body: JsonValue) -> Response {
    (status, Json(body)).into_response()
}

fn not_found(what: &str) -> Response {
    error(StatusCode::NOT_FOUND, json!({ "error": what }))
}

fn session_error(e: SessionError) -> Response {
    match e {
        SessionError::NotCollecting(phase) => error(
            StatusCode::CONFLICT,
            json!({ "error": e.to_string(), "phase": phase }),
        ),
        SessionError::Invalid { errors, page } => error(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({ "error": "invalid answers", "errors": errors, "page": page }),
        ),
        SessionError::Premature { open } => error(
            StatusCode::CONFLICT,
            json!({ "error": "the application is not complete", "open": open }),
        ),
        SessionError::DataAdmin(d) => {
            error(StatusCode::BAD_GATEWAY, json!({ "error": d.to_string() }))
        }
        other => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "error": other.to_string() }),
        ),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f)
        .await
        .expect("session task panicked")
}

fn page_body(page: &Page) -> JsonValue {
    serde_json::to_value(page).expect("page serializes")
}

fn phase_body(s: &Session) -> JsonValue {
    json!({ "phase": s.phase() })
}

async fn list_services(State(state): State<AppState>) -> Response {
    Json(state.services.summaries()).into_response()
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct NewSession {
    service: String,
    #[serde(default)]
    citizen_id: String,
    mode: String,
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, json!({ "error": e.body_text() })),
    };
    let mode: GeneratorMode = match req.mode.parse() {
        Ok(m) => m,
        Err(e) => return error(StatusCode::BAD_REQUEST, json!({ "error": format!("{e}") })),
    };
    let Some(service) = state.services.get(&req.service) else {
        return not_found(&format!("unknown service '{}'", req.service));
    };
    blocking(
        move || match Session::start(service, &req.citizen_id, mode, state.client.as_ref()) {
            Ok(s) => {
                let body =
                    json!({ "sessionId": s.id, "phase": s.phase(), "warnings": s.warnings() });
                state.sessions.insert(s);
                state.sessions.persist();
                (StatusCode::CREATED, Json(body)).into_response()
            }
            Err(e) => session_error(e),
        },
    )
    .await
}

fn wants_html(headers: &HeaderMap) -> bool {
    headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("text/html"))
}

async fn get_page(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Response {
    let Some(session) = state.sessions.get(&id) else {
        return not_found("unknown session");
    };
    let html = wants_html(&headers);
    blocking(move || {
        let s = session.lock().unwrap();
        match s.page() {
            Ok(page) if html => (
                [(header::CONTENT_TYPE, "text/html; charset=utf-8")],
                render_html(page),
            )
                .into_response(),
            Ok(page) => Json(page_body(page)).into_response(),
            Err(_) => Json(phase_body(&s)).into_response(),
        }
    })
    .await
}

#[derive(Deserialize)]
struct AnswerBody {
    #[serde(default)]
    answers: Answers,
}

async fn post_answers(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<AnswerBody>, JsonRejection>,
) -> Response {
    let Json(body) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, json!({ "error": e.body_text() })),
    };
    let Some(session) = state.sessions.get(&id) else {
        return not_found("unknown session");
    };
    blocking(move || {
        let response = {
            let mut s = session.lock().unwrap();
            if s.phase() != Phase::Collecting {
                return session_error(SessionError::NotCollecting(s.phase()));
            }
            if let Err(e) = s.submit(&body.answers, state.client.as_ref()) {
                return session_error(e);
            }
            match s.page() {
                Ok(page) => Json(page_body(page)).into_response(),
                Err(_) => Json(phase_body(&s)).into_response(),
            }
        };
        state.sessions.persist();
        response
    })
    .await
}

#[derive(Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

async fn get_report(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ReportQuery>,
) -> Response {
    let format: ReportFormat = match q.format.as_deref().unwrap_or("xml").parse() {
        Ok(f) => f,
        Err(_) => {
            return error(
                StatusCode::BAD_REQUEST,
                json!({ "error": "format must be xml or text" }),
            )
        }
    };
    let Some(session) = state.sessions.get(&id) else {
        return not_found("unknown session");
    };
    blocking(move || {
        let (text, changed) = {
            let mut s = session.lock().unwrap();
            let before = s.phase();
            match s.report() {
                Ok(r) => (render_report(r, format), before != Phase::Reported),
                Err(e) => return session_error(e),
            }
        };
        if changed {
            state.sessions.persist();
        }
        ([(header::CONTENT_TYPE, format.content_type())], text).into_response()
    })
    .await
}

async fn call_function(
    State(state): State<AppState>,
    UrlPath(name): UrlPath<String>,
    body: Result<Json<FunctionRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, json!({ "error": e.body_text() })),
    };
    let Some(function) = state
        .services
        .iter()
        .find_map(|s| s.catalog.function(&name))
    else {
        return error(
            StatusCode::NOT_FOUND,
            json!(DataAdminError::UnknownFunction(name)),
        );
    };
    match state.fixtures.lookup(&req.citizen_id, &name) {
        Ok(mut values) => {
            values.retain(|k, _| function.provides.contains(k));
            let values = values
                .into_iter()
                .map(|(k, v)| (k, JsonValue::String(v)))
                .collect();
            Json(FunctionResponse { values }).into_response()
        }
        Err(e) => error(StatusCode::NOT_FOUND, json!(e)),
    }
}

pub fn router(state: AppState, ui_dir: Option<&Path>) -> Router {
    let mut app = Router::new()
        .route("/services", get(list_services))
        .route("/sessions", post(create_session))
        .route("/sessions/:id/page", get(get_page))
        .route("/sessions/:id/answers", post(post_answers))
        .route("/sessions/:id/report", get(get_report))
        .route("/functions/:name", post(call_function));
    if let Some(dir) = ui_dir {
        app = app.nest_service(
            "/ui",
            ServeDir::new(dir).append_index_html_on_directories(true),
        );
    }
    app.with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub port: u16,
    pub services_dir: PathBuf,
    pub fixtures: Option<PathBuf>,
    pub snapshot_file: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
    /// Remote data administration; the fixtures back the sessions otherwise.
    pub data_admin_url: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("services directory {}: {source}", path.display())]
    Services {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Fixtures(#[from] crate::data_admin::FixtureError),
    #[error("snapshot: {0}")]
    Snapshot(std::io::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Loads services, fixtures and snapshots as configured.
pub fn build_state(config: &ServerConfig) -> Result<ServerState, ServerError> {
    let services =
        ServiceDirectory::load(&config.services_dir).map_err(|source| ServerError::Services {
            path: config.services_dir.clone(),
            source,
        })?;
    let fixtures = match &config.fixtures {
        Some(path) => crate::data_admin::load_fixtures(path, &services.catalogs())?,
        None => FixtureStore::default(),
    };
    let mut state = ServerState::with_fixtures(services, fixtures, config.snapshot_file.clone());
    if let Some(url) = &config.data_admin_url {
        state.client = Arc::new(crate::data_admin::RemoteDataAdmin::new(url.clone()));
    }
    let restored = state
        .sessions
        .restore(&state.services)
        .map_err(ServerError::Snapshot)?;
    if restored > 0 {
        log::info!("restored {restored} sessions");
    }
    Ok(state)
}

/// Serves until ctrl-c.
pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    let state = Arc::new(build_state(&config)?);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    log::info!(
        "listening on {} with {} services",
        listener.local_addr()?,
        state.services.len()
    );
    axum::serve(listener, router(state, config.ui_dir.as_deref()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// A server on an ephemeral local port, running on its own thread until
/// dropped. Meant for tests and examples.
pub struct BackgroundServer {
    pub addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(state: Arc<ServerState>, ui_dir: Option<PathBuf>) -> std::io::Result<Self> {
        let std_listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        std_listener.set_nonblocking(true)?;
        let addr = std_listener.local_addr()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .expect("runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener");
                let app = router(state, ui_dir.as_deref());
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(BackgroundServer {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
