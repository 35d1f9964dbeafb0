//! JSON-over-HTTP sessions for the co-active adaptation loop.
//!
//! Every session owns a scenario, a movement-primitive model, the learning
//! state and the trajectories produced so far. Writes to one session are
//! serialized by a per-session guard; reads take the latest snapshot.

pub mod error;
pub mod session;

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::de::DeserializeOwned;
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorBody};
pub use session::{
    AdaptResponse, CreateSession, FeedbackRequest, FeedbackResponse, FitRequest, ImitateResponse,
    ModelSummary, Session, StoredTrajectory, WeightsResponse,
};

struct Slot {
    writer: tokio::sync::Mutex<()>,
    current: RwLock<Arc<Session>>,
}

/// In-memory sessions, optionally mirrored to `<dir>/<id>.json`.
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    snapshot_dir: Option<PathBuf>,
}

impl SessionStore {
    /// Opens a store, loading any snapshots already present in the directory.
    pub fn open(snapshot_dir: Option<PathBuf>) -> io::Result<Self> {
        let store = SessionStore {
            sessions: RwLock::new(HashMap::new()),
            snapshot_dir,
        };
        if let Some(dir) = &store.snapshot_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().is_none_or(|e| e != "json") {
                    continue;
                }
                match std::fs::read(&path).map(|b| serde_json::from_slice::<Session>(&b)) {
                    Ok(Ok(s)) => store.put(s),
                    Ok(Err(e)) => log::warn!("skipping snapshot {}: {e}", path.display()),
                    Err(e) => log::warn!("skipping snapshot {}: {e}", path.display()),
                }
            }
        }
        Ok(store)
    }

    pub fn in_memory() -> Self {
        SessionStore {
            sessions: RwLock::new(HashMap::new()),
            snapshot_dir: None,
        }
    }

    fn put(&self, s: Session) {
        let slot = Slot {
            writer: tokio::sync::Mutex::new(()),
            current: RwLock::new(Arc::new(s.clone())),
        };
        self.sessions.write().insert(s.id, Arc::new(slot));
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::session_not_found(id))
    }

    /// Latest committed state of a session.
    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        Ok(self.slot(id)?.current.read().clone())
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub async fn create(&self, req: CreateSession) -> Result<Arc<Session>, ApiError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::create(id, req)?;
        let dir = self.snapshot_dir.clone();
        let session = tokio::task::spawn_blocking(move || {
            write_snapshot(dir.as_deref(), &session).map(|_| session)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(format!("snapshot: {e}")))?;
        self.put(session.clone());
        Ok(Arc::new(session))
    }

    /// Applies `f` to a copy of the session under its write guard and
    /// commits the copy only if `f` succeeds.
    pub async fn update<R, F>(&self, id: &str, f: F) -> Result<R, ApiError>
    where
        R: Send + 'static,
        F: FnOnce(&mut Session) -> coadapt_core::Result<R> + Send + 'static,
    {
        let slot = self.slot(id)?;
        let _guard = slot.writer.lock().await;
        let mut draft = (**slot.current.read()).clone();
        let dir = self.snapshot_dir.clone();
        let (draft, out) = tokio::task::spawn_blocking(move || -> Result<_, ApiError> {
            let out = f(&mut draft)?;
            write_snapshot(dir.as_deref(), &draft)
                .map_err(|e| ApiError::internal(format!("snapshot: {e}")))?;
            Ok((draft, out))
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
        *slot.current.write() = Arc::new(draft);
        Ok(out)
    }
}

fn write_snapshot(dir: Option<&Path>, s: &Session) -> io::Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    let tmp = dir.join(format!("{}.json.tmp", s.id));
    std::fs::write(&tmp, serde_json::to_vec(s).map_err(io::Error::other)?)?;
    std::fs::rename(tmp, dir.join(format!("{}.json", s.id)))
}

/// Parses a request body, separating broken JSON (400) from JSON of the
/// wrong shape (422).
fn parse<T: DeserializeOwned>(body: &[u8], code: &'static str) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        let detail = serde_json::json!({ "line": e.line(), "column": e.column(), "reason": e.to_string() });
        if e.is_data() {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string()).with_detail(detail)
        } else {
            ApiError::new(StatusCode::BAD_REQUEST, "malformed-json", e.to_string()).with_detail(detail)
        }
    })
}

type Shared = Arc<SessionStore>;

async fn create_session(State(store): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse(&body, "invalid-session")?;
    let s = store.create(req).await?;
    let body = serde_json::json!({
        "id": s.id,
        "weights": s.learning.weights,
        "iteration": s.learning.iteration,
        "has_model": s.model.is_some(),
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn fit(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<ModelSummary>, ApiError> {
    store.get(&id)?;
    let req: FitRequest = parse(&body, "invalid-demonstrations")?;
    Ok(Json(store.update(&id, move |s| s.fit(req)).await?))
}

async fn imitate(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<ImitateResponse>, ApiError> {
    Ok(Json(store.update(&id, |s| s.imitate()).await?))
}

async fn adapt(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<AdaptResponse>, ApiError> {
    Ok(Json(store.update(&id, |s| s.adapt()).await?))
}

async fn feedback(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<FeedbackResponse>, ApiError> {
    store.get(&id)?;
    let req: FeedbackRequest = parse(&body, "invalid-trajectory")?;
    let out = store.update(&id, move |s| s.feedback(req)).await.map_err(|e| {
        if e.body.code == "dimension-mismatch" {
            ApiError {
                body: ErrorBody {
                    code: "invalid-trajectory",
                    ..e.body
                },
                ..e
            }
        } else {
            e
        }
    })?;
    Ok(Json(out))
}

async fn weights(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<WeightsResponse>, ApiError> {
    Ok(Json(store.get(&id)?.weights()))
}

async fn trajectory(
    State(store): State<Shared>,
    UrlPath((id, tid)): UrlPath<(String, String)>,
) -> Result<Json<StoredTrajectory>, ApiError> {
    let s = store.get(&id)?;
    s.trajectories.get(&tid).cloned().map(Json).ok_or_else(|| {
        ApiError::new(StatusCode::NOT_FOUND, "trajectory-not-found", format!("no trajectory {tid}"))
            .with_detail(serde_json::json!({ "session": id, "trajectory": tid }))
    })
}

async fn session_info(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let s = store.get(&id)?;
    Ok(Json(serde_json::json!({
        "id": s.id,
        "scenario": s.scenario,
        "config": s.config,
        "iteration": s.learning.iteration,
        "has_model": s.model.is_some(),
        "imitation": s.imitation,
        "adapted": s.adapted,
        "trajectories": s.trajectories.keys().collect::<Vec<_>>(),
    })))
}

/// All API routes; `static_dir` is served under `/` when given.
pub fn router(store: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info))
        .route("/sessions/{id}/demonstrations", post(fit))
        .route("/sessions/{id}/imitate", post(imitate))
        .route("/sessions/{id}/adapt", post(adapt))
        .route("/sessions/{id}/feedback", post(feedback))
        .route("/sessions/{id}/weights", get(weights))
        .route("/sessions/{id}/trajectories/{tid}", get(trajectory))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: &str, snapshot_dir: Option<PathBuf>, static_dir: Option<PathBuf>) -> io::Result<()> {
    let store = Arc::new(SessionStore::open(snapshot_dir)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store, static_dir)).await
}
