//! HTTP routes over [`Session`]s.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use seqcompare_core::affix::{Metric, SortOrder};
use seqcompare_core::alignment::AlignmentView;
use seqcompare_core::dataset::Stats;
use seqcompare_core::matrix::Pick;

use crate::error::ServiceError;
use crate::session::{
    Catalog, CreateResponse, MatrixOp, MatrixResponse, MiningProgress, PatternQuery, PatternsResponse, SelectionResponse,
    Session, SessionSnapshot, StatusResponse,
};

/// One session and its lock-free progress counters.
#[derive(Debug)]
pub struct SessionHandle {
    session: Mutex<Session>,
    progress: Arc<MiningProgress>,
}

impl SessionHandle {
    fn new(session: Session) -> Arc<SessionHandle> {
        Arc::new(SessionHandle {
            session: Mutex::new(session),
            progress: Arc::default(),
        })
    }
}

#[derive(Debug)]
pub struct AppState {
    catalog: Arc<Catalog>,
    sessions: RwLock<BTreeMap<String, Arc<SessionHandle>>>,
    counter: AtomicU64,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(catalog: Catalog) -> AppState {
        AppState {
            catalog: Arc::new(catalog),
            sessions: RwLock::default(),
            counter: AtomicU64::new(0),
            snapshot_dir: None,
        }
    }

    /// Persists sessions under `dir` and restores the ones already there.
    /// Snapshots that no longer match the catalog are skipped.
    pub fn with_snapshots(mut self, dir: &Path) -> Result<AppState, ServiceError> {
        fs::create_dir_all(dir).map_err(internal)?;
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(internal)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        {
            let sessions = self.sessions.get_mut().unwrap();
            for path in entries {
                let restored = fs::read(&path)
                    .map_err(internal)
                    .and_then(|raw| serde_json::from_slice::<SessionSnapshot>(&raw).map_err(internal))
                    .and_then(|snap| Session::restore(snap, &self.catalog));
                match restored {
                    Ok(s) => {
                        if let Some(n) = s.id().strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                            self.counter.fetch_max(n, Ordering::SeqCst);
                        }
                        sessions.insert(s.id().to_string(), SessionHandle::new(s));
                    }
                    Err(e) => tracing::warn!(path = %path.display(), error = %e, "skipping snapshot"),
                }
            }
        }
        self.snapshot_dir = Some(dir.to_path_buf());
        Ok(self)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().unwrap().keys().cloned().collect()
    }

    fn handle(&self, id: &str) -> Result<Arc<SessionHandle>, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn persist(&self, session: &Session) {
        let Some(dir) = &self.snapshot_dir else { return };
        let path = dir.join(format!("{}.json", session.id()));
        let written = serde_json::to_vec_pretty(&session.snapshot())
            .map_err(internal)
            .and_then(|raw| fs::write(&path, raw).map_err(internal));
        if let Err(e) = written {
            tracing::warn!(path = %path.display(), error = %e, "snapshot not written");
        }
    }

    /// Runs `f` on the locked session and snapshots it afterwards.
    fn mutate<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let handle = self.handle(id)?;
        let mut session = handle.session.lock().unwrap();
        let out = f(&mut session)?;
        self.persist(&session);
        Ok(out)
    }
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

fn body<T>(r: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    r.map(|Json(v)| v).map_err(|e| ServiceError::Unprocessable(e.body_text()))
}

fn query<T>(r: Result<Query<T>, QueryRejection>) -> Result<T, ServiceError> {
    r.map(|Query(v)| v).map_err(|e| ServiceError::Unprocessable(e.body_text()))
}

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ServiceError>;

#[derive(Debug, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub stats: Stats,
}

async fn list_datasets(State(app): Shared) -> ApiResult<Vec<DatasetInfo>> {
    let cat = app.catalog();
    let infos = cat
        .names()
        .map(|n| {
            Ok(DatasetInfo {
                name: n.to_string(),
                stats: cat.dataset(n)?.stats(),
            })
        })
        .collect::<Result<_, ServiceError>>()?;
    Ok(Json(infos))
}

#[derive(Debug, Deserialize)]
struct CreateRequest {
    dataset: String,
}

async fn create_session(State(app): Shared, req: Result<Json<CreateRequest>, JsonRejection>) -> ApiResult<CreateResponse> {
    let req = body(req)?;
    // Validate before consuming an id so failed creates leave no gaps.
    app.catalog.dataset(&req.dataset)?;
    let id = format!("s{}", app.counter.fetch_add(1, Ordering::SeqCst) + 1);
    let session = Session::new(id.clone(), &req.dataset, &app.catalog)?;
    let created = session.created()?;
    app.persist(&session);
    app.sessions.write().unwrap().insert(id, SessionHandle::new(session));
    Ok(Json(created))
}

async fn get_matrix(State(app): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<MatrixResponse> {
    let handle = app.handle(&id)?;
    let session = handle.session.lock().unwrap();
    Ok(Json(session.matrix()?))
}

async fn post_matrix(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    req: Result<Json<MatrixOp>, JsonRejection>,
) -> ApiResult<MatrixResponse> {
    let op = body(req)?;
    Ok(Json(app.mutate(&id, |s| s.apply(&op))?))
}

#[derive(Debug, Deserialize)]
struct SortRequest {
    metric: Metric,
    order: SortOrder,
}

async fn post_sort(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    req: Result<Json<SortRequest>, JsonRejection>,
) -> ApiResult<MatrixResponse> {
    let req = body(req)?;
    Ok(Json(app.mutate(&id, |s| s.sort(req.metric, req.order))?))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct FilterRequest {
    min_len: usize,
    #[serde(default)]
    max_len: Option<usize>,
}

async fn post_filter(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    req: Result<Json<FilterRequest>, JsonRejection>,
) -> ApiResult<MatrixResponse> {
    let req = body(req)?;
    let catalog = app.catalog.clone();
    Ok(Json(app.mutate(&id, |s| s.filter(&catalog, req.min_len, req.max_len))?))
}

#[derive(Debug, Deserialize)]
struct BarsRequest {
    metric: Metric,
}

async fn post_bars(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    req: Result<Json<BarsRequest>, JsonRejection>,
) -> ApiResult<MatrixResponse> {
    let req = body(req)?;
    Ok(Json(app.mutate(&id, |s| s.set_bar_metric(req.metric))?))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SelectionRequest {
    picks_a: Vec<Pick>,
    picks_b: Vec<Pick>,
}

async fn post_selection(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    req: Result<Json<SelectionRequest>, JsonRejection>,
) -> ApiResult<SelectionResponse> {
    let req = body(req)?;
    Ok(Json(app.mutate(&id, |s| s.select(&req.picks_a, &req.picks_b))?))
}

async fn get_patterns(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    q: Result<Query<PatternQuery>, QueryRejection>,
) -> ApiResult<PatternsResponse> {
    let q = query(q)?;
    let handle = app.handle(&id)?;
    let app = app.clone();
    // Mining is CPU-bound; keep it off the async workers so the status
    // endpoint stays responsive.
    let out = tokio::task::spawn_blocking(move || {
        let mut session = handle.session.lock().unwrap();
        let before = session.snapshot();
        let out = session.patterns(&q, &handle.progress)?;
        if session.snapshot() != before {
            app.persist(&session);
        }
        Ok::<_, ServiceError>(out)
    })
    .await
    .map_err(internal)??;
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SequencesQuery {
    #[serde(default)]
    align_event: Option<String>,
}

async fn get_sequences(
    State(app): Shared,
    UrlPath((id, pid)): UrlPath<(String, String)>,
    q: Result<Query<SequencesQuery>, QueryRejection>,
) -> ApiResult<AlignmentView> {
    let q = query(q)?;
    let handle = app.handle(&id)?;
    let session = handle.session.lock().unwrap();
    Ok(Json(session.sequences(&pid, q.align_event.as_deref())?))
}

async fn get_status(State(app): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<StatusResponse> {
    Ok(Json(app.handle(&id)?.progress.status()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/datasets", get(list_datasets))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/matrix", get(get_matrix).post(post_matrix))
        .route("/sessions/{id}/matrix/sort", post(post_sort))
        .route("/sessions/{id}/matrix/filter", post(post_filter))
        .route("/sessions/{id}/matrix/bars", post(post_bars))
        .route("/sessions/{id}/selection", post(post_selection))
        .route("/sessions/{id}/patterns", get(get_patterns))
        .route("/sessions/{id}/patterns/{pid}/sequences", get(get_sequences))
        .route("/sessions/{id}/status", get(get_status))
        .with_state(state)
}
