//! HTTP API for interactive discovery sessions.
//!
//! Every session lives in memory behind its own mutex, so mutations on one
//! session are serialized while different sessions proceed in parallel.
//! Work runs on the blocking pool.

mod doc;
mod error;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ilc_core::dataset::{read_csv, ClassLabel, LoadOptions, NDPoint};
use ilc_core::discovery::{CandidateList, GridBox, TraceStep};
use ilc_core::formats::{read_ruleset, write_predictions, write_ruleset, write_trace};
use ilc_core::mapping::MappingKind;
use ilc_core::rules::{JoinStep, PruneStrategy, PrunedRule, RuleMetrics};
use ilc_core::session::{Choice, Session, SessionConfig};
use ilc_core::{LabeledDataset, MappingMode, RuleSet};
use serde::{Deserialize, Serialize};

pub use error::{ApiError, ApiResult};

type Shared = Arc<Mutex<Session>>;

/// Sessions plus an optional dataset used when a create request names none.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<BTreeMap<String, Shared>>>,
    next_id: Arc<AtomicU64>,
    default_dataset: Option<Arc<LabeledDataset>>,
}

impl AppState {
    pub fn new(default_dataset: Option<LabeledDataset>) -> Self {
        Self {
            default_dataset: default_dataset.map(Arc::new),
            ..Self::default()
        }
    }

    fn get(&self, id: &str) -> ApiResult<Shared> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("session `{id}`")))
    }

    /// Runs `f` on the locked session from the blocking pool.
    async fn with<T, F>(&self, id: &str, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
    {
        let shared = self.get(id)?;
        tokio::task::spawn_blocking(move || {
            let mut s = shared.lock().unwrap_or_else(|p| p.into_inner());
            f(&mut s)
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    }
}

pub fn router(state: AppState) -> Router {
    let session = Router::new()
        .route("/", get(summary).delete(delete_session))
        .route("/plot", get(plot))
        .route("/candidates", get(candidates))
        .route("/accept", post(accept))
        .route("/undo", post(undo))
        .route("/auto-complete", post(auto_complete))
        .route("/join", post(join))
        .route("/prune", post(prune))
        .route("/prune/{rule}", get(prune_preview))
        .route("/metrics", get(metrics))
        .route("/ruleset", get(ruleset).put(import_ruleset))
        .route("/trace", get(trace))
        .route("/classify", post(classify))
        .route("/export/{what}", get(export));
    Router::new()
        .route("/api/v1/spec", get(|| async { Json(doc::api_description()) }))
        .route("/api/v1/sessions", get(list_sessions).post(create_session))
        .nest("/api/v1/sessions/{id}", session)
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct CreateRequest {
    /// CSV text with a header row.
    pub csv: Option<String>,
    /// CSV file readable by the server.
    pub path: Option<String>,
    pub dataset: Option<LabeledDataset>,
    pub options: Option<LoadOptions>,
    /// Shorthand for `config.mode.kind`, e.g. `partial-dynamic`.
    pub mode: Option<String>,
    pub config: Option<SessionConfig>,
}

#[derive(Debug, Serialize)]
pub struct SessionSummary {
    pub id: String,
    pub version: u64,
    pub cases: usize,
    pub classes: Vec<ClassLabel>,
    pub attributes: Vec<String>,
    pub config: SessionConfig,
    pub active: usize,
    pub boxes: usize,
    pub done: bool,
    pub undo_depth: usize,
}

fn summarize(s: &Session) -> SessionSummary {
    SessionSummary {
        id: s.id.clone(),
        version: s.version(),
        cases: s.dataset.len(),
        classes: s.dataset.classes.clone(),
        attributes: s.dataset.attributes.clone(),
        config: s.config.clone(),
        active: s.active_cases().len(),
        boxes: s.trace().steps.len(),
        done: s.is_done(),
        undo_depth: s.undo_depth(),
    }
}

/// Rules as structured data and in readable notation.
#[derive(Debug, Serialize)]
pub struct RulesView {
    pub text: String,
    #[serde(flatten)]
    pub ruleset: RuleSet,
}

impl From<RuleSet> for RulesView {
    fn from(ruleset: RuleSet) -> Self {
        Self {
            text: ruleset.to_string(),
            ruleset,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Progress {
    pub version: u64,
    pub ruleset: RulesView,
    pub metrics: RuleMetrics,
}

fn progress(s: &Session) -> ApiResult<Progress> {
    Ok(Progress {
        version: s.version(),
        ruleset: s.ruleset().into(),
        metrics: s.metrics()?,
    })
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<String>> {
    Json(state.sessions.read().expect("session map lock").keys().cloned().collect())
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateRequest>,
) -> ApiResult<(StatusCode, Json<SessionSummary>)> {
    let mut config = req.config.unwrap_or_default();
    if let Some(m) = &req.mode {
        config.mode = MappingMode::new(m.parse::<MappingKind>()?);
    }
    let opts = req.options.unwrap_or_default();
    let default = state.default_dataset.clone();
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let sid = id.clone();
    let session = tokio::task::spawn_blocking(move || -> ApiResult<Session> {
        let ds = match (req.csv, req.path, req.dataset) {
            (Some(text), None, None) => read_csv(text.as_bytes(), &opts)?,
            (None, Some(path), None) => ilc_core::dataset::load_csv(path, &opts)?,
            (None, None, Some(ds)) => ds,
            (None, None, None) => default
                .map(|d| (*d).clone())
                .ok_or_else(|| ApiError::bad_request("no dataset given and the server has no default"))?,
            _ => return Err(ApiError::bad_request("give exactly one of `csv`, `path`, `dataset`")),
        };
        Ok(Session::new(sid, ds, config)?)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let summary = summarize(&session);
    state
        .sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    log::info!("created session {id} with {} cases", summary.cases);
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn summary(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    state.with(&id, |s| Ok(Json(summarize(s)))).await
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    match state.sessions.write().expect("session map lock").remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(format!("session `{id}`"))),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct PlotQuery {
    pub mirrored: bool,
    /// Draw every case instead of the active ones.
    pub all: bool,
    /// Extra boxes as `x1,x2,y1,y2` separated by `;`.
    pub overlay: Option<String>,
}

fn parse_overlays(spec: &str) -> ApiResult<Vec<GridBox>> {
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(i, s)| {
            let v: Vec<f64> = s
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ApiError::bad_request(format!("overlay `{s}`: {e}")))?;
            match v[..] {
                [x1, x2, y1, y2] => Ok(GridBox::new(format!("O{}", i + 1), x1, x2, y1, y2)?),
                _ => Err(ApiError::bad_request(format!("overlay `{s}` needs four numbers"))),
            }
        })
        .collect()
}

async fn plot(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PlotQuery>,
) -> ApiResult<Response> {
    let extra = q.overlay.as_deref().map(parse_overlays).transpose()?.unwrap_or_default();
    let svg = state.with(&id, move |s| Ok(s.plot(q.mirrored, &extra, q.all)?)).await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct CandidatesQuery {
    pub limit: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct CandidatesView {
    /// State token to send back with an accept.
    pub version: u64,
    #[serde(flatten)]
    pub list: CandidateList,
}

async fn candidates(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CandidatesQuery>,
) -> ApiResult<Json<CandidatesView>> {
    state
        .with(&id, move |s| {
            let list = s.candidates(q.limit)?;
            Ok(Json(CandidatesView {
                version: s.version(),
                list,
            }))
        })
        .await
}

#[derive(Debug, Deserialize)]
pub struct AcceptRequest {
    pub token: u64,
    /// Index into the candidate list produced at `token`.
    pub candidate: Option<usize>,
    /// A box of the user's own.
    #[serde(rename = "box")]
    pub grid_box: Option<GridBox>,
}

#[derive(Debug, Serialize)]
pub struct AcceptResponse {
    pub step: TraceStep,
    #[serde(flatten)]
    pub progress: Progress,
}

async fn accept(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<AcceptRequest>,
) -> ApiResult<Json<AcceptResponse>> {
    let choice = match (req.candidate, req.grid_box) {
        (Some(i), None) => Choice::Candidate(i),
        (None, Some(b)) => Choice::Box(b),
        _ => return Err(ApiError::bad_request("give exactly one of `candidate`, `box`")),
    };
    state
        .with(&id, move |s| {
            let step = s.accept(req.token, choice)?;
            Ok(Json(AcceptResponse {
                step,
                progress: progress(s)?,
            }))
        })
        .await
}

#[derive(Debug, Serialize)]
pub struct UndoResponse {
    pub undone: bool,
    #[serde(flatten)]
    pub progress: Progress,
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<UndoResponse>> {
    state
        .with(&id, |s| {
            let undone = s.undo();
            Ok(Json(UndoResponse {
                undone,
                progress: progress(s)?,
            }))
        })
        .await
}

#[derive(Debug, Serialize)]
pub struct AutoCompleteResponse {
    pub added: usize,
    #[serde(flatten)]
    pub progress: Progress,
}

async fn auto_complete(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<AutoCompleteResponse>> {
    state
        .with(&id, |s| {
            let added = s.auto_complete()?;
            Ok(Json(AutoCompleteResponse {
                added,
                progress: progress(s)?,
            }))
        })
        .await
}

#[derive(Debug, Serialize)]
pub struct JoinResponse {
    pub steps: Vec<JoinStep>,
    #[serde(flatten)]
    pub progress: Progress,
}

async fn join(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<JoinResponse>> {
    state
        .with(&id, |s| {
            let report = s.join()?;
            Ok(Json(JoinResponse {
                steps: report.steps,
                progress: progress(s)?,
            }))
        })
        .await
}

#[derive(Debug, Deserialize)]
pub struct PruneRequest {
    pub strategy: PruneStrategy,
    /// A single rule; otherwise every plain rule deciding at most `tau` cases.
    pub rule: Option<String>,
    pub tau: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct PruneResponse {
    pub pruned: Vec<PrunedRule>,
    #[serde(flatten)]
    pub progress: Progress,
}

async fn prune(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<PruneRequest>,
) -> ApiResult<Json<PruneResponse>> {
    state
        .with(&id, move |s| {
            let report = s.prune(req.rule.as_deref(), req.tau, req.strategy)?;
            Ok(Json(PruneResponse {
                pruned: report.pruned,
                progress: progress(s)?,
            }))
        })
        .await
}

async fn prune_preview(
    State(state): State<AppState>,
    Path((id, rule)): Path<(String, String)>,
) -> ApiResult<Json<PrunedRule>> {
    state.with(&id, move |s| Ok(Json(s.prune_preview(&rule)?))).await
}

async fn metrics(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<RuleMetrics>> {
    state.with(&id, |s| Ok(Json(s.metrics()?))).await
}

async fn ruleset(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<RulesView>> {
    state.with(&id, |s| Ok(Json(s.ruleset().into()))).await
}

/// Replaces the session's rules with a rules file (JSON lines).
async fn import_ruleset(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<Progress>> {
    let rs = read_ruleset(body.as_bytes())?;
    state
        .with(&id, move |s| {
            s.load_ruleset(rs)?;
            Ok(Json(progress(s)?))
        })
        .await
}

async fn trace(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<ilc_core::DiscoveryTrace>> {
    state.with(&id, |s| Ok(Json(s.trace().clone()))).await
}

#[derive(Debug, Deserialize)]
pub struct ClassifyRequest {
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct PredictionView {
    pub class: Option<String>,
    pub refused: bool,
    pub fired: Option<String>,
}

async fn classify(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<ClassifyRequest>,
) -> ApiResult<Json<Vec<PredictionView>>> {
    let points = req
        .points
        .into_iter()
        .map(NDPoint::new)
        .collect::<Result<Vec<_>, _>>()?;
    state
        .with(&id, move |s| {
            Ok(Json(
                s.classify(&points)?
                    .into_iter()
                    .map(|p| PredictionView {
                        class: p.class().map(str::to_string),
                        refused: p.class().is_none(),
                        fired: p.fired,
                    })
                    .collect(),
            ))
        })
        .await
}

/// Files in the formats the command line tools read: `ruleset`, `trace`
/// or `predictions` for the session's own cases.
async fn export(State(state): State<AppState>, Path((id, what)): Path<(String, String)>) -> ApiResult<Response> {
    let body = state
        .with(&id, move |s| {
            let ids: Vec<String> = (0..s.dataset.len()).map(|i| s.dataset.case_id(i)).collect();
            let mut buf = Vec::new();
            match what.as_str() {
                "ruleset" => write_ruleset(&mut buf, &s.ruleset())?,
                "trace" => write_trace(&mut buf, s.trace(), &ids)?,
                "predictions" => {
                    let preds = s.ruleset().classify_all(s.graphs())?;
                    let labels: Vec<String> = (0..s.dataset.len()).map(|i| s.dataset.label_name(i).to_string()).collect();
                    write_predictions(&mut buf, &ids, Some(&labels), &preds)?;
                }
                other => return Err(ApiError::not_found(format!("export `{other}`"))),
            }
            Ok(buf)
        })
        .await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}
