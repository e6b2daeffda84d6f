//! HTTP/JSON facade over a state directory laid out like the CLI's.
//!
//! Reads go to disk on every request, so responses depend only on the
//! directory contents. Writes are serialized by one lock and land on disk
//! (atomic rename) before the response is sent. At most one training job is
//! active at a time; it runs on its own thread and polls a cancel flag
//! between epochs.

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use socialplan_core::irl::{EpochRow, StopReason};
use socialplan_core::metrics::{evaluate_pair, MetricReport};
use socialplan_core::planner::PlannerKind;
use socialplan_core::scenario::ENDPOINT_EPS;
use socialplan_core::{GanPair, Path, PathSource, Point, Scenario, World};

use crate::formats::{
    from_json, path_to_json, read_pair, read_path, read_scenario, scenario_to_json, write_text,
    FormatError, RunConfig, ScenarioDoc,
};
use crate::pipeline::{self, AppError, BEST, DEMOS, MODELS, PLANS, SCENARIOS};

/// Wall-clock budget of a synchronous plan request.
pub const PLAN_BUDGET: Duration = Duration::from_secs(5);

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = match &self {
            AppError::NotFound { .. } => StatusCode::NOT_FOUND,
            AppError::Conflict(_) => StatusCode::CONFLICT,
            AppError::Usage(_) => StatusCode::BAD_REQUEST,
            AppError::Timeout(_) => StatusCode::SERVICE_UNAVAILABLE,
            AppError::Format(FormatError::Io { .. } | FormatError::Csv(_)) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            AppError::Format(_) | AppError::Core(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let mut body = serde_json::json!({ "error": self.code(), "detail": self.to_string() });
        if let Some(f) = self.field() {
            body["field"] = f.into();
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, AppError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobStatus {
    pub id: String,
    pub state: JobState,
    pub epochs_done: usize,
    pub epochs_max: usize,
    pub rows: Vec<EpochRow>,
    pub stop_reason: Option<StopReason>,
    pub best_epoch: Option<usize>,
    pub error: Option<Value>,
}

struct Job {
    cancel: AtomicBool,
    status: Mutex<JobStatus>,
}

pub struct AppState {
    dir: PathBuf,
    config: RunConfig,
    ui: Option<PathBuf>,
    writes: Mutex<()>,
    jobs: Mutex<BTreeMap<String, Arc<Job>>>,
}

pub type Shared = Arc<AppState>;

impl AppState {
    pub fn new(dir: PathBuf, config: RunConfig, ui: Option<PathBuf>) -> Shared {
        Arc::new(Self {
            dir,
            config,
            ui,
            writes: Mutex::new(()),
            jobs: Mutex::new(BTreeMap::new()),
        })
    }

    fn sub(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn scenario_file(&self, id: &str) -> ApiResult<PathBuf> {
        pipeline::check_id(id).map_err(|_| AppError::NotFound {
            what: "scenario",
            id: id.into(),
        })?;
        let f = self.sub(SCENARIOS).join(format!("{id}.json"));
        if f.is_file() {
            Ok(f)
        } else {
            Err(AppError::NotFound {
                what: "scenario",
                id: id.into(),
            })
        }
    }

    fn scenario(&self, id: &str) -> ApiResult<Scenario> {
        Ok(read_scenario(&self.scenario_file(id)?)?)
    }

    fn demo(&self, id: &str) -> ApiResult<Option<Path>> {
        let f = pipeline::demo_file(&self.sub(DEMOS), id);
        Ok(if f.is_file() {
            Some(read_path(&f)?)
        } else {
            None
        })
    }

    fn lock_writes(&self) -> std::sync::MutexGuard<'_, ()> {
        self.writes.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/scenarios", get(list_scenarios).post(create_scenario))
        .route("/api/scenarios/{id}", get(get_scenario))
        .route("/api/scenarios/{id}/demos", post(post_demo))
        .route("/api/scenarios/{id}/paths", get(get_paths))
        .route("/api/scenarios/{id}/plan", post(post_plan))
        .route("/api/train", post(post_train))
        .route("/api/train/{id}", get(get_train).delete(cancel_train))
        .route("/api/models", get(list_models))
        .fallback(static_file)
        .with_state(state)
}

/// Blocks on a multi-threaded runtime until the server stops.
pub fn serve(
    port: u16,
    dir: PathBuf,
    ui: Option<PathBuf>,
    config: RunConfig,
) -> Result<(), AppError> {
    let io = |source| {
        AppError::Format(FormatError::Io {
            path: dir.clone(),
            source,
        })
    };
    for sub in [SCENARIOS, DEMOS, PLANS, MODELS] {
        std::fs::create_dir_all(dir.join(sub)).map_err(io)?;
    }
    let app = router(AppState::new(dir.clone(), config, ui));
    let rt = tokio::runtime::Runtime::new().map_err(io)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app).await
    })
    .map_err(io)
}

fn parse_body<T: serde::de::DeserializeOwned>(what: &'static str, body: &Bytes) -> ApiResult<T> {
    let text = std::str::from_utf8(body)
        .map_err(|e| AppError::Usage(format!("body is not UTF-8: {e}")))?;
    Ok(from_json(what, text)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub pedestrians: usize,
    pub has_demo: bool,
}

async fn list_scenarios(State(st): State<Shared>) -> ApiResult<Json<Vec<ScenarioSummary>>> {
    let dir = st.sub(SCENARIOS);
    if !dir.is_dir() {
        return Ok(Json(Vec::new()));
    }
    let demos = st.sub(DEMOS);
    let out = pipeline::load_scenarios(&dir)?
        .into_iter()
        .map(|s| ScenarioSummary {
            has_demo: pipeline::demo_file(&demos, &s.id).is_file(),
            id: s.id,
            width: s.grid.width(),
            height: s.grid.height(),
            resolution: s.grid.resolution(),
            pedestrians: s.pedestrians.len(),
        })
        .collect();
    Ok(Json(out))
}

async fn get_scenario(
    State(st): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<ScenarioDoc>> {
    Ok(Json(ScenarioDoc::from_scenario(&st.scenario(&id)?)))
}

async fn create_scenario(
    State(st): State<Shared>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<ScenarioDoc>)> {
    let doc: ScenarioDoc = parse_body("scenario", &body)?;
    pipeline::check_id(&doc.id)?;
    let s = doc.into_scenario()?;
    let _w = st.lock_writes();
    let f = st.sub(SCENARIOS).join(format!("{}.json", s.id));
    if f.exists() {
        return Err(AppError::Conflict(format!(
            "scenario `{}` already exists",
            s.id
        )));
    }
    write_text(&f, &scenario_to_json(&s))?;
    Ok((StatusCode::CREATED, Json(ScenarioDoc::from_scenario(&s))))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoRequest {
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoResponse {
    pub path: Path,
    /// First point was moved onto the scenario start.
    pub snapped_start: bool,
    /// Last point was moved onto the goal.
    pub snapped_goal: bool,
}

/// Endpoint snapping: a first point within `goal_radius` of the start moves
/// onto it; a last point outside the goal region but within `goal_radius`
/// of its boundary moves onto the goal.
pub fn snap_demo(s: &Scenario, mut points: Vec<Point>) -> (Vec<Point>, bool, bool) {
    let (mut a, mut b) = (false, false);
    if let Some(first) = points.first_mut() {
        let d = first.dist(s.start);
        if d > ENDPOINT_EPS && d <= s.goal_radius {
            *first = s.start;
            a = true;
        }
    }
    if points.len() >= 2 {
        let last = points.last_mut().unwrap();
        let d = last.dist(s.goal);
        if d > s.goal_radius && d <= 2.0 * s.goal_radius {
            *last = s.goal;
            b = true;
        }
    }
    (points, a, b)
}

async fn post_demo(
    State(st): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<DemoResponse>)> {
    let s = st.scenario(&id)?;
    let req: DemoRequest = parse_body("demo", &body)?;
    let (points, snapped_start, snapped_goal) = snap_demo(&s, req.points);
    let path = Path {
        scenario_id: s.id.clone(),
        source: PathSource::DemoHuman,
        points,
    };
    path.validate(&s, &s.free_space())?;
    let _w = st.lock_writes();
    write_text(
        &pipeline::demo_file(&st.sub(DEMOS), &s.id),
        &path_to_json(&path),
    )?;
    Ok((
        StatusCode::CREATED,
        Json(DemoResponse {
            path,
            snapped_start,
            snapped_goal,
        }),
    ))
}

async fn get_paths(
    State(st): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Vec<Path>>> {
    let s = st.scenario(&id)?;
    let mut out: Vec<Path> = st.demo(&s.id)?.into_iter().collect();
    for kind in [
        PlannerKind::Rrt,
        PlannerKind::RrtStar,
        PlannerKind::GanRrtStar,
    ] {
        let f = pipeline::plan_file(&st.sub(PLANS), &s.id, kind);
        if f.is_file() {
            out.push(read_path(&f)?);
        }
    }
    Ok(Json(out))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub planner: String,
    /// Checkpoint name under `models/`; ganrrtstar defaults to `best`.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanResponse {
    pub path: Path,
    pub cost: Option<f64>,
    pub tree_size: usize,
    /// Present when the scenario has a demo.
    pub metrics: Option<MetricReport>,
}

fn model_file(st: &AppState, name: &str) -> ApiResult<PathBuf> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    pipeline::check_id(stem).map_err(|_| AppError::NotFound {
        what: "model",
        id: name.into(),
    })?;
    let f = st.sub(MODELS).join(format!("{stem}.json"));
    if f.is_file() {
        Ok(f)
    } else {
        Err(AppError::NotFound {
            what: "model",
            id: name.into(),
        })
    }
}

async fn post_plan(
    State(st): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<PlanResponse>> {
    let s = st.scenario(&id)?;
    let req: PlanRequest = parse_body("plan request", &body)?;
    let kind = pipeline::parse_planner(&req.planner)?;
    let pair: Option<GanPair> = match (&req.model, kind) {
        (Some(m), _) => Some(read_pair(&model_file(&st, m)?)?),
        (None, PlannerKind::GanRrtStar) => Some(read_pair(&model_file(&st, BEST)?)?),
        (None, _) => None,
    };
    let mut cfg = st.config.clone();
    if let Some(seed) = req.seed {
        cfg.planner.seed = seed;
    }
    let demo = st.demo(&s.id)?;
    let task = tokio::task::spawn_blocking(move || -> ApiResult<PlanResponse> {
        let r = pipeline::plan_scenario(&s, kind, pair.as_ref(), &cfg)?;
        let cost = r.cost();
        let tree_size = r.tree.nodes.len();
        let path = r
            .path
            .ok_or_else(|| socialplan_core::Error::Infeasible(s.id.clone()))?;
        let metrics = match &demo {
            Some(d) => Some(evaluate_pair(
                &World::new(&s, cfg.features),
                d,
                &path,
                &cfg.metrics,
            )?),
            None => None,
        };
        Ok(PlanResponse {
            path,
            cost,
            tree_size,
            metrics,
        })
    });
    let resp = tokio::time::timeout(PLAN_BUDGET, task)
        .await
        .map_err(|_| AppError::Timeout(format!("planner exceeded {} s", PLAN_BUDGET.as_secs())))?
        .map_err(|e| AppError::Conflict(format!("planner task failed: {e}")))??;
    let _w = st.lock_writes();
    write_text(
        &pipeline::plan_file(&st.sub(PLANS), &id, kind),
        &path_to_json(&resp.path),
    )?;
    Ok(Json(resp))
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

/// `overrides` is a partial config document, optionally with `"split"`.
pub fn train_config(base: &RunConfig, overrides: Value) -> ApiResult<(RunConfig, (usize, usize))> {
    let mut overrides = match overrides {
        Value::Object(m) => m,
        Value::Null => Default::default(),
        _ => return Err(AppError::Usage("train body must be a JSON object".into())),
    };
    let split = match overrides.remove("split") {
        Some(Value::String(s)) => pipeline::parse_split(&s)?,
        Some(_) => {
            return Err(AppError::Usage(
                "split must be a string like \"75:25\"".into(),
            ))
        }
        None => (75, 25),
    };
    let mut doc = serde_json::to_value(base).expect("config serializes");
    merge(&mut doc, Value::Object(overrides));
    let cfg: RunConfig = from_json("config", &doc.to_string())?;
    cfg.validate()?;
    Ok((cfg, split))
}

async fn post_train(
    State(st): State<Shared>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<JobStatus>)> {
    let overrides: Value = if body.is_empty() {
        Value::Null
    } else {
        parse_body("train request", &body)?
    };
    let (cfg, split) = train_config(&st.config, overrides)?;
    let scenarios: Vec<Scenario> = pipeline::load_scenarios(&st.sub(SCENARIOS))?
        .into_iter()
        .filter(|s| pipeline::demo_file(&st.sub(DEMOS), &s.id).is_file())
        .collect();
    let demos = pipeline::load_demos(&st.sub(DEMOS), &scenarios)?;
    pipeline::split_count(scenarios.len(), split)?;

    let mut jobs = st.jobs.lock().unwrap_or_else(|e| e.into_inner());
    let busy = jobs.values().any(|j| {
        let s = j.status.lock().unwrap_or_else(|e| e.into_inner());
        matches!(s.state, JobState::Queued | JobState::Running)
    });
    if busy {
        return Err(AppError::Conflict(
            "a training job is already active".into(),
        ));
    }
    let id = format!("job-{:04}", jobs.len() + 1);
    let status = JobStatus {
        id: id.clone(),
        state: JobState::Queued,
        epochs_done: 0,
        epochs_max: cfg.train.epochs_max,
        rows: Vec::new(),
        stop_reason: None,
        best_epoch: None,
        error: None,
    };
    let job = Arc::new(Job {
        cancel: AtomicBool::new(false),
        status: Mutex::new(status.clone()),
    });
    jobs.insert(id, job.clone());
    drop(jobs);

    let out = st.sub(MODELS);
    std::thread::spawn(move || {
        let set = |f: &mut dyn FnMut(&mut JobStatus)| {
            f(&mut job.status.lock().unwrap_or_else(|e| e.into_inner()))
        };
        set(&mut |s| s.state = JobState::Running);
        let result = pipeline::train(
            &scenarios,
            &demos,
            split,
            &cfg,
            &out,
            &job.cancel,
            &mut |row| {
                set(&mut |s| {
                    s.epochs_done = row.epoch;
                    s.rows.push(row.clone());
                })
            },
        );
        set(&mut |s| match &result {
            Ok((_, o)) => {
                s.state = JobState::Done;
                s.stop_reason = Some(o.report.stop_reason);
                s.best_epoch = Some(o.report.best_epoch);
            }
            Err(e) => {
                s.state = JobState::Failed;
                s.error = Some(serde_json::json!({ "error": e.code(), "detail": e.to_string() }));
            }
        });
    });
    Ok((StatusCode::ACCEPTED, Json(status)))
}

fn job(st: &AppState, id: &str) -> ApiResult<Arc<Job>> {
    st.jobs
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(id)
        .cloned()
        .ok_or_else(|| AppError::NotFound {
            what: "training job",
            id: id.into(),
        })
}

async fn get_train(
    State(st): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<JobStatus>> {
    let j = job(&st, &id)?;
    let s = j.status.lock().unwrap_or_else(|e| e.into_inner()).clone();
    Ok(Json(s))
}

async fn cancel_train(
    State(st): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<JobStatus>> {
    let j = job(&st, &id)?;
    j.cancel.store(true, Ordering::Relaxed);
    let s = j.status.lock().unwrap_or_else(|e| e.into_inner()).clone();
    Ok(Json(s))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    /// Epoch for `epoch-NNNN` checkpoints.
    pub epoch: Option<usize>,
}

async fn list_models(State(st): State<Shared>) -> ApiResult<Json<Vec<ModelSummary>>> {
    let dir = st.sub(MODELS);
    if !dir.is_dir() {
        return Ok(Json(Vec::new()));
    }
    let out = pipeline::json_files(&dir)?
        .into_iter()
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_owned))
        .filter(|name| name != "train_report")
        .map(|name| ModelSummary {
            epoch: name.strip_prefix("epoch-").and_then(|e| e.parse().ok()),
            name,
        })
        .collect();
    Ok(Json(out))
}

fn content_type(p: &FsPath) -> &'static str {
    match p.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

/// Serves the UI bundle; `..` and absolute components are refused.
async fn static_file(State(st): State<Shared>, uri: Uri) -> Response {
    let not_found = || {
        AppError::NotFound {
            what: "resource",
            id: uri.path().into(),
        }
        .into_response()
    };
    let Some(root) = &st.ui else {
        return not_found();
    };
    let rel = uri.path().trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let rel = FsPath::new(rel);
    if rel
        .components()
        .any(|c| !matches!(c, std::path::Component::Normal(_)))
    {
        return not_found();
    }
    let f = root.join(rel);
    match std::fs::read(&f) {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&f))], bytes).into_response(),
        Err(_) => not_found(),
    }
}
