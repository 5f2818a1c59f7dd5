//! HTTP session service for interactive segmentation.
//!
//! Sessions live in memory. Each session has its own async mutex, so
//! requests against one session run one at a time in arrival order while
//! different sessions proceed concurrently. CPU-heavy work runs on the
//! blocking pool.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};
use std::time::{Instant, SystemTime};

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use seedseg::image::{load_ppm, render_contours, save_ppm};
use seedseg::segmenter::{segment_auto, segment_from_point};
use seedseg::{ImageRgb, LabelMap, Mlp64, PixelCoord};
use tokio::sync::Mutex;

use crate::cli::{read_image, read_model, ServeArgs};
use crate::pipeline::{train_model, PipelineConfig};

/// Largest accepted upload.
pub const MAX_UPLOAD_BYTES: usize = 16 * 1024 * 1024;

const PPM_CONTENT_TYPE: &str = "image/x-portable-pixmap";
const INDEX_HTML: &str = include_str!("../assets/index.html");

pub struct Session {
    pub id: String,
    pub image: Arc<ImageRgb>,
    pub model: Option<Arc<Mlp64>>,
    pub created_at: SystemTime,
    /// Most recent automatic segmentation and the seed that produced it.
    last_auto: Option<(u64, Arc<LabelMap>)>,
}

type SessionHandle = Arc<Mutex<Session>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, SessionHandle>>>,
}

impl AppState {
    /// Registers a new session and returns its id.
    pub fn create_session(&self, image: ImageRgb, model: Option<Mlp64>) -> String {
        let mut sessions = self.sessions.write().expect("session table poisoned");
        let id = loop {
            let candidate = format!("{:032x}", rand::random::<u128>());
            if !sessions.contains_key(&candidate) {
                break candidate;
            }
        };
        let session = Session {
            id: id.clone(),
            image: Arc::new(image),
            model: model.map(Arc::new),
            created_at: SystemTime::now(),
            last_auto: None,
        };
        sessions.insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        let sessions = self.sessions.read().expect("session table poisoned");
        sessions.get(id).cloned().ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown session"))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(err: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::BAD_REQUEST, err.to_string())
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SessionCreated {
    pub id: String,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TrainRequest {
    pub noise_p: f64,
    pub noise_runs: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
}

impl Default for TrainRequest {
    fn default() -> Self {
        let cfg = PipelineConfig::default();
        Self {
            noise_p: cfg.noise.p,
            noise_runs: cfg.noise.runs,
            hidden: cfg.hidden_size,
            epochs: cfg.train.epochs,
            learning_rate: cfg.train.learning_rate,
            rng_seed: 0,
        }
    }
}

impl TrainRequest {
    /// Same seed derivation as `seedseg train --seed`.
    pub fn pipeline_config(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig::from_seed(self.rng_seed);
        cfg.noise.p = self.noise_p;
        cfg.noise.runs = self.noise_runs;
        cfg.hidden_size = self.hidden;
        cfg.train.epochs = self.epochs;
        cfg.train.learning_rate = self.learning_rate;
        cfg
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TrainResponse {
    pub status: String,
    pub pairs: usize,
    pub final_mean_loss: f64,
    pub seconds: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentRequest {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SegmentResponse {
    pub size: usize,
    /// `[y, x_start, length]` runs, row-major.
    pub runs: Vec<[usize; 3]>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct AutoResponse {
    pub segments: u32,
    pub sizes: BTreeMap<u32, usize>,
}

#[derive(Debug, Deserialize)]
pub struct AutoQuery {
    #[serde(default)]
    pub rng_seed: u64,
}

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Json<SessionCreated>, ApiError> {
    let image = load_ppm(&body).map_err(ApiError::bad_request)?;
    let (width, height) = (image.width(), image.height());
    let id = state.create_session(image, None);
    log::info!("session {id}: {width}x{height} image");
    Ok(Json(SessionCreated { id, width, height }))
}

async fn get_image(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let image = session.lock().await.image.clone();
    Ok(([(header::CONTENT_TYPE, PPM_CONTENT_TYPE)], save_ppm(&image)).into_response())
}

async fn train(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<TrainRequest>,
) -> Result<Json<TrainResponse>, ApiError> {
    let session = state.session(&id)?;
    let mut guard = session.lock_owned().await;
    let image = guard.image.clone();
    let cfg = req.pipeline_config();
    let started = Instant::now();
    let outcome = tokio::task::spawn_blocking(move || train_model(&image, &cfg, |_| std::ops::ControlFlow::Continue(())))
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::bad_request)?;
    guard.model = Some(Arc::new(outcome.model));
    guard.last_auto = None;
    Ok(Json(TrainResponse {
        status: "trained".into(),
        pairs: outcome.pairs,
        final_mean_loss: outcome.report.final_mean_loss,
        seconds: started.elapsed().as_secs_f64(),
    }))
}

fn trained_model(session: &Session) -> Result<Arc<Mlp64>, ApiError> {
    session.model.clone().ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "model not trained"))
}

async fn segment(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<SegmentRequest>,
) -> Result<Json<SegmentResponse>, ApiError> {
    let session = state.session(&id)?;
    let guard = session.lock_owned().await;
    let model = trained_model(&guard)?;
    let image = guard.image.clone();
    let at = PixelCoord::new(req.x, req.y);
    let (mask, _) = tokio::task::spawn_blocking(move || segment_from_point(&image, model.as_ref(), at))
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::bad_request)?;
    drop(guard);
    Ok(Json(SegmentResponse { size: mask.len(), runs: mask.runs() }))
}

/// Label map for `rng_seed`, reusing the session's last result when possible.
async fn auto_labels(session: SessionHandle, rng_seed: u64) -> Result<(Arc<ImageRgb>, Arc<LabelMap>), ApiError> {
    let mut guard = session.lock_owned().await;
    let model = trained_model(&guard)?;
    let image = guard.image.clone();
    if let Some((seed, lm)) = &guard.last_auto {
        if *seed == rng_seed {
            return Ok((image, lm.clone()));
        }
    }
    let img = image.clone();
    let lm = tokio::task::spawn_blocking(move || segment_auto(&img, model.as_ref(), rng_seed).0)
        .await
        .map_err(ApiError::internal)?;
    let lm = Arc::new(lm);
    guard.last_auto = Some((rng_seed, lm.clone()));
    Ok((image, lm))
}

async fn auto(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<AutoQuery>,
) -> Result<Json<AutoResponse>, ApiError> {
    let (_, lm) = auto_labels(state.session(&id)?, q.rng_seed).await?;
    Ok(Json(AutoResponse { segments: lm.max_label(), sizes: lm.sizes() }))
}

async fn contours(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<AutoQuery>,
) -> Result<Response, ApiError> {
    let (image, lm) = auto_labels(state.session(&id)?, q.rng_seed).await?;
    let rendered = render_contours(&image, &lm).map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, PPM_CONTENT_TYPE)], save_ppm(&rendered)).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/image", get(get_image))
        .route("/api/session/{id}/train", post(train))
        .route("/api/session/{id}/segment", post(segment))
        .route("/api/session/{id}/auto", get(auto))
        .route("/api/session/{id}/contours.ppm", get(contours))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// Entry point for `seedseg serve`.
pub fn run_blocking(args: ServeArgs) -> anyhow::Result<()> {
    let state = AppState::default();
    if let Some(path) = &args.input {
        let image = read_image(path)?;
        let model = args.model.as_deref().map(read_model).transpose()?;
        let id = state.create_session(image, model);
        println!("session {id}");
    }
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse().context("invalid host/port")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(serve(addr, state))
}
