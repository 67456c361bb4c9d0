//! HTTP API for catalog browsing, panels, explanations, weighting config and
//! judgment recording.

pub mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use drec_core::recommender::{title_key, SharedConcept};
use drec_core::{
    compose_panel_list, explain, ingest_catalog, parse_thesaurus, Catalog, CoherenceJudgment,
    EvaluationReport, RecommendError, Thesaurus, WeightingConfig, DEFAULT_K,
};
use serde::Serialize;
use uuid::Uuid;

pub use store::{JudgmentStore, StoreError};

pub const DEFAULT_PORT: u16 = 8080;
const DEFAULT_PER_PAGE: usize = 50;
const MAX_PER_PAGE: usize = 500;

/// Thesaurus and catalog are fixed at startup; the weighting config is
/// swapped whole.
pub struct AppState {
    catalog: Arc<Catalog>,
    config: RwLock<Arc<WeightingConfig>>,
    judgments: JudgmentStore,
}

impl AppState {
    pub fn new(catalog: Arc<Catalog>, config: WeightingConfig, judgments: JudgmentStore) -> Self {
        AppState {
            catalog,
            config: RwLock::new(Arc::new(config)),
            judgments,
        }
    }

    pub fn thesaurus(&self) -> &Thesaurus {
        self.catalog.thesaurus()
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn config(&self) -> Arc<WeightingConfig> {
        self.config.read().expect("config lock").clone()
    }

    pub fn set_config(&self, config: WeightingConfig) {
        *self.config.write().expect("config lock") = Arc::new(config);
    }

    pub fn judgments(&self) -> &JudgmentStore {
        &self.judgments
    }
}

/// Where the service reads its inputs from, normally the `DREC_*`
/// environment variables.
#[derive(Debug, Clone)]
pub struct Settings {
    pub thesaurus: PathBuf,
    pub catalog: PathBuf,
    pub judgments: Option<PathBuf>,
    pub port: u16,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("missing environment variable {0}")]
    MissingVar(&'static str),
    #[error("invalid {var}: {message}")]
    BadVar { var: &'static str, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl Settings {
    pub fn from_env() -> Result<Self, StartupError> {
        let var = |name: &'static str| std::env::var_os(name).map(PathBuf::from);
        let port = match std::env::var("DREC_PORT") {
            Ok(p) => p.parse().map_err(|e| StartupError::BadVar {
                var: "DREC_PORT",
                message: format!("{e}"),
            })?,
            Err(_) => DEFAULT_PORT,
        };
        Ok(Settings {
            thesaurus: var("DREC_THESAURUS").ok_or(StartupError::MissingVar("DREC_THESAURUS"))?,
            catalog: var("DREC_CATALOG").ok_or(StartupError::MissingVar("DREC_CATALOG"))?,
            judgments: var("DREC_JUDGMENTS"),
            port,
        })
    }

    pub fn load(&self, config: WeightingConfig) -> Result<AppState, StartupError> {
        let read = |path: &PathBuf| {
            std::fs::read(path).map_err(|source| StartupError::Io {
                path: path.clone(),
                source,
            })
        };
        let thesaurus =
            parse_thesaurus(&read(&self.thesaurus)?).map_err(|e| StartupError::Invalid {
                path: self.thesaurus.clone(),
                message: e.to_string(),
            })?;
        let catalog = ingest_catalog(&read(&self.catalog)?, Arc::new(thesaurus)).map_err(|e| {
            StartupError::Invalid {
                path: self.catalog.clone(),
                message: e.to_string(),
            }
        })?;
        let judgments = match &self.judgments {
            Some(path) => JudgmentStore::open(path)?,
            None => JudgmentStore::in_memory(),
        };
        Ok(AppState::new(Arc::new(catalog), config, judgments))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/films", get(list_films))
        .route("/api/films/{id}", get(get_film))
        .route("/api/films/{id}/panel", get(get_panel))
        .route("/api/films/{a}/explain/{b}", get(get_explanation))
        .route("/api/judgments", post(post_judgment))
        .route("/api/reports/coherence", get(get_report))
        .route("/api/config/weights", put(put_config))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl From<RecommendError> for ApiError {
    fn from(e: RecommendError) -> Self {
        let status = match e {
            RecommendError::FilmNotFound(_) => StatusCode::NOT_FOUND,
            RecommendError::InvalidK => StatusCode::BAD_REQUEST,
            RecommendError::CatalogTooSmall { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            RecommendError::NoControl(_) => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({
            "error": { "code": self.code, "message": self.message }
        });
        (self.status, json_body(body.to_string())).into_response()
    }
}

fn json_body(body: String) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], body)
}

fn json_ok(body: String) -> Response {
    (StatusCode::OK, json_body(body)).into_response()
}

#[derive(Serialize)]
struct FilmSummary<'a> {
    id: &'a str,
    title: &'a str,
    director: &'a str,
    year: i32,
    duration_min: u32,
}

#[derive(Serialize)]
struct FilmPage<'a> {
    films: Vec<FilmSummary<'a>>,
    total: usize,
    page: usize,
    per_page: usize,
}

fn parse_param<T: std::str::FromStr>(
    params: &HashMap<String, String>,
    name: &str,
) -> Result<Option<T>, ApiError> {
    params
        .get(name)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse().map_err(|_| {
                ApiError::bad_request(
                    "invalid_parameter",
                    format!("invalid value {v:?} for {name}"),
                )
            })
        })
        .transpose()
}

async fn list_films(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let query = params
        .get("q")
        .map(|q| q.to_lowercase())
        .unwrap_or_default();
    let page = parse_param::<usize>(&params, "page")?.unwrap_or(1).max(1);
    let per_page = parse_param::<usize>(&params, "per_page")?
        .unwrap_or(DEFAULT_PER_PAGE)
        .clamp(1, MAX_PER_PAGE);

    let mut hits: Vec<_> = state
        .catalog
        .films()
        .iter()
        .filter(|f| {
            query.is_empty()
                || f.title.to_lowercase().contains(&query)
                || f.director.to_lowercase().contains(&query)
        })
        .collect();
    hits.sort_by_cached_key(|f| (title_key(&f.title), f.title.clone(), f.id.clone()));
    let total = hits.len();
    let films = hits
        .into_iter()
        .skip((page - 1) * per_page)
        .take(per_page)
        .map(|f| FilmSummary {
            id: &f.id,
            title: &f.title,
            director: &f.director,
            year: f.year,
            duration_min: f.duration_min,
        })
        .collect();
    let body = FilmPage {
        films,
        total,
        page,
        per_page,
    };
    Ok(json_ok(
        serde_json::to_string(&body).expect("page serializes"),
    ))
}

async fn get_film(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let film = state
        .catalog
        .get(&id)
        .ok_or_else(|| ApiError::from(RecommendError::FilmNotFound(id.clone())))?;
    let t = state.thesaurus();
    let descriptors: Vec<SharedConcept> = film
        .descriptors
        .iter()
        .filter_map(|d| {
            let c = t.get(d)?;
            Some(SharedConcept {
                id: c.id.clone(),
                label: c.pref_label.clone(),
                definition: c.definition.clone(),
                facet: t.facet(d).ok()?,
            })
        })
        .collect();
    let body = serde_json::json!({ "film": film, "descriptors": descriptors });
    Ok(json_ok(body.to_string()))
}

async fn get_panel(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let k = parse_param::<usize>(&params, "k")?.unwrap_or(DEFAULT_K);
    let unblind = parse_param::<bool>(&params, "unblind")?.unwrap_or(false);
    let config = state.config();
    let panel = compose_panel_list(&state.catalog, &id, k, &config)?;
    Ok(json_ok(panel.to_json(!unblind)))
}

async fn get_explanation(
    State(state): State<Arc<AppState>>,
    Path((a, b)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let config = state.config();
    let e = explain(&state.catalog, &a, &b, &config)?;
    Ok(json_ok(e.to_json()))
}

async fn post_judgment(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let text = std::str::from_utf8(&body)
        .map_err(|_| ApiError::bad_request("invalid_judgment", "body is not UTF-8"))?;
    let mut judgment = CoherenceJudgment::from_json(text, 1)
        .map_err(|e| ApiError::bad_request("invalid_judgment", e.to_string()))?;
    judgment
        .check_films(&state.catalog)
        .map_err(|m| ApiError::bad_request("invalid_judgment", m))?;

    let header_key = headers
        .get("idempotency-key")
        .map(|v| {
            v.to_str()
                .ok()
                .and_then(|s| Uuid::parse_str(s.trim()).ok())
                .ok_or_else(|| {
                    ApiError::bad_request(
                        "invalid_idempotency_key",
                        "Idempotency-Key must be a UUID",
                    )
                })
        })
        .transpose()?;
    let body_key = judgment
        .id
        .as_deref()
        .map(|s| {
            Uuid::parse_str(s)
                .map_err(|_| ApiError::bad_request("invalid_idempotency_key", "id must be a UUID"))
        })
        .transpose()?;
    let key = header_key.or(body_key).unwrap_or_else(Uuid::new_v4);
    judgment.id = Some(key.hyphenated().to_string());

    match state.judgments.append(judgment) {
        Ok(()) => {
            let body = serde_json::json!({ "id": key.hyphenated().to_string() });
            Ok((StatusCode::CREATED, json_body(body.to_string())).into_response())
        }
        Err(StoreError::Duplicate(k)) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "duplicate_idempotency_key",
            format!("judgment {k} was already recorded"),
        )),
        Err(e) => Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "store_failure",
            e.to_string(),
        )),
    }
}

async fn get_report(State(state): State<Arc<AppState>>) -> Response {
    json_ok(EvaluationReport::from_judgments(&state.judgments.snapshot()).to_json())
}

async fn put_config(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let config = WeightingConfig::from_json(&body)
        .map_err(|e| ApiError::bad_request("invalid_config", e.to_string()))?;
    let echo = serde_json::to_string(&config).expect("config serializes");
    state.set_config(config);
    Ok(json_ok(echo))
}
