//! HTTP facade over the detector.

use std::net::SocketAddr;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use crate::detector::{self, DetectorConfig, FieldError, Mode, ThresholdRow, ThresholdTable};
use crate::error::Error;

pub const MAX_SIMS: usize = 200_000;
pub const MAX_HORIZON: usize = 365;
pub const MAX_ALPHA: f64 = 0.5;
pub const ELAPSED_HEADER: &str = "x-elapsed-ms";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Requests estimated to take longer than this are refused with 413.
    pub max_seconds: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { max_seconds: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdRequest {
    pub rho0: f64,
    pub beta1_null: f64,
    pub n_travelers: u64,
    pub n_sims: usize,
    pub alphas: Vec<f64>,
    pub mode: Mode,
    pub horizon_days: usize,
    pub seed: u64,
}

impl Default for ThresholdRequest {
    fn default() -> Self {
        let d = DetectorConfig::default();
        ThresholdRequest {
            rho0: d.rho0,
            beta1_null: d.beta1_null,
            n_travelers: d.n_travelers,
            n_sims: d.n_sims,
            alphas: d.alphas,
            mode: Mode::KnownStart,
            horizon_days: d.horizon_days,
            seed: d.seed,
        }
    }
}

impl ThresholdRequest {
    pub fn config(&self) -> DetectorConfig {
        DetectorConfig {
            rho0: self.rho0,
            beta1_null: self.beta1_null,
            n_travelers: self.n_travelers,
            horizon_days: self.horizon_days,
            n_sims: self.n_sims,
            alphas: self.alphas.clone(),
            seed: self.seed,
        }
    }

    pub fn problems(&self) -> Vec<FieldError> {
        let mut out = self.config().problems();
        if self.n_sims > MAX_SIMS {
            out.push(FieldError::new("n_sims", format!("must be at most {MAX_SIMS}")));
        }
        if self.horizon_days > MAX_HORIZON {
            out.push(FieldError::new("horizon_days", format!("must be at most {MAX_HORIZON}")));
        }
        if self.alphas.iter().any(|&a| a > MAX_ALPHA) {
            out.push(FieldError::new("alphas", format!("each level must be at most {MAX_ALPHA}")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMeta {
    pub seed: u64,
    pub mode: Mode,
    pub n_sims: usize,
    pub horizon_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResponse {
    pub table: Vec<ThresholdRow>,
    pub meta: ThresholdMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictRequest {
    #[serde(default)]
    pub request: ThresholdRequest,
    pub day: usize,
    pub observed_cumulative: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictResponse {
    pub reject_at: Vec<f64>,
    pub alpha_attained: Option<f64>,
    pub thresholds_used: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.into(),
                fields: Vec::new(),
            },
        }
    }

    fn fields(fields: Vec<FieldError>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                error: "invalid request".into(),
                fields,
            },
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::AllSimulationsEmpty => StatusCode::UNPROCESSABLE_ENTITY,
            ref e if e.is_input() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        let text = e.to_string();
        let field = text
            .split('`')
            .nth(1)
            .filter(|_| text.starts_with("unknown field") || text.starts_with("missing field"))
            .unwrap_or("body");
        ApiError::fields(vec![FieldError::new(field, text.clone())])
    })
}

/// Validates, applies the time budget, and builds the table off the async
/// runtime.
async fn build_table(cfg: &ServiceConfig, req: ThresholdRequest) -> Result<ThresholdTable, ApiError> {
    let problems = req.problems();
    if !problems.is_empty() {
        return Err(ApiError::fields(problems));
    }
    let estimate = detector::estimated_seconds(&req.config());
    if estimate > cfg.max_seconds {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!(
                "estimated run time {estimate:.0} s exceeds the {:.0} s limit; lower n_sims or horizon_days",
                cfg.max_seconds
            ),
        ));
    }
    tokio::task::spawn_blocking(move || detector::threshold_table(&req.config(), req.mode))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

fn with_elapsed(mut resp: Response, start: Instant) -> Response {
    let ms = start.elapsed().as_millis().to_string();
    if let Ok(v) = HeaderValue::from_str(&ms) {
        resp.headers_mut().insert(ELAPSED_HEADER, v);
    }
    resp
}

async fn thresholds(State(cfg): State<ServiceConfig>, body: Bytes) -> Response {
    let start = Instant::now();
    let result = async {
        let req: ThresholdRequest = parse(&body)?;
        let table = build_table(&cfg, req.clone()).await?;
        Ok::<_, ApiError>(ThresholdResponse {
            table: table.rows(),
            meta: ThresholdMeta {
                seed: req.seed,
                mode: req.mode,
                n_sims: req.n_sims,
                horizon_days: req.horizon_days,
            },
        })
    }
    .await;
    with_elapsed(result.map(Json).into_response(), start)
}

async fn verdict(State(cfg): State<ServiceConfig>, body: Bytes) -> Response {
    let start = Instant::now();
    let result = async {
        let req: VerdictRequest = parse(&body)?;
        let mut problems = req.request.problems();
        if req.day == 0 || req.day > req.request.horizon_days {
            problems.push(FieldError::new(
                "day",
                format!("must be in 1..={}", req.request.horizon_days),
            ));
        }
        if !problems.is_empty() {
            return Err(ApiError::fields(problems));
        }
        let table = build_table(&cfg, req.request).await?;
        let v = detector::verdict(&table, req.day, req.observed_cumulative)?;
        Ok(VerdictResponse {
            reject_at: v.reject_at,
            alpha_attained: v.alpha_attained,
            thresholds_used: v.thresholds_used,
        })
    }
    .await;
    with_elapsed(result.map(Json).into_response(), start)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

pub fn router(cfg: ServiceConfig) -> Router {
    let cors = CorsLayer::new().allow_origin(Any).allow_methods(Any).allow_headers(Any).expose_headers(Any);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/thresholds", post(thresholds))
        .route("/api/verdict", post(verdict))
        .layer(cors)
        .with_state(cfg)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, cfg: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(cfg)).await
}
