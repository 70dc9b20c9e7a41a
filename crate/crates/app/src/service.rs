//! Read-only HTTP API over one loaded artifact.
//!
//! - `GET /meta`: bounding box, counts and line styles.
//! - `POST /query`: simplified chains for a camera, tolerance and lens,
//!   clipped to the ground footprint of the view.
//! - `GET /render`: a PNG, with the query parameters of the CLI renderer.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use linelod_core::raster::{render_frame, view_footprint, LineStyle};
use linelod_core::visibility::ViewParams;
use linelod_core::{CameraPose, Dataset, Lens};
use serde::{Deserialize, Serialize};

use crate::params::RenderParams;
use crate::AppError;

/// Default cap on `viewportW × viewportH`.
pub const DEFAULT_MAX_PIXELS: u64 = 4096 * 4096;

#[derive(Clone)]
pub struct AppState {
    pub dataset: Arc<Dataset>,
    pub max_pixels: u64,
}

pub fn router(dataset: Arc<Dataset>, max_pixels: u64) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/query", post(query))
        .route("/render", get(render))
        .with_state(AppState { dataset, max_pixels })
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn bad_request(m: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, message: m.into() }
    }

    fn internal(detail: impl std::fmt::Display) -> Self {
        eprintln!("internal error: {detail}");
        Self { status: StatusCode::INTERNAL_SERVER_ERROR, message: "internal error".into() }
    }
}

impl From<AppError> for ApiError {
    fn from(e: AppError) -> Self {
        match e {
            AppError::Usage(_) | AppError::Core(linelod_core::Error::InvalidCamera(_) | linelod_core::Error::InvalidFrame(_)) => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

fn check_size(camera: &CameraPose, max_pixels: u64) -> Result<(), ApiError> {
    let px = camera.viewport_w as u64 * camera.viewport_h as u64;
    if px > max_pixels {
        return Err(ApiError { status: StatusCode::PAYLOAD_TOO_LARGE, message: format!("viewport of {px} pixels exceeds the limit of {max_pixels}") });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Meta {
    /// `[minX, minY, maxX, maxY]`.
    pub bbox: [f64; 4],
    pub point_count: usize,
    pub segment_count: usize,
    pub original_segment_count: usize,
    pub polyline_count: usize,
    pub line_types: Vec<LineStyle>,
}

async fn meta(State(s): State<AppState>) -> Json<Meta> {
    let ds = &s.dataset;
    let b = ds.bbox;
    let bbox = if b.is_empty() { [0.0; 4] } else { [b.min.x, b.min.y, b.max.x, b.max.y] };
    Json(Meta {
        bbox,
        point_count: ds.points.len(),
        segment_count: ds.segments.len(),
        original_segment_count: ds.original_segment_count(),
        polyline_count: ds.polylines().len(),
        line_types: ds.styles.line_types.clone(),
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct QueryRequest {
    pub camera: CameraPose,
    pub tolerance_px: f64,
    #[serde(default)]
    pub lens: Option<Lens>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPolyline {
    #[serde(rename = "type")]
    pub line_type: u8,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryStats {
    pub included_points: u64,
    pub visible_segments: u64,
    /// Share of the returned polylines' source points left out.
    pub reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub polylines: Vec<QueryPolyline>,
    pub stats: QueryStats,
}

/// Simplified chains for one request; pure in its inputs.
pub fn run_query(ds: &Dataset, req: &QueryRequest) -> QueryResponse {
    let view = ViewParams::new(req.camera, req.tolerance_px, req.lens);
    let clip = view_footprint(&req.camera);
    let chains = ds.simplify_scene(&view, clip.as_ref());
    let mut stats = QueryStats { included_points: 0, visible_segments: 0, reduction_pct: 0.0 };
    let mut source_points = 0u64;
    let polylines = chains
        .into_iter()
        .map(|c| {
            stats.included_points += c.points.len() as u64;
            stats.visible_segments += c.points.len() as u64 - 1;
            source_points += ds.polylines()[c.polyline as usize].point_count as u64;
            QueryPolyline {
                line_type: c.line_type,
                points: c.points.iter().map(|&i| {
                    let p = ds.points[i as usize].position;
                    [p.x, p.y]
                }).collect(),
            }
        })
        .collect();
    if source_points > 0 {
        stats.reduction_pct = 100.0 * (1.0 - stats.included_points as f64 / source_points as f64);
    }
    QueryResponse { polylines, stats }
}

async fn query(State(s): State<AppState>, body: Bytes) -> Result<Json<QueryResponse>, ApiError> {
    let req: QueryRequest = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed query: {e}")))?;
    req.camera.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
    if !(req.camera.eye[2] > 0.0) {
        return Err(ApiError::bad_request("camera height must be positive"));
    }
    if !(req.tolerance_px >= 0.0 && req.tolerance_px.is_finite()) {
        return Err(ApiError::bad_request("tolerancePx must be finite and non-negative"));
    }
    if let Some(l) = req.lens {
        Lens::new(l.center, l.radius, l.factor).map_err(|e| ApiError::bad_request(e.to_string()))?;
    }
    check_size(&req.camera, s.max_pixels)?;
    let ds = s.dataset.clone();
    let out = tokio::task::spawn_blocking(move || run_query(&ds, &req)).await.map_err(ApiError::internal)?;
    Ok(Json(out))
}

async fn render(State(s): State<AppState>, Query(q): Query<HashMap<String, String>>) -> Result<Response, ApiError> {
    let params = RenderParams::from_query(&q)?;
    check_size(&params.camera, s.max_pixels)?;
    let ds = s.dataset.clone();
    let png = tokio::task::spawn_blocking(move || render_frame(&params.frame_spec(), &ds).map(|f| f.png_bytes()))
        .await
        .map_err(ApiError::internal)?
        .map_err(|e| ApiError::from(AppError::Core(e)))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}
