//! The `preprocess`, `render` and `bench` commands. Each returns a report
//! that the binary prints as JSON.

use std::path::{Path, PathBuf};
use std::time::Instant;

use linelod_core::artifact::{ingest_geojson, preprocess, Ingested};
use linelod_core::bench::{parse_cameras, run_bench, BenchMode, BenchReport};
use linelod_core::index::IndexConfig;
use linelod_core::raster::{descent_pass, render_frame, Background, BackgroundRaster, FrameStats, RenderMode, StyleConfig};
use linelod_core::{Dataset, PreprocessConfig, PreprocessStats, Rect, WorldPoint};
use serde::Serialize;

use crate::params::RenderParams;
use crate::AppError;

pub fn read_input(path: &Path) -> Result<Vec<u8>, AppError> {
    std::fs::read(path).map_err(|e| AppError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, AppError> {
    String::from_utf8(read_input(path)?).map_err(|_| AppError::Input(format!("{} is not UTF-8 text", path.display())))
}

pub fn load_artifact(path: &Path) -> Result<Dataset, AppError> {
    Ok(Dataset::from_bytes(&read_input(path)?)?)
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub input: PathBuf,
    pub styles: Option<PathBuf>,
    pub output: PathBuf,
    pub grid: Option<(u32, u32)>,
    pub max_depth: Option<u32>,
    pub leaf_capacity: Option<u32>,
    pub dependencies: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PreprocessReport {
    #[serde(flatten)]
    pub stats: PreprocessStats,
    pub dropped_degenerate: usize,
    pub skipped_geometries: usize,
    pub collapsed_duplicates: usize,
    pub elapsed_ms: f64,
}

pub fn run_preprocess(opts: &PreprocessOptions) -> Result<PreprocessReport, AppError> {
    let t = Instant::now();
    let Ingested { polylines, dropped_degenerate, skipped_geometries, collapsed_duplicates } = ingest_geojson(&read_text(&opts.input)?)?;
    let styles = match &opts.styles {
        Some(p) => StyleConfig::from_json(&read_text(p)?)?,
        None => StyleConfig::default(),
    };
    let mut index = IndexConfig::default();
    if let Some(g) = opts.grid {
        index.grid = Some(g);
    }
    if let Some(d) = opts.max_depth {
        index.max_depth = d;
    }
    if let Some(c) = opts.leaf_capacity {
        index.leaf_capacity = c.max(1);
    }
    let (ds, stats) = preprocess(&polylines, &styles, &PreprocessConfig { index, dependencies: opts.dependencies })?;
    ds.save(&opts.output)?;
    Ok(PreprocessReport { stats, dropped_degenerate, skipped_geometries, collapsed_duplicates, elapsed_ms: t.elapsed().as_secs_f64() * 1e3 })
}

/// A georeferenced PNG drawn under the lines.
#[derive(Debug, Clone)]
pub struct BackgroundImage {
    pub path: PathBuf,
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderReport {
    /// Index descent alone over all pixels.
    pub descent_ms: f64,
    /// Frame time minus descent time.
    pub shade_ms: f64,
    pub frame_ms: f64,
    pub width: u32,
    pub height: u32,
    #[serde(flatten)]
    pub stats: FrameStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts_csv: Option<PathBuf>,
}

/// Sidecar path for per-pixel test counts: `out.png` gives `out.counts.csv`.
pub fn counts_path(out: &Path) -> PathBuf {
    out.with_extension("counts.csv")
}

pub fn run_render(ds: &Dataset, params: &RenderParams, background: Option<&BackgroundImage>, out: &Path) -> Result<RenderReport, AppError> {
    let mut spec = params.frame_spec();
    if let Some(bg) = background {
        let [x0, y0, x1, y1] = bg.bbox;
        let bbox = Rect::new(WorldPoint::new(x0, y0), WorldPoint::new(x1, y1));
        spec.background = Background::Raster(BackgroundRaster::from_png(&read_input(&bg.path)?, bbox, [255, 255, 255, 255])?);
    }
    let t = Instant::now();
    descent_pass(&spec, ds)?;
    let descent_ms = t.elapsed().as_secs_f64() * 1e3;
    let t = Instant::now();
    let frame = render_frame(&spec, ds)?;
    let frame_ms = t.elapsed().as_secs_f64() * 1e3;
    let file = std::fs::File::create(out).map_err(|e| AppError::Input(format!("cannot write {}: {e}", out.display())))?;
    frame.write_png(std::io::BufWriter::new(file))?;
    let counts_csv = if spec.mode == RenderMode::Heatmap {
        let p = counts_path(out);
        std::fs::write(&p, frame.counts_csv()).map_err(|e| AppError::Input(format!("cannot write {}: {e}", p.display())))?;
        Some(p)
    } else {
        None
    };
    Ok(RenderReport {
        descent_ms,
        shade_ms: (frame_ms - descent_ms).max(0.0),
        frame_ms,
        width: frame.width,
        height: frame.height,
        stats: frame.stats,
        counts_csv,
    })
}

pub fn run_bench_file(ds: &Dataset, cameras: &Path, modes: &[BenchMode], tolerance_px: f64, repetitions: usize, threads: Option<usize>) -> Result<BenchReport, AppError> {
    let cams = parse_cameras(&read_text(cameras)?)?;
    if cams.is_empty() {
        return Err(AppError::Usage(format!("{} lists no cameras", cameras.display())));
    }
    if let Some(c) = cams.iter().find(|c| !(c.eye[2] > 0.0)) {
        return Err(AppError::Usage(format!("camera height {} must be positive", c.eye[2])));
    }
    Ok(run_bench(ds, &cams, modes, tolerance_px, repetitions, threads)?)
}
