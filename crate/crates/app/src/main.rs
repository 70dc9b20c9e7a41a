//! `linelod`: preprocess GeoJSON into an artifact, render frames, run the
//! four-mode benchmark or serve the query API.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use linelod_app::commands::{load_artifact, run_bench_file, run_preprocess, run_render, BackgroundImage, PreprocessOptions};
use linelod_app::params::{self, RenderParams};
use linelod_app::{service, AppError};
use linelod_core::bench::BenchMode;

#[derive(Parser)]
#[command(name = "linelod", version, about = "View-dependent polyline level of detail")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an artifact from GeoJSON LineStrings; prints stats as JSON.
    Preprocess {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Style table JSON; defaults to one black line type 0.
        #[arg(long)]
        styles: Option<PathBuf>,
        /// Grid cells as WxH; sized from the segment count when absent.
        #[arg(long, value_parser = parse_size)]
        grid: Option<(u32, u32)>,
        #[arg(long)]
        max_depth: Option<u32>,
        #[arg(long)]
        leaf_capacity: Option<u32>,
        /// Skip intersection-avoidance dependencies.
        #[arg(long)]
        no_dependencies: bool,
    },
    /// Render one frame to PNG; prints timings as JSON.
    Render {
        artifact: PathBuf,
        /// Eye and orientation: x,y,height,yaw,pitch (radians).
        #[arg(long, allow_hyphen_values = true)]
        camera: String,
        /// Vertical field of view in radians.
        #[arg(long, default_value_t = params::DEFAULT_FOV)]
        fov: f64,
        #[arg(long, default_value = "800x600", value_parser = parse_size)]
        size: (u32, u32),
        /// Screen-space tolerance in pixels.
        #[arg(long, default_value_t = 1.0)]
        tolerance: f64,
        /// color or heatmap; heatmap also writes a per-pixel count CSV.
        #[arg(long, default_value = "color")]
        mode: String,
        /// AVD, AVS, ANVS or ONVS.
        #[arg(long)]
        bench_mode: Option<String>,
        /// Lens as cx,cy,radius,factor.
        #[arg(long, allow_hyphen_values = true)]
        lens: Option<String>,
        /// Georeferenced background PNG.
        #[arg(long, requires = "background_bbox")]
        background: Option<PathBuf>,
        /// Background extent as minX,minY,maxX,maxY.
        #[arg(long, allow_hyphen_values = true)]
        background_bbox: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time all cameras in each mode; JSON on stdout, table on stderr.
    Bench {
        artifact: PathBuf,
        /// JSON array of cameras.
        cameras: PathBuf,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 1.0)]
        tolerance: f64,
        /// Modes to run, comma separated.
        #[arg(long, default_value = "AVD,AVS,ANVS,ONVS")]
        modes: String,
        /// Worker threads; the global pool when absent.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Serve /meta, /query and /render over HTTP.
    Serve {
        artifact: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Largest accepted viewport in pixels.
        #[arg(long, default_value_t = service::DEFAULT_MAX_PIXELS)]
        max_pixels: u64,
    },
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    params::parse_size(s).map_err(|e| e.to_string())
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), AppError> {
    println!("{}", serde_json::to_string_pretty(v).map_err(|e| AppError::Usage(e.to_string()))?);
    Ok(())
}

fn run(cmd: Command) -> Result<(), AppError> {
    match cmd {
        Command::Preprocess { input, output, styles, grid, max_depth, leaf_capacity, no_dependencies } => {
            let opts = PreprocessOptions { input, styles, output, grid, max_depth, leaf_capacity, dependencies: !no_dependencies };
            print_json(&run_preprocess(&opts)?)
        }
        Command::Render { artifact, camera, fov, size, tolerance, mode, bench_mode, lens, background, background_bbox, output } => {
            let p = RenderParams {
                camera: params::camera(&camera, fov, size)?,
                tolerance_px: tolerance,
                mode: params::parse_mode(&mode)?,
                bench_mode: bench_mode.as_deref().map(params::parse_bench_mode).transpose()?,
                lens: lens.as_deref().map(params::parse_lens).transpose()?,
            };
            p.validate()?;
            let bg = match (background, background_bbox) {
                (Some(path), Some(b)) => Some(BackgroundImage { path, bbox: params::parse_floats::<4>(&b, "background bbox")? }),
                _ => None,
            };
            let ds = load_artifact(&artifact)?;
            print_json(&run_render(&ds, &p, bg.as_ref(), &output)?)
        }
        Command::Bench { artifact, cameras, repetitions, tolerance, modes, threads } => {
            let modes: Vec<BenchMode> = modes.split(',').map(|m| params::parse_bench_mode(m.trim())).collect::<Result<_, _>>()?;
            let ds = load_artifact(&artifact)?;
            let report = run_bench_file(&ds, &cameras, &modes, tolerance, repetitions, threads)?;
            eprint!("{}", report.human_table());
            print_json(&report)
        }
        Command::Serve { .. } => unreachable!("handled in main"),
    }
}

async fn serve(artifact: PathBuf, addr: String, max_pixels: u64) -> anyhow::Result<()> {
    let ds = load_artifact(&artifact)?;
    eprintln!("loaded {} points, {} segments from {}", ds.points.len(), ds.segments.len(), artifact.display());
    let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, service::router(Arc::new(ds), max_pixels))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { artifact, addr, max_pixels } = cli.command {
        let rt = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        };
        return match rt.block_on(serve(artifact, addr, max_pixels)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                let code = e.downcast_ref::<AppError>().map_or(1, AppError::exit_code);
                ExitCode::from(code as u8)
            }
        };
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
