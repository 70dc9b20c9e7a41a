//! Experiment modes and per-frame timing.
//!
//! | mode | segments | visibility check | width   |
//! |------|----------|------------------|---------|
//! | AVD  | all      | yes              | dynamic |
//! | AVS  | all      | yes              | static  |
//! | ANVS | all      | no               | static  |
//! | ONVS | original | no               | static  |

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::artifact::Dataset;
use crate::geometry::CameraPose;
use crate::raster::{render_frame, FrameSpec, RenderFlags};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BenchMode {
    Avd,
    Avs,
    Anvs,
    Onvs,
}

impl BenchMode {
    pub const ALL: [BenchMode; 4] = [BenchMode::Avd, BenchMode::Avs, BenchMode::Anvs, BenchMode::Onvs];

    pub fn flags(self) -> RenderFlags {
        let (use_all_segments, visibility_check, dynamic_thickness) = match self {
            BenchMode::Avd => (true, true, true),
            BenchMode::Avs => (true, true, false),
            BenchMode::Anvs => (true, false, false),
            BenchMode::Onvs => (false, false, false),
        };
        RenderFlags { dynamic_thickness, visibility_check, use_all_segments }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Avd => "AVD",
            BenchMode::Avs => "AVS",
            BenchMode::Anvs => "ANVS",
            BenchMode::Onvs => "ONVS",
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        BenchMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown bench mode {s:?}, expected AVD, AVS, ANVS or ONVS")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchFrame {
    pub camera: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    /// Distance tests of one render of this camera.
    pub distance_tests: u64,
    pub candidates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModeReport {
    pub mode: BenchMode,
    pub frames: Vec<BenchFrame>,
    /// Over all cameras and repetitions.
    pub mean_ms: f64,
    pub stddev_ms: f64,
    /// Summed over cameras, one render each.
    pub distance_tests: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub repetitions: usize,
    pub tolerance_px: f64,
    pub cameras: usize,
    pub modes: Vec<ModeReport>,
}

impl BenchReport {
    pub fn mode(&self, m: BenchMode) -> Option<&ModeReport> {
        self.modes.iter().find(|r| r.mode == m)
    }

    pub fn human_table(&self) -> String {
        let mut s = format!("{:<6} {:>12} {:>12} {:>16}\n", "mode", "mean ms", "stddev ms", "distance tests");
        for m in &self.modes {
            s.push_str(&format!("{:<6} {:>12.3} {:>12.3} {:>16}\n", m.mode.name(), m.mean_ms, m.stddev_ms, m.distance_tests));
        }
        s
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Renders every camera `repetitions` times in each of `modes`.
pub fn run_bench(ds: &Dataset, cameras: &[CameraPose], modes: &[BenchMode], tolerance_px: f64, repetitions: usize, threads: Option<usize>) -> Result<BenchReport, Error> {
    let reps = repetitions.max(1);
    let mut out = Vec::with_capacity(modes.len());
    for &mode in modes {
        let mut frames = Vec::with_capacity(cameras.len());
        let mut all = Vec::with_capacity(cameras.len() * reps);
        for (ci, cam) in cameras.iter().enumerate() {
            let mut spec = FrameSpec::new(*cam);
            spec.tolerance_px = tolerance_px;
            spec.flags = mode.flags();
            spec.threads = threads;
            let mut times = Vec::with_capacity(reps);
            let mut stats = None;
            for _ in 0..reps {
                let t = Instant::now();
                let f = render_frame(&spec, ds)?;
                times.push(t.elapsed().as_secs_f64() * 1e3);
                stats = Some(f.stats);
            }
            let st = stats.expect("at least one repetition");
            let (mean_ms, stddev_ms) = mean_std(&times);
            all.extend_from_slice(&times);
            frames.push(BenchFrame { camera: ci, mean_ms, stddev_ms, distance_tests: st.distance_tests, candidates: st.candidates });
        }
        let (mean_ms, stddev_ms) = mean_std(&all);
        let distance_tests = frames.iter().map(|f| f.distance_tests).sum();
        out.push(ModeReport { mode, frames, mean_ms, stddev_ms, distance_tests });
    }
    Ok(BenchReport { repetitions: reps, tolerance_px, cameras: cameras.len(), modes: out })
}

/// Parses a JSON array of cameras.
pub fn parse_cameras(text: &str) -> Result<Vec<CameraPose>, Error> {
    let cams: Vec<CameraPose> = serde_json::from_str(text).map_err(|e| Error::Parse(format!("camera list: {e}")))?;
    for c in &cams {
        c.validate()?;
    }
    Ok(cams)
}
