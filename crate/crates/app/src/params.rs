//! Textual parameters: `x,y,h,yaw,pitch` cameras, `WxH` sizes,
//! `cx,cy,r,factor` lenses and the render switches.

use std::collections::HashMap;
use std::str::FromStr;

use linelod_core::bench::BenchMode;
use linelod_core::raster::{FrameSpec, RenderMode};
use linelod_core::{CameraPose, Lens, WorldPoint};

use crate::AppError;

fn usage(m: String) -> AppError {
    AppError::Usage(m)
}

/// Exactly `N` comma-separated finite numbers.
pub fn parse_floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N], AppError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(usage(format!("{what}: expected {N} comma-separated numbers, got {s:?}")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| usage(format!("{what}: {p:?} is not a finite number")))?;
    }
    Ok(out)
}

/// `WxH` with both sides positive.
pub fn parse_size(s: &str) -> Result<(u32, u32), AppError> {
    let bad = || usage(format!("size: expected WxH, got {s:?}"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: u32 = w.trim().parse().map_err(|_| bad())?;
    let h: u32 = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

pub fn parse_lens(s: &str) -> Result<Lens, AppError> {
    let [cx, cy, r, f] = parse_floats::<4>(s, "lens")?;
    Lens::new(WorldPoint::new(cx, cy), r, f).map_err(|e| AppError::Usage(e.to_string()))
}

pub fn parse_mode(s: &str) -> Result<RenderMode, AppError> {
    match s.to_ascii_lowercase().as_str() {
        "color" => Ok(RenderMode::Color),
        "heatmap" => Ok(RenderMode::Heatmap),
        _ => Err(usage(format!("mode: expected color or heatmap, got {s:?}"))),
    }
}

pub fn parse_bench_mode(s: &str) -> Result<BenchMode, AppError> {
    BenchMode::from_str(s).map_err(|e| usage(e.to_string()))
}

/// A camera from `x,y,h,yaw,pitch`, a vertical field of view and a size.
pub fn camera(pose: &str, fov_y: f64, size: (u32, u32)) -> Result<CameraPose, AppError> {
    let [x, y, h, yaw, pitch] = parse_floats::<5>(pose, "camera")?;
    let cam = CameraPose { eye: [x, y, h], yaw, pitch, fov_y, viewport_w: size.0, viewport_h: size.1 };
    cam.validate().map_err(|e| usage(e.to_string()))?;
    if !(h > 0.0) {
        return Err(usage(format!("camera: height {h} must be positive")));
    }
    Ok(cam)
}

pub const DEFAULT_FOV: f64 = 0.8;
pub const DEFAULT_SIZE: (u32, u32) = (800, 600);

/// One render request, from CLI flags or a query string.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderParams {
    pub camera: CameraPose,
    pub tolerance_px: f64,
    pub mode: RenderMode,
    pub bench_mode: Option<BenchMode>,
    pub lens: Option<Lens>,
}

impl RenderParams {
    /// Reads `camera`, `fov`, `size`, `tolerance`, `mode`, `benchMode` and
    /// `lens`; only `camera` is required.
    pub fn from_query(q: &HashMap<String, String>) -> Result<Self, AppError> {
        let pose = q.get("camera").ok_or_else(|| usage("missing camera=x,y,h,yaw,pitch".into()))?;
        let fov = match q.get("fov") {
            Some(f) => parse_floats::<1>(f, "fov")?[0],
            None => DEFAULT_FOV,
        };
        let size = q.get("size").map(|s| parse_size(s)).transpose()?.unwrap_or(DEFAULT_SIZE);
        let tolerance_px = match q.get("tolerance") {
            Some(t) => parse_floats::<1>(t, "tolerance")?[0],
            None => 1.0,
        };
        let p = RenderParams {
            camera: camera(pose, fov, size)?,
            tolerance_px,
            mode: q.get("mode").map(|m| parse_mode(m)).transpose()?.unwrap_or(RenderMode::Color),
            bench_mode: q.get("benchMode").map(|m| parse_bench_mode(m)).transpose()?,
            lens: q.get("lens").map(|l| parse_lens(l)).transpose()?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if !(self.tolerance_px >= 0.0 && self.tolerance_px.is_finite()) {
            return Err(usage(format!("tolerance {} must be finite and non-negative", self.tolerance_px)));
        }
        Ok(())
    }

    pub fn pixels(&self) -> u64 {
        self.camera.viewport_w as u64 * self.camera.viewport_h as u64
    }

    pub fn frame_spec(&self) -> FrameSpec {
        let mut spec = FrameSpec::new(self.camera);
        spec.tolerance_px = self.tolerance_px;
        spec.mode = self.mode;
        spec.lens = self.lens;
        if let Some(m) = self.bench_mode {
            spec.flags = m.flags();
        }
        spec
    }
}
