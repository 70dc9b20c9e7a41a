//! Deferred per-pixel line rendering.
//!
//! Every pixel is mapped back onto the ground plane and the segment index is
//! searched along the single quadtree path containing that ground point.
//! Each candidate that passes the visibility test gets a distance test; the
//! winning line (highest priority, then nearest, then lowest id) is shaded
//! from its style profile with coverage-based antialiasing. Searching does not
//! stop at the first hit, so at joints the nearer line wins.

mod camera;
mod style;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use camera::{pixel_to_world, view_footprint, CameraBasis};
pub use style::{mip_level, resolve_styles, ColorStop, LineStyle, ResolvedStyle, StyleConfig, StyleProfile, BASE_TEXELS, MIP_LEVELS};

use crate::artifact::Dataset;
use crate::geometry::{distance_point_to_segment, eye_distance, CameraPose, Rect, WorldPoint};
use crate::index::SegmentIndex;
use crate::visibility::{Lens, ThresholdPolicy, ViewParams};
use crate::{par, Error};

/// Feature switches matching the four experiment modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderFlags {
    pub dynamic_thickness: bool,
    pub visibility_check: bool,
    /// All-possible segments when set, original segments otherwise.
    pub use_all_segments: bool,
}

impl Default for RenderFlags {
    fn default() -> Self {
        Self { dynamic_thickness: false, visibility_check: true, use_all_segments: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Color,
    /// Colors encode the number of distance tests per pixel.
    Heatmap,
}

/// A georeferenced RGBA8 image sampled nearest-neighbor under the lines.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundRaster {
    pub bbox: Rect,
    pub width: u32,
    pub height: u32,
    /// Row-major, first row at `bbox.max.y`.
    pub rgba: Vec<u8>,
    /// Used outside `bbox` and above the horizon.
    pub outside: [u8; 4],
}

impl BackgroundRaster {
    pub fn from_png(bytes: &[u8], bbox: Rect, outside: [u8; 4]) -> Result<Self, Error> {
        let (width, height, rgba) = decode_png_rgba(bytes)?;
        Ok(Self { bbox, width, height, rgba, outside })
    }

    pub fn sample(&self, q: Option<&WorldPoint>) -> [u8; 4] {
        let q = match q {
            Some(q) if self.bbox.contains(q) && self.width > 0 && self.height > 0 => q,
            _ => return self.outside,
        };
        let fx = (q.x - self.bbox.min.x) / self.bbox.width();
        let fy = (self.bbox.max.y - q.y) / self.bbox.height();
        let ix = ((fx * self.width as f64) as u32).min(self.width - 1);
        let iy = ((fy * self.height as f64) as u32).min(self.height - 1);
        let o = 4 * (iy * self.width + ix) as usize;
        [self.rgba[o], self.rgba[o + 1], self.rgba[o + 2], self.rgba[o + 3]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Background {
    Color([u8; 4]),
    Raster(BackgroundRaster),
}

impl Background {
    fn sample(&self, q: Option<&WorldPoint>) -> [u8; 4] {
        match self {
            Background::Color(c) => *c,
            Background::Raster(r) => r.sample(q),
        }
    }
}

/// Everything needed to render one frame. Image size is the camera viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub camera: CameraPose,
    pub tolerance_px: f64,
    /// Replaces the screen-space policy derived from `tolerance_px`.
    pub policy: Option<ThresholdPolicy>,
    pub lens: Option<Lens>,
    pub flags: RenderFlags,
    pub mode: RenderMode,
    pub background: Background,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl FrameSpec {
    pub fn new(camera: CameraPose) -> Self {
        Self {
            camera,
            tolerance_px: 1.0,
            policy: None,
            lens: None,
            flags: RenderFlags::default(),
            mode: RenderMode::Color,
            background: Background::Color([255, 255, 255, 255]),
            threads: None,
        }
    }

    pub fn view(&self) -> ViewParams {
        match self.policy {
            Some(p) => ViewParams::with_policy(self.camera, p, self.lens),
            None => ViewParams::new(self.camera, self.tolerance_px, self.lens),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.camera.viewport_w == 0 || self.camera.viewport_h == 0 {
            return Err(Error::InvalidFrame("zero-area viewport".into()));
        }
        self.camera.validate()?;
        if !(self.camera.eye[2] > 0.0) {
            return Err(Error::InvalidCamera(format!("eye height {} must be above the ground", self.camera.eye[2])));
        }
        if !(self.tolerance_px >= 0.0 && self.tolerance_px.is_finite()) {
            return Err(Error::InvalidFrame(format!("tolerance {} must be finite and non-negative", self.tolerance_px)));
        }
        Ok(())
    }
}

/// Fraction of a pixel of size `footprint` covered by a line of half width
/// `half_width` whose axis is `dist` away: the overlap of the pixel's extent
/// across the line with the line's extent. Equals
/// `clamp(0.5 + (hw - dist) / fp, 0, 1)` whenever the line is at least a
/// pixel wide, and fades thinner lines by their width.
pub fn coverage(dist: f64, half_width: f64, footprint: f64) -> f64 {
    if !(footprint > 0.0) {
        return if dist <= half_width { 1.0 } else { 0.0 };
    }
    let lo = (dist - 0.5 * footprint).max(-half_width);
    let hi = (dist + 0.5 * footprint).min(half_width);
    ((hi - lo) / footprint).clamp(0.0, 1.0)
}

/// Heatmap color for `count` distance tests: white for zero, then a
/// log2-scaled ramp from blue (one test) to red (256 or more).
pub fn heat_color(count: u32) -> [u8; 4] {
    if count == 0 {
        return [255, 255, 255, 255];
    }
    let t = ((count as f64).log2() / 8.0).clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    [r, 0, 255 - r, 255]
}

/// Read-only state shared by all pixels of a frame.
pub struct ShadeContext<'a> {
    pub data: &'a Dataset,
    pub index: &'a SegmentIndex,
    /// Per-point inclusion; empty when the visibility check is off.
    pub included: Vec<bool>,
    pub flags: RenderFlags,
    pub camera: CameraPose,
}

impl<'a> ShadeContext<'a> {
    pub fn new(frame: &FrameSpec, data: &'a Dataset) -> Self {
        let included = if frame.flags.visibility_check { data.inclusion_mask(&frame.view()) } else { Vec::new() };
        Self {
            data,
            index: data.indexes.get(frame.flags.use_all_segments, frame.flags.dynamic_thickness),
            included,
            flags: frame.flags,
            camera: frame.camera,
        }
    }
}

/// Shading result of one fragment before blending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment {
    /// Straight-alpha color of the winning line, alpha already scaled by
    /// coverage; `None` when no line covers the fragment.
    pub color: Option<[f32; 4]>,
    pub segment: Option<u32>,
    pub distance_tests: u32,
    pub candidates: u32,
}

/// Picks and shades the winning line among `candidates`. The choice depends
/// only on the candidate set, not on its order.
pub fn shade_candidates(q: &WorldPoint, footprint: f64, ctx: &ShadeContext<'_>, candidates: impl Iterator<Item = u32>) -> Fragment {
    let d_eye = eye_distance(&ctx.camera, q);
    let mut frag = Fragment { color: None, segment: None, distance_tests: 0, candidates: 0 };
    // (priority, dist, id, half width, coverage)
    let mut best: Option<(i32, f64, u32, f64, f64)> = None;
    for id in candidates {
        frag.candidates += 1;
        let seg = &ctx.data.segments[id as usize];
        if ctx.flags.visibility_check && !seg.is_visible_with(|p| ctx.included[p as usize]) {
            continue;
        }
        let Some(style) = ctx.data.style(seg.line_type) else { continue };
        let a = &ctx.data.points[seg.a as usize].position;
        let b = &ctx.data.points[seg.b as usize].position;
        let dist = distance_point_to_segment(q, a, b);
        frag.distance_tests += 1;
        let hw = 0.5 * style.line_type.effective_width(d_eye, ctx.flags.dynamic_thickness);
        // Only pixels centered on the line are shaded; the index registers
        // segments by half width, so nothing farther could be found anyway.
        if dist > hw {
            continue;
        }
        let cov = coverage(dist, hw, footprint);
        if cov <= 0.0 {
            continue;
        }
        let pr = style.line_type.priority;
        let better = match best {
            None => true,
            Some((bp, bd, bid, _, _)) => pr > bp || (pr == bp && (dist < bd || (dist == bd && id < bid))),
        };
        if better {
            best = Some((pr, dist, id, hw, cov));
        }
    }
    if let Some((_, dist, id, hw, cov)) = best {
        let style = ctx.data.style(ctx.data.segments[id as usize].line_type).expect("winner has a style");
        let u = (dist / hw).min(1.0);
        let tpp = BASE_TEXELS as f64 * footprint / hw;
        let mut c = style.profile.sample(u, tpp);
        c[3] *= cov as f32;
        frag.color = Some(c);
        frag.segment = Some(id);
    }
    frag
}

/// Shades the fragment at ground point `q` using the index path through it.
pub fn shade_fragment(q: &WorldPoint, footprint: f64, ctx: &ShadeContext<'_>) -> Fragment {
    shade_candidates(q, footprint, ctx, ctx.index.descend(q))
}

fn blend(fg: Option<[f32; 4]>, bg: [u8; 4]) -> [u8; 4] {
    let Some(fg) = fg else { return bg };
    let a = fg[3];
    let bgf = bg.map(|v| v as f32 / 255.0);
    let out_a = a + bgf[3] * (1.0 - a);
    let mut out = [0u8; 4];
    for i in 0..3 {
        out[i] = ((fg[i] * a + bgf[i] * (1.0 - a)) * 255.0).round().clamp(0.0, 255.0) as u8;
    }
    out[3] = (out_a * 255.0).round().clamp(0.0, 255.0) as u8;
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameStats {
    pub distance_tests: u64,
    pub candidates: u64,
    pub ground_pixels: u64,
    pub covered_pixels: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    /// RGBA8, row-major from the top-left pixel.
    pub rgba: Vec<u8>,
    /// Distance tests per pixel.
    pub tests: Vec<u32>,
    pub stats: FrameStats,
}

impl Frame {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let o = 4 * (y * self.width + x) as usize;
        [self.rgba[o], self.rgba[o + 1], self.rgba[o + 2], self.rgba[o + 3]]
    }

    pub fn tests_at(&self, x: u32, y: u32) -> u32 {
        self.tests[(y * self.width + x) as usize]
    }

    pub fn write_png<W: Write>(&self, w: W) -> Result<(), Error> {
        encode_png_rgba(w, self.width, self.height, &self.rgba)
    }

    pub fn png_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_png(&mut out).expect("in-memory png encoding");
        out
    }

    /// Per-pixel test counts, one image row per line.
    pub fn counts_csv(&self) -> String {
        let mut s = String::with_capacity(self.tests.len() * 3);
        for row in self.tests.chunks(self.width as usize) {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

struct RowOut {
    rgba: Vec<u8>,
    tests: Vec<u32>,
    stats: FrameStats,
}

fn render_row(y: u32, frame: &FrameSpec, ctx: &ShadeContext<'_>, basis: &CameraBasis) -> RowOut {
    let w = frame.camera.viewport_w;
    let mut row = RowOut { rgba: Vec::with_capacity(4 * w as usize), tests: Vec::with_capacity(w as usize), stats: FrameStats::default() };
    let py = y as f64 + 0.5;
    for x in 0..w {
        let px = x as f64 + 0.5;
        let q = basis.pixel_to_world(px, py);
        let (color, tests) = match q {
            Some(q) => {
                let fp = basis.footprint(px, py, &q, &frame.camera);
                let f = shade_fragment(&q, fp, ctx);
                row.stats.ground_pixels += 1;
                row.stats.candidates += f.candidates as u64;
                row.stats.distance_tests += f.distance_tests as u64;
                row.stats.covered_pixels += f.color.is_some() as u64;
                let c = match frame.mode {
                    RenderMode::Color => blend(f.color, frame.background.sample(Some(&q))),
                    RenderMode::Heatmap => heat_color(f.distance_tests),
                };
                (c, f.distance_tests)
            }
            None => match frame.mode {
                RenderMode::Color => (frame.background.sample(None), 0),
                RenderMode::Heatmap => (heat_color(0), 0),
            },
        };
        row.rgba.extend_from_slice(&color);
        row.tests.push(tests);
    }
    row
}

/// Renders a frame. The output is identical for any worker count.
pub fn render_frame(frame: &FrameSpec, data: &Dataset) -> Result<Frame, Error> {
    frame.validate()?;
    let (w, h) = (frame.camera.viewport_w, frame.camera.viewport_h);
    let rows = par::with_threads(frame.threads, || {
        let ctx = ShadeContext::new(frame, data);
        let basis = CameraBasis::new(&frame.camera);
        par::map_range(h as usize, |y| render_row(y as u32, frame, &ctx, &basis))
    });
    let mut out = Frame { width: w, height: h, rgba: Vec::with_capacity(4 * (w * h) as usize), tests: Vec::with_capacity((w * h) as usize), stats: FrameStats::default() };
    for r in rows {
        out.rgba.extend_from_slice(&r.rgba);
        out.tests.extend_from_slice(&r.tests);
        out.stats.distance_tests += r.stats.distance_tests;
        out.stats.candidates += r.stats.candidates;
        out.stats.ground_pixels += r.stats.ground_pixels;
        out.stats.covered_pixels += r.stats.covered_pixels;
    }
    Ok(out)
}

/// Index descent alone for every pixel, without visibility or distance
/// tests. Returns the total number of candidates met; used to time the
/// search separately from shading.
pub fn descent_pass(frame: &FrameSpec, data: &Dataset) -> Result<u64, Error> {
    frame.validate()?;
    let index = data.indexes.get(frame.flags.use_all_segments, frame.flags.dynamic_thickness);
    let basis = CameraBasis::new(&frame.camera);
    let w = frame.camera.viewport_w;
    let counts = par::with_threads(frame.threads, || {
        par::map_range(frame.camera.viewport_h as usize, |y| {
            let py = y as f64 + 0.5;
            (0..w)
                .filter_map(|x| basis.pixel_to_world(x as f64 + 0.5, py))
                .map(|q| index.descend(&q).count() as u64)
                .sum::<u64>()
        })
    });
    Ok(counts.iter().sum())
}

pub fn encode_png_rgba<W: Write>(w: W, width: u32, height: u32, rgba: &[u8]) -> Result<(), Error> {
    let mut enc = png::Encoder::new(w, width, height);
    enc.set_color(png::ColorType::Rgba);
    enc.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| Error::Io(std::io::Error::other(e.to_string()));
    let mut writer = enc.write_header().map_err(png_err)?;
    writer.write_image_data(rgba).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(())
}

/// Decodes any 8-bit PNG into RGBA8.
pub fn decode_png_rgba(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), Error> {
    let mut dec = png::Decoder::new(std::io::Cursor::new(bytes));
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let perr = |e: png::DecodingError| Error::Parse(format!("png: {e}"));
    let mut reader = dec.read_info().map_err(perr)?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::Parse("png: image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(perr)?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width, info.height);
    let rgba = match info.color_type {
        png::ColorType::Rgba => buf,
        png::ColorType::Rgb => buf.chunks(3).flat_map(|c| [c[0], c[1], c[2], 255]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks(2).flat_map(|c| [c[0], c[0], c[0], c[1]]).collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g, 255]).collect(),
        png::ColorType::Indexed => return Err(Error::Parse("png: unexpanded palette".into())),
    };
    Ok((w, h, rgba))
}
