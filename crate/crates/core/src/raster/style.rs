//! Line styles: the JSON style table and mipmapped half-profiles.
//!
//! A style's color varies across the line with `u = |distance| / halfWidth`.
//! The half-profile is sampled at 256 texels and averaged pairwise into a
//! nine-level pyramid; the level is picked from how many texels fall into one
//! pixel, so thin far-away lines get the band-averaged color instead of
//! aliasing.

use serde::{Deserialize, Serialize};

use crate::geometry::{LineType, ThicknessMultipliers};
use crate::Error;

pub const MIP_LEVELS: usize = 9;
pub const BASE_TEXELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorStop {
    pub u: f64,
    pub color: [u8; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LineStyle {
    pub id: u8,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub priority: i32,
    pub base_width: f64,
    #[serde(default)]
    pub thickness: ThicknessMultipliers,
    pub stops: Vec<ColorStop>,
}

impl LineStyle {
    pub fn line_type(&self) -> LineType {
        LineType {
            id: self.id,
            priority: self.priority,
            base_width: self.base_width,
            style_profile_id: self.id as u32,
            thickness: self.thickness,
        }
    }

    /// One color across the whole width.
    pub fn uniform(id: u8, priority: i32, base_width: f64, color: [u8; 4]) -> Self {
        Self {
            id,
            name: format!("type{id}"),
            priority,
            base_width,
            thickness: ThicknessMultipliers::default(),
            stops: vec![ColorStop { u: 0.0, color }, ColorStop { u: 1.0, color }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StyleConfig {
    pub line_types: Vec<LineStyle>,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self { line_types: vec![LineStyle::uniform(0, 0, 1.0, [0, 0, 0, 255])] }
    }
}

impl StyleConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: StyleConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("style config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("style config serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        let mut seen = [false; 256];
        for s in &self.line_types {
            let bad = |m: String| Err(Error::Parse(format!("line type {}: {m}", s.id)));
            if std::mem::replace(&mut seen[s.id as usize], true) {
                return bad("duplicate id".into());
            }
            if !(s.base_width > 0.0 && s.base_width.is_finite()) {
                return bad(format!("baseWidth {} must be positive", s.base_width));
            }
            let t = &s.thickness;
            if !(t.m_near > 0.0 && t.m_far > 0.0 && t.m_near.is_finite() && t.m_far.is_finite()) {
                return bad("thickness multipliers must be positive".into());
            }
            if !(t.d_near.is_finite() && t.d_far.is_finite()) {
                return bad("thickness distances must be finite".into());
            }
            if s.stops.is_empty() {
                return bad("no color stops".into());
            }
            if s.stops.first().unwrap().u != 0.0 || s.stops.last().unwrap().u != 1.0 {
                return bad("stops must start at u=0 and end at u=1".into());
            }
            if s.stops.windows(2).any(|w| !(w[0].u <= w[1].u)) {
                return bad("stops must be sorted by u".into());
            }
        }
        Ok(())
    }

    pub fn get(&self, id: u8) -> Option<&LineStyle> {
        self.line_types.iter().find(|s| s.id == id)
    }
}

/// A half-profile pyramid with colors as linear `[0, 1]` RGBA.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleProfile {
    levels: Vec<Vec<[f32; 4]>>,
}

fn stop_color(c: [u8; 4]) -> [f32; 4] {
    c.map(|v| v as f32 / 255.0)
}

fn lerp4(a: [f32; 4], b: [f32; 4], t: f32) -> [f32; 4] {
    [0, 1, 2, 3].map(|i| a[i] + (b[i] - a[i]) * t)
}

impl StyleProfile {
    pub fn from_stops(stops: &[ColorStop]) -> Self {
        let eval = |u: f64| -> [f32; 4] {
            let j = stops.partition_point(|s| s.u <= u);
            if j == 0 {
                return stop_color(stops[0].color);
            }
            if j == stops.len() {
                return stop_color(stops[j - 1].color);
            }
            let (a, b) = (&stops[j - 1], &stops[j]);
            let t = if b.u > a.u { ((u - a.u) / (b.u - a.u)) as f32 } else { 0.0 };
            lerp4(stop_color(a.color), stop_color(b.color), t)
        };
        let base: Vec<[f32; 4]> = (0..BASE_TEXELS).map(|i| eval((i as f64 + 0.5) / BASE_TEXELS as f64)).collect();
        let mut levels = vec![base];
        for _ in 1..MIP_LEVELS {
            let prev = levels.last().unwrap();
            let next = prev.chunks(2).map(|p| lerp4(p[0], p[1], 0.5)).collect();
            levels.push(next);
        }
        Self { levels }
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &[[f32; 4]] {
        &self.levels[l]
    }

    /// Linear sample of level `l` at `u ∈ [0, 1]`.
    pub fn sample_level(&self, l: usize, u: f64) -> [f32; 4] {
        let texels = &self.levels[l];
        let n = texels.len();
        let x = (u.clamp(0.0, 1.0) * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
        let i = x.floor() as usize;
        if i + 1 >= n {
            return texels[n - 1];
        }
        lerp4(texels[i], texels[i + 1], (x - i as f64) as f32)
    }

    pub fn sample(&self, u: f64, texels_per_pixel: f64) -> [f32; 4] {
        self.sample_level(mip_level(texels_per_pixel), u)
    }
}

/// `clamp(floor(log2(max(tpp, 1))), 0, 8)`.
pub fn mip_level(texels_per_pixel: f64) -> usize {
    let t = if texels_per_pixel.is_nan() { 1.0 } else { texels_per_pixel.max(1.0) };
    (t.log2().floor() as usize).min(MIP_LEVELS - 1)
}

/// A line type with its prepared profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedStyle {
    pub line_type: LineType,
    pub profile: StyleProfile,
}

impl ResolvedStyle {
    pub fn new(style: &LineStyle) -> Self {
        Self { line_type: style.line_type(), profile: StyleProfile::from_stops(&style.stops) }
    }
}

/// Lookup table from line type id to its resolved style.
pub fn resolve_styles(cfg: &StyleConfig) -> Vec<Option<ResolvedStyle>> {
    let mut table = vec![None; 256];
    for s in &cfg.line_types {
        table[s.id as usize] = Some(ResolvedStyle::new(s));
    }
    table
}
