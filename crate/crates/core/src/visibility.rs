//! Runtime visibility: threshold policies, lenses, per-point inclusion and
//! per-segment visibility over a loaded [`Dataset`].
//!
//! A point is included when `e* > f · ε(d − d*)`, where `d` is the eye
//! distance to the point (or to its proxy) and `f` the lens factor. A segment
//! is visible when its generator is included and its splitter is not.

use serde::{Deserialize, Serialize};

use crate::artifact::Dataset;
use crate::geometry::{eye_distance, CameraPose, Rect, WorldPoint};
use crate::segments::AttributedSegment;
use crate::{par, Error, NONE_U32};

/// Maps eye distance to the largest tolerated world-space error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// `ε(d) = τ · max(d, 0) · scale`, with `scale` the world size of one
    /// pixel at unit distance.
    Screen { tolerance_px: f64, scale: f64 },
    /// A distance-independent threshold. Mostly useful in tests.
    Constant(f64),
}

impl ThresholdPolicy {
    pub fn screen(tolerance_px: f64, camera: &CameraPose) -> Self {
        let scale = 2.0 * (camera.fov_y / 2.0).tan() / camera.viewport_h.max(1) as f64;
        ThresholdPolicy::Screen { tolerance_px: tolerance_px.max(0.0), scale }
    }

    pub fn epsilon(&self, d: f64) -> f64 {
        match *self {
            ThresholdPolicy::Screen { tolerance_px, scale } => tolerance_px * d.max(0.0) * scale,
            ThresholdPolicy::Constant(c) => c,
        }
    }
}

/// A circular region that scales the threshold: `factor < 1` refines inside,
/// `factor > 1` simplifies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lens {
    pub center: WorldPoint,
    pub radius: f64,
    pub factor: f64,
}

impl Lens {
    pub fn new(center: WorldPoint, radius: f64, factor: f64) -> Result<Self, Error> {
        if !center.is_finite() || !(radius > 0.0 && radius.is_finite()) || !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidFrame(format!("lens needs radius > 0 and factor > 0, got r={radius} f={factor}")));
        }
        Ok(Self { center, radius, factor })
    }

    /// Factor applied to a point at `pos` whose terms reach `d_star` away.
    /// Refining lenses grow by `d*` and simplifying ones shrink by it, which
    /// keeps inclusion monotone along dependency edges.
    pub fn effective_factor(&self, pos: &WorldPoint, d_star: f64) -> f64 {
        let dist = pos.distance(&self.center);
        if self.factor < 1.0 {
            if dist <= self.radius + d_star {
                return self.factor;
            }
        } else if self.factor > 1.0 && dist <= self.radius - d_star {
            return self.factor;
        }
        1.0
    }
}

/// Everything that decides inclusion for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewParams {
    pub camera: CameraPose,
    pub policy: ThresholdPolicy,
    pub lens: Option<Lens>,
}

impl ViewParams {
    pub fn new(camera: CameraPose, tolerance_px: f64, lens: Option<Lens>) -> Self {
        Self { policy: ThresholdPolicy::screen(tolerance_px, &camera), camera, lens }
    }

    pub fn with_policy(camera: CameraPose, policy: ThresholdPolicy, lens: Option<Lens>) -> Self {
        Self { camera, policy, lens }
    }

    /// The inclusion test on raw terms.
    pub fn includes(&self, e_star: f32, d_star: f32, eval_pos: &WorldPoint) -> bool {
        let d = eye_distance(&self.camera, eval_pos);
        let eps = self.policy.epsilon(d - d_star as f64);
        let th = match self.lens {
            Some(l) => {
                let f = l.effective_factor(eval_pos, d_star as f64);
                if f == 1.0 {
                    eps
                } else {
                    f * eps
                }
            }
            None => eps,
        };
        e_star as f64 > th
    }
}

/// One polyline's simplified chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedPolyline {
    pub polyline: u32,
    pub line_type: u8,
    /// Global point ids from the first to the last point.
    pub points: Vec<u32>,
}

impl Dataset {
    pub(crate) fn included_unchecked(&self, id: u32, view: &ViewParams) -> bool {
        let p = &self.points[id as usize];
        view.includes(p.e_star, p.d_star, &self.eval_position(id))
    }

    pub fn point_included(&self, id: u32, view: &ViewParams) -> Result<bool, Error> {
        if id as usize >= self.points.len() {
            return Err(Error::Corrupt(format!("point id {id} out of range ({} points)", self.points.len())));
        }
        Ok(self.included_unchecked(id, view))
    }

    /// Inclusion of every point, evaluated in parallel.
    pub fn inclusion_mask(&self, view: &ViewParams) -> Vec<bool> {
        par::map_range(self.points.len(), |i| self.included_unchecked(i as u32, view))
    }

    pub fn segment_visible(&self, seg: &AttributedSegment, view: &ViewParams) -> bool {
        seg.is_visible_with(|p| self.included_unchecked(p, view))
    }

    /// Simplified chains of all polylines whose bounding box meets `clip`,
    /// stitched from visible segments.
    pub fn simplify_scene(&self, view: &ViewParams, clip: Option<&Rect>) -> Vec<SimplifiedPolyline> {
        let mask = self.inclusion_mask(view);
        self.simplify_with_mask(&mask, clip)
    }

    pub fn simplify_with_mask(&self, mask: &[bool], clip: Option<&Rect>) -> Vec<SimplifiedPolyline> {
        let spans: Vec<_> = self
            .polylines()
            .iter()
            .enumerate()
            .filter(|(_, s)| clip.map_or(true, |c| c.intersects(&s.bbox)))
            .collect();
        par::map_slice(&spans, |&(pi, span)| {
            let mut edges: Vec<(u32, u32)> = self.segments[span.segment_range()]
                .iter()
                .filter(|s| s.is_visible_with(|p| mask[p as usize]))
                .map(|s| (s.a, s.b))
                .collect();
            edges.sort_unstable();
            let mut points: Vec<u32> = edges.iter().map(|e| e.0).collect();
            points.push(edges.last().map_or(span.first_point + span.point_count - 1, |e| e.1));
            debug_assert!(edges.windows(2).all(|w| w[0].1 == w[1].0), "visible segments do not chain");
            SimplifiedPolyline { polyline: pi as u32, line_type: span.line_type, points }
        })
    }

    /// Position used for distance evaluation: the proxy's if the point has one.
    pub fn eval_position(&self, id: u32) -> WorldPoint {
        match self.proxy_of(id) {
            NONE_U32 => self.points[id as usize].position,
            p => self.proxies[p as usize].position,
        }
    }
}
