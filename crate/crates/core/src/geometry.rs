//! Shared domain types and elementary planar geometry.
//!
//! All world coordinates are `f64` planar (pre-projected) meters. The ground
//! is the `z = 0` plane; cameras sit above it.

use serde::{Deserialize, Serialize};

use crate::Error;

/// A position on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for WorldPoint {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// An axis-aligned world rectangle. `min` is inclusive, and so is `max` for
/// containment queries on points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: WorldPoint,
    pub max: WorldPoint,
}

impl Rect {
    pub const EMPTY: Rect = Rect {
        min: WorldPoint::new(f64::INFINITY, f64::INFINITY),
        max: WorldPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn new(min: WorldPoint, max: WorldPoint) -> Self {
        Self { min, max }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a WorldPoint>) -> Self {
        let mut r = Rect::EMPTY;
        for p in points {
            r.include(p);
        }
        r
    }

    pub fn is_empty(&self) -> bool {
        !(self.min.x <= self.max.x && self.min.y <= self.max.y)
    }

    pub fn include(&mut self, p: &WorldPoint) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min: WorldPoint::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: WorldPoint::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn expand(&self, margin: f64) -> Rect {
        Rect {
            min: WorldPoint::new(self.min.x - margin, self.min.y - margin),
            max: WorldPoint::new(self.max.x + margin, self.max.y + margin),
        }
    }

    pub fn contains(&self, p: &WorldPoint) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// One input line before preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePolyline {
    pub points: Vec<WorldPoint>,
    pub line_type: u8,
}

impl SourcePolyline {
    /// Validates finiteness, length and the no-consecutive-duplicates rule.
    pub fn new(points: Vec<WorldPoint>, line_type: u8) -> Result<Self, Error> {
        if points.len() < 2 {
            return Err(Error::InvalidPolyline(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPolyline(format!(
                "non-finite coordinate ({}, {})",
                p.x, p.y
            )));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPolyline(
                "consecutive duplicate points".into(),
            ));
        }
        Ok(Self { points, line_type })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Perspective camera looking at the ground plane.
///
/// `yaw` is the azimuth of the view direction measured from +x towards +y;
/// `pitch` is the angle below the horizon (`π/2` looks straight down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CameraPose {
    pub eye: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
    pub fov_y: f64,
    pub viewport_w: u32,
    pub viewport_h: u32,
}

impl CameraPose {
    /// A camera looking straight down at `(x, y)` from `height`, with +y up
    /// and +x to the right on screen.
    pub fn nadir(x: f64, y: f64, height: f64, fov_y: f64, w: u32, h: u32) -> Self {
        Self {
            eye: [x, y, height],
            yaw: std::f64::consts::FRAC_PI_2,
            pitch: std::f64::consts::FRAC_PI_2,
            fov_y,
            viewport_w: w,
            viewport_h: h,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.eye.iter().all(|v| v.is_finite()) || !self.yaw.is_finite() || !self.pitch.is_finite() {
            return Err(Error::InvalidCamera("non-finite pose".into()));
        }
        if !(self.fov_y > 0.0 && self.fov_y < std::f64::consts::PI) {
            return Err(Error::InvalidCamera(format!("fov_y {} outside (0, π)", self.fov_y)));
        }
        if self.viewport_w == 0 || self.viewport_h == 0 {
            return Err(Error::InvalidCamera("zero-area viewport".into()));
        }
        Ok(())
    }

    pub fn ground_position(&self) -> WorldPoint {
        WorldPoint::new(self.eye[0], self.eye[1])
    }

    pub fn height(&self) -> f64 {
        self.eye[2]
    }
}

/// Per-distance thickness scaling for dynamic line widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThicknessMultipliers {
    pub m_near: f64,
    pub m_far: f64,
    pub d_near: f64,
    pub d_far: f64,
}

impl Default for ThicknessMultipliers {
    fn default() -> Self {
        Self { m_near: 1.0, m_far: 1.0, d_near: 0.0, d_far: 1.0 }
    }
}

/// Rendering attributes of one line category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineType {
    pub id: u8,
    pub priority: i32,
    pub base_width: f64,
    pub style_profile_id: u32,
    pub thickness: ThicknessMultipliers,
}

impl LineType {
    /// Largest width this type can be rendered at, in world units.
    pub fn max_width(&self, dynamic: bool) -> f64 {
        if dynamic {
            self.base_width * self.thickness.m_near.max(self.thickness.m_far)
        } else {
            self.base_width
        }
    }

    /// Rendered width at eye distance `d`. Dynamic widths interpolate the
    /// multiplier linearly between `d_near` and `d_far`.
    pub fn effective_width(&self, d: f64, dynamic: bool) -> f64 {
        if !dynamic {
            return self.base_width;
        }
        let t = &self.thickness;
        let s = if t.d_far > t.d_near {
            ((d - t.d_near) / (t.d_far - t.d_near)).clamp(0.0, 1.0)
        } else if d >= t.d_far {
            1.0
        } else {
            0.0
        };
        self.base_width * (t.m_near + (t.m_far - t.m_near) * s)
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn distance_point_to_segment(p: &WorldPoint, a: &WorldPoint, b: &WorldPoint) -> f64 {
    // Canonical endpoint order keeps the result bitwise symmetric in (a, b).
    let (a, b) = if (b.x, b.y) < (a.x, a.y) { (b, a) } else { (a, b) };
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&WorldPoint::new(a.x + t * dx, a.y + t * dy))
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
pub fn distance_point_to_line(p: &WorldPoint, a: &WorldPoint, b: &WorldPoint) -> Result<f64, Error> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len = dx.hypot(dy);
    if len == 0.0 {
        return Err(Error::DegenerateGeometry("line through coincident points".into()));
    }
    Ok(((p.x - a.x) * dy - (p.y - a.y) * dx).abs() / len)
}

/// Twice the signed area of `(a, b, c)`; positive when counter-clockwise.
pub fn orient(a: &WorldPoint, b: &WorldPoint, c: &WorldPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Closed triangle containment. A collinear triangle contains exactly the
/// points of its hull segment.
pub fn point_in_triangle(q: &WorldPoint, t1: &WorldPoint, t2: &WorldPoint, t3: &WorldPoint) -> bool {
    let d1 = orient(t1, t2, q);
    let d2 = orient(t2, t3, q);
    let d3 = orient(t3, t1, q);
    if orient(t1, t2, t3) == 0.0 {
        if d1 != 0.0 || d2 != 0.0 || d3 != 0.0 {
            return false;
        }
        return Rect::from_points([t1, t2, t3]).contains(q);
    }
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// 3D distance from the camera eye to the ground point `p`.
pub fn eye_distance(camera: &CameraPose, p: &WorldPoint) -> f64 {
    let dx = p.x - camera.eye[0];
    let dy = p.y - camera.eye[1];
    let dz = camera.eye[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// True when the open segments `[a, b]` and `[c, d]` cross at a single
/// interior point of both.
pub fn segments_cross(a: &WorldPoint, b: &WorldPoint, c: &WorldPoint, d: &WorldPoint) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> WorldPoint {
        WorldPoint::new(x, y)
    }

    #[test]
    fn segment_distance_examples() {
        assert_eq!(distance_point_to_segment(&p(0.0, 1.0), &p(0.0, 0.0), &p(2.0, 0.0)), 1.0);
        assert_eq!(distance_point_to_segment(&p(3.0, 0.0), &p(0.0, 0.0), &p(2.0, 0.0)), 1.0);
        assert_eq!(distance_point_to_segment(&p(1.0, 0.0), &p(0.0, 0.0), &p(2.0, 0.0)), 0.0);
        assert_eq!(distance_point_to_segment(&p(3.0, 4.0), &p(0.0, 0.0), &p(0.0, 0.0)), 5.0);
    }

    #[test]
    fn line_distance_examples() {
        assert_eq!(distance_point_to_line(&p(0.0, 1.0), &p(0.0, 0.0), &p(2.0, 0.0)).unwrap(), 1.0);
        assert_eq!(distance_point_to_line(&p(-5.0, 2.0), &p(0.0, 0.0), &p(1.0, 0.0)).unwrap(), 2.0);
        assert_eq!(distance_point_to_line(&p(7.0, 7.0), &p(0.0, 0.0), &p(1.0, 1.0)).unwrap(), 0.0);
        assert!(matches!(
            distance_point_to_line(&p(1.0, 1.0), &p(2.0, 2.0), &p(2.0, 2.0)),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn triangle_examples() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        assert!(point_in_triangle(&p(0.1, 0.1), &a, &b, &c));
        assert!(!point_in_triangle(&p(1.0, 1.0), &a, &b, &c));
        assert!(point_in_triangle(&p(0.5, 0.0), &a, &b, &c));
        assert!(point_in_triangle(&a, &a, &b, &c));
    }

    #[test]
    fn degenerate_triangle_contains_only_its_segment() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0));
        assert!(point_in_triangle(&p(1.5, 1.5), &a, &b, &c));
        assert!(!point_in_triangle(&p(3.0, 3.0), &a, &b, &c));
        assert!(!point_in_triangle(&p(1.0, 1.1), &a, &b, &c));
    }

    #[test]
    fn eye_distance_examples() {
        let cam = |x, y, h| CameraPose::nadir(x, y, h, 1.0, 10, 10);
        assert_eq!(eye_distance(&cam(0.0, 0.0, 3.0), &p(4.0, 0.0)), 5.0);
        assert_eq!(eye_distance(&cam(0.0, 0.0, 7.5), &p(0.0, 0.0)), 7.5);
        assert_eq!(eye_distance(&cam(1.0, 2.0, 2.0), &p(1.0, 2.0)), 2.0);
    }

    #[test]
    fn effective_width_examples() {
        let lt = LineType {
            id: 0,
            priority: 0,
            base_width: 2.0,
            style_profile_id: 0,
            thickness: ThicknessMultipliers { m_near: 1.0, m_far: 4.0, d_near: 100.0, d_far: 300.0 },
        };
        for d in [1.0, 150.0, 1e6] {
            assert_eq!(lt.effective_width(d, false), 2.0);
        }
        assert_eq!(lt.effective_width(50.0, true), 2.0);
        assert_eq!(lt.effective_width(100.0, true), 2.0);
        assert_eq!(lt.effective_width(300.0, true), 8.0);
        assert_eq!(lt.effective_width(1e9, true), 8.0);
        assert_eq!(lt.effective_width(200.0, true), 5.0);
        for d in [0.5, 120.0, 250.0, 5000.0] {
            assert!(lt.effective_width(d, true) <= lt.max_width(true));
        }
    }

    #[test]
    fn polyline_validation() {
        assert!(SourcePolyline::new(vec![p(0.0, 0.0)], 0).is_err());
        assert!(SourcePolyline::new(vec![p(0.0, 0.0), p(0.0, 0.0)], 0).is_err());
        assert!(SourcePolyline::new(vec![p(0.0, 0.0), p(f64::NAN, 0.0)], 0).is_err());
        assert!(SourcePolyline::new(vec![p(0.0, 0.0), p(1.0, 0.0)], 3).is_ok());
    }

    #[test]
    fn crossing_excludes_shared_endpoints() {
        assert!(segments_cross(&p(0.0, 0.0), &p(2.0, 2.0), &p(0.0, 2.0), &p(2.0, 0.0)));
        assert!(!segments_cross(&p(0.0, 0.0), &p(2.0, 2.0), &p(2.0, 2.0), &p(3.0, 0.0)));
        assert!(!segments_cross(&p(0.0, 0.0), &p(1.0, 0.0), &p(0.0, 1.0), &p(1.0, 1.0)));
    }

    fn coord() -> impl Strategy<Value = f64> {
        -100.0..100.0f64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn segment_distance_symmetric_nonnegative(px in coord(), py in coord(), ax in coord(), ay in coord(), bx in coord(), by in coord()) {
            let (q, a, b) = (p(px, py), p(ax, ay), p(bx, by));
            let d1 = distance_point_to_segment(&q, &a, &b);
            let d2 = distance_point_to_segment(&q, &b, &a);
            prop_assert!(d1 >= 0.0);
            prop_assert_eq!(d1, d2);
        }

        #[test]
        fn triangle_cyclic_invariance(qx in coord(), qy in coord(), t in proptest::array::uniform6(coord())) {
            let q = p(qx, qy);
            let (a, b, c) = (p(t[0], t[1]), p(t[2], t[3]), p(t[4], t[5]));
            let r = point_in_triangle(&q, &a, &b, &c);
            prop_assert_eq!(r, point_in_triangle(&q, &b, &c, &a));
            prop_assert_eq!(r, point_in_triangle(&q, &c, &a, &b));
        }

        #[test]
        fn eye_distance_at_least_height(ex in coord(), ey in coord(), h in 0.1..500.0f64, qx in coord(), qy in coord()) {
            let cam = CameraPose::nadir(ex, ey, h, 1.0, 4, 4);
            prop_assert!(eye_distance(&cam, &p(qx, qy)) >= h);
        }
    }
}
