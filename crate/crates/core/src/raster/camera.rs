//! Inverse projection from pixels to the ground plane.
//!
//! Pixel coordinates are continuous with `(0, 0)` at the top-left corner of
//! the viewport; pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`.

use crate::geometry::{eye_distance, CameraPose, Rect, WorldPoint};

type V3 = [f64; 3];

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Precomputed view basis of a camera.
#[derive(Debug, Clone, Copy)]
pub struct CameraBasis {
    eye: V3,
    forward: V3,
    right: V3,
    up: V3,
    tan_half: f64,
    aspect: f64,
    w: f64,
    h: f64,
}

impl CameraBasis {
    pub fn new(camera: &CameraPose) -> Self {
        let (sy, cy) = camera.yaw.sin_cos();
        let (sp, cp) = camera.pitch.sin_cos();
        let forward = [cp * cy, cp * sy, -sp];
        let right = [sy, -cy, 0.0];
        let up = cross(right, forward);
        Self {
            eye: camera.eye,
            forward,
            right,
            up,
            tan_half: (camera.fov_y / 2.0).tan(),
            aspect: camera.viewport_w as f64 / camera.viewport_h as f64,
            w: camera.viewport_w as f64,
            h: camera.viewport_h as f64,
        }
    }

    pub fn ray(&self, px: f64, py: f64) -> V3 {
        let nx = 2.0 * px / self.w - 1.0;
        let ny = 1.0 - 2.0 * py / self.h;
        let sx = nx * self.tan_half * self.aspect;
        let sy = ny * self.tan_half;
        [0, 1, 2].map(|i| self.forward[i] + sx * self.right[i] + sy * self.up[i])
    }

    /// Ground hit of the ray through `(px, py)`; `None` at or above the horizon.
    pub fn pixel_to_world(&self, px: f64, py: f64) -> Option<WorldPoint> {
        let d = self.ray(px, py);
        if !(d[2] < 0.0) || !(self.eye[2] > 0.0) {
            return None;
        }
        let t = -self.eye[2] / d[2];
        Some(WorldPoint::new(self.eye[0] + t * d[0], self.eye[1] + t * d[1]))
    }

    /// World size of the pixel centered at `(px, py)`: the square root of its
    /// ground quad's area. Near the horizon, where a corner ray misses the
    /// ground, falls back to the perspective estimate at `q`.
    pub fn footprint(&self, px: f64, py: f64, q: &WorldPoint, camera: &CameraPose) -> f64 {
        let c = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)].map(|(dx, dy)| self.pixel_to_world(px + dx, py + dy));
        if let [Some(a), Some(b), Some(cc), Some(d)] = c {
            let area = 0.5 * ((a.x * b.y - b.x * a.y) + (b.x * cc.y - cc.x * b.y) + (cc.x * d.y - d.x * cc.y) + (d.x * a.y - a.x * d.y)).abs();
            if area > 0.0 && area.is_finite() {
                return area.sqrt();
            }
        }
        eye_distance(camera, q) * 2.0 * self.tan_half / self.h
    }
}

pub fn pixel_to_world(camera: &CameraPose, px: f64, py: f64) -> Option<WorldPoint> {
    CameraBasis::new(camera).pixel_to_world(px, py)
}

/// Ground rectangle covered by the viewport, or `None` when the horizon is
/// in view and the footprint is unbounded.
pub fn view_footprint(camera: &CameraPose) -> Option<Rect> {
    let b = CameraBasis::new(camera);
    let (w, h) = (camera.viewport_w as f64, camera.viewport_h as f64);
    let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)].map(|(x, y)| b.pixel_to_world(x, y));
    let mut r = Rect::EMPTY;
    for c in corners {
        r.include(&c?);
    }
    Some(r)
}
