//! Shared scene generators and independent oracles for integration tests.

#![allow(dead_code)]

use linelod_core::raster::{LineStyle, StyleConfig};
use linelod_core::artifact::preprocess;
use linelod_core::{CameraPose, Dataset, PreprocessConfig, PreprocessStats, SourcePolyline, WorldPoint};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p(x: f64, y: f64) -> WorldPoint {
    WorldPoint::new(x, y)
}

pub fn line(coords: &[(f64, f64)], line_type: u8) -> SourcePolyline {
    SourcePolyline::new(coords.iter().map(|&(x, y)| p(x, y)).collect(), line_type).unwrap()
}

pub fn build(lines: &[SourcePolyline], dependencies: bool) -> (Dataset, PreprocessStats) {
    build_styled(lines, &StyleConfig::default(), dependencies)
}

pub fn build_styled(lines: &[SourcePolyline], styles: &StyleConfig, dependencies: bool) -> (Dataset, PreprocessStats) {
    let cfg = PreprocessConfig { dependencies, ..PreprocessConfig::default() };
    preprocess(lines, styles, &cfg).unwrap()
}

/// A polyline with strictly increasing x inside the band `y0..y1`.
pub fn monotone_polyline(r: &mut impl Rng, k: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> SourcePolyline {
    let mut xs: Vec<f64> = (0..k).map(|_| r.gen_range(x0..x1)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    while xs.len() < k.max(2) {
        let last = *xs.last().unwrap_or(&x0);
        xs.push(last + r.gen_range(0.01..1.0));
    }
    let pts = xs.into_iter().map(|x| p(x, r.gen_range(y0..y1))).collect();
    SourcePolyline::new(pts, 0).unwrap()
}

/// Polylines that cannot have dependees: each is x-monotone and owns a
/// horizontal band no other polyline enters.
pub fn banded_scene(r: &mut impl Rng, lines: usize, max_k: usize) -> Vec<SourcePolyline> {
    (0..lines)
        .map(|i| {
            let k = r.gen_range(2..=max_k);
            let y0 = i as f64 * 10.0;
            monotone_polyline(r, k, 0.0, 100.0, y0, y0 + 8.0)
        })
        .collect()
}

fn orient(a: &WorldPoint, b: &WorldPoint, c: &WorldPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Proper crossing of two closed segments at one interior point of both.
pub fn cross(a: &WorldPoint, b: &WorldPoint, c: &WorldPoint, d: &WorldPoint) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
}

/// Number of crossing pairs among the edges of `chains`, skipping edges
/// that share a vertex within one chain.
pub fn count_crossings(chains: &[Vec<WorldPoint>]) -> usize {
    let mut edges = Vec::new();
    for (ci, c) in chains.iter().enumerate() {
        for j in 0..c.len().saturating_sub(1) {
            edges.push((ci, j, c[j], c[j + 1]));
        }
    }
    let mut n = 0;
    for i in 0..edges.len() {
        for k in i + 1..edges.len() {
            let (ci, ji, a, b) = edges[i];
            let (ck, jk, c, d) = edges[k];
            if ci == ck && jk == ji + 1 {
                continue;
            }
            if cross(&a, &b, &c, &d) {
                n += 1;
            }
        }
    }
    n
}

/// Short random walks packed into a small box without any crossing, so
/// refinement triangles overlap other lines often.
pub fn interlocking_scene(r: &mut impl Rng, lines: usize, max_k: usize) -> Vec<SourcePolyline> {
    let mut accepted: Vec<Vec<WorldPoint>> = Vec::new();
    let mut attempts = 0;
    while accepted.len() < lines && attempts < lines * 50 {
        attempts += 1;
        let k = r.gen_range(3..=max_k);
        let mut pts = vec![p(r.gen_range(0.0..10.0), r.gen_range(0.0..10.0))];
        let mut heading: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        for _ in 1..k {
            heading += r.gen_range(-1.8..1.8);
            let len = r.gen_range(0.4..2.5);
            let last = *pts.last().unwrap();
            pts.push(p(last.x + len * heading.cos(), last.y + len * heading.sin()));
        }
        let mut with = accepted.clone();
        with.push(pts.clone());
        if count_crossings(&with) == 0 {
            accepted.push(pts);
        }
    }
    accepted.into_iter().map(|pts| SourcePolyline::new(pts, 0).unwrap()).collect()
}

pub fn bbox_of(lines: &[SourcePolyline]) -> (WorldPoint, WorldPoint) {
    let mut lo = p(f64::INFINITY, f64::INFINITY);
    let mut hi = p(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for q in lines.iter().flat_map(|l| &l.points) {
        lo = p(lo.x.min(q.x), lo.y.min(q.y));
        hi = p(hi.x.max(q.x), hi.y.max(q.y));
    }
    (lo, hi)
}

/// A camera somewhere above the scene, looking down at a random angle.
pub fn random_camera(r: &mut impl Rng, lines: &[SourcePolyline]) -> CameraPose {
    let (lo, hi) = bbox_of(lines);
    let ext = (hi.x - lo.x).max(hi.y - lo.y).max(1e-3);
    let cx = r.gen_range(lo.x - 0.5 * ext..hi.x + 0.5 * ext);
    let cy = r.gen_range(lo.y - 0.5 * ext..hi.y + 0.5 * ext);
    CameraPose {
        eye: [cx, cy, r.gen_range(0.05 * ext..3.0 * ext)],
        yaw: r.gen_range(0.0..std::f64::consts::TAU),
        pitch: r.gen_range(0.3..std::f64::consts::FRAC_PI_2),
        fov_y: r.gen_range(0.4..1.3),
        viewport_w: r.gen_range(64..=1920),
        viewport_h: r.gen_range(64..=1080),
    }
}

pub fn eye_dist(cam: &CameraPose, q: &WorldPoint) -> f64 {
    let (dx, dy, dz) = (q.x - cam.eye[0], q.y - cam.eye[1], cam.eye[2]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// World size of one pixel at unit distance.
pub fn pixel_scale(cam: &CameraPose) -> f64 {
    2.0 * (cam.fov_y / 2.0).tan() / cam.viewport_h as f64
}

pub fn uniform_styles(types: &[(u8, i32, f64, [u8; 4])]) -> StyleConfig {
    StyleConfig { line_types: types.iter().map(|&(id, pr, w, c)| LineStyle::uniform(id, pr, w, c)).collect() }
}

/// Chains of included points as positions.
pub fn chains(ds: &Dataset, mask: &[bool]) -> Vec<Vec<WorldPoint>> {
    ds.simplify_with_mask(mask, None)
        .into_iter()
        .map(|c| c.points.iter().map(|&i| ds.points[i as usize].position).collect())
        .collect()
}

/// One node of an independently built refinement tree.
#[derive(Debug, Clone)]
pub struct OracleNode {
    pub point: usize,
    pub error: f64,
    pub saturated: f64,
    pub d_hat: f64,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

/// Recursive Douglas-Peucker over `pts`, indexed by point; endpoints and
/// leaves beyond the tree stay `None`.
pub struct OracleTree {
    pub pts: Vec<WorldPoint>,
    pub nodes: Vec<Option<OracleNode>>,
    pub root: Option<usize>,
}

fn line_dist(q: &WorldPoint, a: &WorldPoint, b: &WorldPoint) -> f64 {
    let len = (b.x - a.x).hypot(b.y - a.y);
    if len == 0.0 {
        return (q.x - a.x).hypot(q.y - a.y);
    }
    orient(a, b, q).abs() / len
}

impl OracleTree {
    pub fn new(pts: &[WorldPoint]) -> Self {
        let mut t = OracleTree { pts: pts.to_vec(), nodes: vec![None; pts.len()], root: None };
        t.root = t.split(0, pts.len() - 1);
        t
    }

    fn split(&mut self, l: usize, r: usize) -> Option<usize> {
        if r < l + 2 {
            return None;
        }
        let mut best = l + 1;
        for i in l + 2..r {
            if line_dist(&self.pts[i], &self.pts[l], &self.pts[r]) > line_dist(&self.pts[best], &self.pts[l], &self.pts[r]) {
                best = i;
            }
        }
        let error = line_dist(&self.pts[best], &self.pts[l], &self.pts[r]);
        let left = self.split(l, best);
        let right = self.split(best, r);
        let here = self.pts[best];
        let d = |q: &WorldPoint| (q.x - here.x).hypot(q.y - here.y);
        let mut saturated = error;
        let mut d_hat = (l + 1..r).filter(|&j| j != best).map(|j| d(&self.pts[j])).fold(0.0, f64::max);
        for c in [left, right].into_iter().flatten() {
            let n = self.nodes[c].as_ref().unwrap();
            saturated = saturated.max(n.saturated);
            d_hat = d_hat.max(d(&self.pts[c]) + n.d_hat);
        }
        self.nodes[best] = Some(OracleNode { point: best, error, saturated, d_hat, left, right });
        Some(best)
    }

    /// In-order stopping traversal; local ids from first to last point.
    pub fn simplify(&self, include: &dyn Fn(&OracleNode) -> bool) -> Vec<usize> {
        let mut out = vec![0];
        self.visit(self.root, include, &mut out);
        out.push(self.pts.len() - 1);
        out
    }

    fn visit(&self, n: Option<usize>, include: &dyn Fn(&OracleNode) -> bool, out: &mut Vec<usize>) {
        let Some(n) = n else { return };
        let node = self.nodes[n].as_ref().unwrap();
        if !include(node) {
            return;
        }
        self.visit(node.left, include, out);
        out.push(n);
        self.visit(node.right, include, out);
    }
}

/// The refinement scene with one point of a neighbor poking into a
/// refinement triangle: simplifying the upper line alone would cross the
/// lower one.
pub fn poke_scene() -> Vec<SourcePolyline> {
    vec![
        line(&[(0.0, 0.0), (4.0, 6.0), (7.0, 4.0), (10.0, 0.0)], 0),
        line(&[(4.0, -10.0), (5.0, 2.0), (6.0, -10.0)], 0),
    ]
}
