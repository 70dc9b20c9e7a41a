//! Intersection-avoidance dependencies and the pre-evaluated star terms.
//!
//! Removing an interior point replaces the two segments through it by its
//! baseline, sweeping the triangle `(baseline left, point, baseline right)`.
//! Any other point inside that triangle (a dependee) could end up on the wrong
//! side of the simplified line, so a point may only be excluded when all its
//! dependees are excluded too.
//!
//! Dependee edges and tree parent-to-child edges together form one graph in
//! which an edge `i -> j` means "`j` included implies `i` included". Strongly
//! connected components are contracted into proxy points, then star terms are
//! propagated sinks first:
//!
//! ```text
//! e*(i) = max(ê(i), e*(j) for i -> j)
//! d*(i) = max(d̂(i), |i j| + d*(j) for i -> j)
//! ```
//!
//! which makes `e* > ε(d - d*)` monotone along every edge for any increasing
//! `ε`. Terms are rounded upward to `f32` as they are produced, and dependents
//! are computed from the rounded values, so narrowing never breaks the bound.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::blg::RefinementTree;
use crate::geometry::{eye_distance, point_in_triangle, orient, CameraPose, Rect, WorldPoint};
use crate::visibility::ThresholdPolicy;
use crate::{par, Error, NONE_U32};

/// Rounds toward +∞ onto the `f32` grid.
pub fn round_up_f32(x: f64) -> f32 {
    let f = x as f32;
    if (f as f64) < x {
        f.next_up()
    } else {
        f
    }
}

/// Per-point structural data gathered from the trees.
#[derive(Debug, Clone)]
pub struct PointTable {
    pub positions: Vec<WorldPoint>,
    pub polyline: Vec<u32>,
    /// Saturated error; `+∞` for polyline endpoints, which are always drawn.
    pub saturated_error: Vec<f64>,
    pub d_max_hat: Vec<f64>,
    /// Global ids of the baseline endpoints; `NONE_U32` for endpoints.
    pub baseline: Vec<(u32, u32)>,
    /// Global id of the tree parent, if any.
    pub parent: Vec<u32>,
}

impl PointTable {
    pub fn from_trees(trees: &[RefinementTree]) -> Self {
        let n: usize = trees.iter().map(|t| t.point_count()).sum();
        let mut tbl = PointTable {
            positions: Vec::with_capacity(n),
            polyline: Vec::with_capacity(n),
            saturated_error: Vec::with_capacity(n),
            d_max_hat: Vec::with_capacity(n),
            baseline: Vec::with_capacity(n),
            parent: Vec::with_capacity(n),
        };
        for t in trees {
            debug_assert_eq!(t.offset as usize, tbl.positions.len());
            for (local, p) in t.points.iter().enumerate() {
                tbl.positions.push(*p);
                tbl.polyline.push(t.polyline_id);
                match t.node(local as u32) {
                    Some(node) => {
                        tbl.saturated_error.push(node.saturated_error);
                        tbl.d_max_hat.push(node.d_max_hat);
                        tbl.baseline.push((t.global(node.baseline.0), t.global(node.baseline.1)));
                        tbl.parent.push(node.parent.map_or(NONE_U32, |p| t.global(p)));
                    }
                    None => {
                        tbl.saturated_error.push(f64::INFINITY);
                        tbl.d_max_hat.push(0.0);
                        tbl.baseline.push((NONE_U32, NONE_U32));
                        tbl.parent.push(NONE_U32);
                    }
                }
            }
        }
        tbl
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_interior(&self, id: u32) -> bool {
        self.baseline[id as usize].0 != NONE_U32
    }

    /// Same-polyline descendant test via the baseline span.
    pub fn is_descendant(&self, desc: u32, anc: u32) -> bool {
        let (l, r) = self.baseline[anc as usize];
        l != NONE_U32 && self.polyline[desc as usize] == self.polyline[anc as usize] && desc > l && desc < r && desc != anc
    }
}

/// Uniform bucket grid over all points, used only while preprocessing.
pub struct PointGrid {
    bbox: Rect,
    cell: f64,
    w: usize,
    h: usize,
    starts: Vec<u32>,
    ids: Vec<u32>,
}

impl PointGrid {
    /// Bucket size is the longer bbox axis over 1024.
    pub fn new(points: &[WorldPoint]) -> Self {
        let bbox = Rect::from_points(points);
        if bbox.is_empty() {
            return Self { bbox, cell: 1.0, w: 1, h: 1, starts: vec![0, 0], ids: Vec::new() };
        }
        let span = bbox.width().max(bbox.height());
        let cell = if span > 0.0 { span / 1024.0 } else { 1.0 };
        let w = ((bbox.width() / cell).floor() as usize + 1).min(1025);
        let h = ((bbox.height() / cell).floor() as usize + 1).min(1025);
        let mut counts = vec![0u32; w * h + 1];
        let cells: Vec<usize> = points
            .iter()
            .map(|p| {
                let (cx, cy) = Self::coords(&bbox, cell, w, h, p);
                cy * w + cx
            })
            .collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut ids = vec![0u32; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            ids[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self { bbox, cell, w, h, starts: counts, ids }
    }

    fn coords(bbox: &Rect, cell: f64, w: usize, h: usize, p: &WorldPoint) -> (usize, usize) {
        let cx = (((p.x - bbox.min.x) / cell).floor().max(0.0) as usize).min(w - 1);
        let cy = (((p.y - bbox.min.y) / cell).floor().max(0.0) as usize).min(h - 1);
        (cx, cy)
    }

    /// Points in every bucket overlapping `r`, in ascending bucket order.
    pub fn query(&self, r: &Rect, mut f: impl FnMut(u32)) {
        if self.ids.is_empty() || !r.intersects(&self.bbox) {
            return;
        }
        let (x0, y0) = Self::coords(&self.bbox, self.cell, self.w, self.h, &r.min);
        let (x1, y1) = Self::coords(&self.bbox, self.cell, self.w, self.h, &r.max);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let c = cy * self.w + cx;
                for &id in &self.ids[self.starts[c] as usize..self.starts[c + 1] as usize] {
                    f(id);
                }
            }
        }
    }
}

/// Points inside the triangle swept by removing `id`. Polyline endpoints
/// never move and have no dependees. Same-polyline descendants are left out
/// (tree edges already order them), as is anything sitting exactly on a
/// baseline endpoint, where the simplified line only touches it.
pub fn find_dependees(id: u32, table: &PointTable, grid: &PointGrid) -> Vec<u32> {
    let (l, r) = table.baseline[id as usize];
    if l == NONE_U32 {
        return Vec::new();
    }
    let (a, p, b) = (table.positions[l as usize], table.positions[id as usize], table.positions[r as usize]);
    if orient(&a, &p, &b) == 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    grid.query(&Rect::from_points([&a, &p, &b]), |j| {
        if j == id || table.is_descendant(j, id) {
            return;
        }
        let q = table.positions[j as usize];
        if q == a || q == b {
            return;
        }
        if point_in_triangle(&q, &a, &p, &b) {
            out.push(j);
        }
    });
    out.sort_unstable();
    out
}

/// Dependees of every point, computed in parallel.
pub fn find_all_dependees(table: &PointTable) -> Vec<Vec<u32>> {
    let grid = PointGrid::new(&table.positions);
    par::map_range(table.len(), |i| find_dependees(i as u32, table, &grid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyPoint {
    /// Sorted global ids.
    pub members: Vec<u32>,
    /// Mean of member positions; used for all distance evaluations.
    pub position: WorldPoint,
    pub e_star: f32,
    pub d_star: f32,
}

/// Dependency graph condensed into a DAG of single points and proxies.
#[derive(Debug, Clone)]
pub struct DependencyDag {
    /// Components in reverse topological order: every component's
    /// successors appear before it.
    pub components: Vec<Vec<u32>>,
    pub component_of: Vec<u32>,
    /// Successor components per component, deduplicated.
    pub successors: Vec<Vec<u32>>,
    pub edge_count: usize,
}

impl DependencyDag {
    pub fn proxy_components(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.components.iter().filter(|c| c.len() >= 2)
    }
}

/// Builds the graph of dependee edges (`i -> j` for `j` in `dependees[i]`)
/// plus tree edges (`parent -> child`) and contracts its strongly connected
/// components.
pub fn build_dependency_graph(n: usize, dependees: &[Vec<u32>], parents: &[u32]) -> DependencyDag {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, n);
    for _ in 0..n {
        g.add_node(());
    }
    let mut edge_count = 0;
    for (i, deps) in dependees.iter().enumerate() {
        for &j in deps {
            g.add_edge(NodeIndex::new(i), NodeIndex::new(j as usize), ());
            edge_count += 1;
        }
    }
    for (c, &p) in parents.iter().enumerate() {
        if p != NONE_U32 {
            g.add_edge(NodeIndex::new(p as usize), NodeIndex::new(c), ());
        }
    }
    let mut components: Vec<Vec<u32>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<u32> = c.into_iter().map(|ix| ix.index() as u32).collect();
            v.sort_unstable();
            v
        })
        .collect();
    // tarjan_scc yields sinks first; keep that order but make it independent
    // of graph internals by construction (it is deterministic for a given
    // insertion order).
    let mut component_of = vec![0u32; n];
    for (ci, c) in components.iter().enumerate() {
        for &m in c {
            component_of[m as usize] = ci as u32;
        }
    }
    let successors = components
        .iter_mut()
        .enumerate()
        .map(|(ci, c)| {
            let mut s: Vec<u32> = c
                .iter()
                .flat_map(|&m| g.neighbors(NodeIndex::new(m as usize)))
                .map(|ix| component_of[ix.index()])
                .filter(|&sc| sc != ci as u32)
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    DependencyDag { components, component_of, successors, edge_count }
}

/// Pre-evaluated per-point terms.
#[derive(Debug, Clone, PartialEq)]
pub struct StarTerms {
    pub e_star: Vec<f32>,
    pub d_star: Vec<f32>,
    /// Proxy index per point, `NONE_U32` when the point stands alone.
    pub proxy_of: Vec<u32>,
    pub proxies: Vec<ProxyPoint>,
}

pub fn compute_star_terms(dag: &DependencyDag, table: &PointTable) -> Result<StarTerms, Error> {
    let n = table.len();
    let nc = dag.components.len();
    let mut comp_e = vec![0f32; nc];
    let mut comp_d = vec![0f32; nc];
    let mut comp_pos = vec![WorldPoint::default(); nc];
    let mut done = vec![false; nc];
    let mut out = StarTerms {
        e_star: vec![0.0; n],
        d_star: vec![0.0; n],
        proxy_of: vec![NONE_U32; n],
        proxies: Vec::new(),
    };
    for (ci, members) in dag.components.iter().enumerate() {
        let pos = if members.len() == 1 {
            table.positions[members[0] as usize]
        } else {
            let k = members.len() as f64;
            let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &m| {
                let p = table.positions[m as usize];
                (sx + p.x, sy + p.y)
            });
            WorldPoint::new(sx / k, sy / k)
        };
        let mut e = f64::NEG_INFINITY;
        let mut d: f64 = 0.0;
        for &m in members {
            e = e.max(table.saturated_error[m as usize]);
            d = d.max(pos.distance(&table.positions[m as usize]) + table.d_max_hat[m as usize]);
        }
        for &s in &dag.successors[ci] {
            if !done[s as usize] {
                return Err(Error::CycleDetected);
            }
            e = e.max(comp_e[s as usize] as f64);
            d = d.max(pos.distance(&comp_pos[s as usize]) + comp_d[s as usize] as f64);
        }
        comp_e[ci] = round_up_f32(e);
        comp_d[ci] = round_up_f32(d);
        comp_pos[ci] = pos;
        done[ci] = true;
        for &m in members {
            out.e_star[m as usize] = comp_e[ci];
            out.d_star[m as usize] = comp_d[ci];
        }
        if members.len() >= 2 {
            let pi = out.proxies.len() as u32;
            for &m in members {
                out.proxy_of[m as usize] = pi;
            }
            out.proxies.push(ProxyPoint { members: members.clone(), position: pos, e_star: comp_e[ci], d_star: comp_d[ci] });
        }
    }
    Ok(out)
}

/// The pre-evaluated exclusion rule: excluded iff `e* <= factor · ε(d - d*)`
/// with `d` the eye distance to the evaluation position.
pub fn is_excluded(e_star: f32, d_star: f32, eval_pos: &WorldPoint, camera: &CameraPose, policy: &ThresholdPolicy, factor: f64) -> bool {
    let d = eye_distance(camera, eval_pos);
    let eps = policy.epsilon(d - d_star as f64);
    let th = if factor == 1.0 { eps } else { factor * eps };
    !(e_star as f64 > th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SourcePolyline;
    use std::collections::BTreeSet;

    fn trees(lines: &[&[(f64, f64)]]) -> Vec<RefinementTree> {
        let mut off = 0;
        lines
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let l = SourcePolyline::new(c.iter().map(|&p| p.into()).collect(), 0).unwrap();
                let t = RefinementTree::build(&l, i as u32, off).saturated();
                off += c.len() as u32;
                t
            })
            .collect()
    }

    /// Two-line intersection scene: removing p1, p2 of the upper line drops
    /// its chord through the spike p5 of the lower line.
    pub(crate) const POKE_A: [(f64, f64); 4] = [(0.0, 0.0), (4.0, 6.0), (7.0, 4.0), (10.0, 0.0)];
    pub(crate) const POKE_B: [(f64, f64); 3] = [(4.0, -10.0), (5.0, 2.0), (6.0, -10.0)];

    #[test]
    fn root_depends_on_poking_neighbor() {
        let ts = trees(&[&POKE_A, &POKE_B]);
        let tbl = PointTable::from_trees(&ts);
        let deps = find_all_dependees(&tbl);
        // Global ids: A = 0..4, B = 4..7; p5 is global 5.
        assert_eq!(ts[0].root, Some(1));
        assert!(deps[1].contains(&5));
        assert!(deps[4].is_empty() && deps[5].is_empty() && deps[6].is_empty());
    }

    #[test]
    fn isolated_and_parallel_lines_have_no_dependees() {
        let ts = trees(&[&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0)], &[(0.0, 100.0), (1.0, 101.0), (2.0, 100.0), (3.0, 101.0)]]);
        let tbl = PointTable::from_trees(&ts);
        assert!(find_all_dependees(&tbl).iter().all(|d| d.is_empty()));
    }

    #[test]
    fn dependee_search_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let lines: Vec<Vec<(f64, f64)>> = (0..30)
            .map(|_| {
                let (x, y) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
                (0..rng.gen_range(2..9)).map(|i| (x + i as f64 * 3.0, y + rng.gen_range(-6.0..6.0))).collect()
            })
            .collect();
        let refs: Vec<&[(f64, f64)]> = lines.iter().map(|l| l.as_slice()).collect();
        let ts = trees(&refs);
        let tbl = PointTable::from_trees(&ts);
        let fast = find_all_dependees(&tbl);
        for i in 0..tbl.len() as u32 {
            let (l, r) = tbl.baseline[i as usize];
            let mut brute = Vec::new();
            if l != NONE_U32 {
                let (a, p, b) = (tbl.positions[l as usize], tbl.positions[i as usize], tbl.positions[r as usize]);
                for j in 0..tbl.len() as u32 {
                    let q = tbl.positions[j as usize];
                    if j != i && !tbl.is_descendant(j, i) && q != a && q != b && orient(&a, &p, &b) != 0.0 && point_in_triangle(&q, &a, &p, &b) {
                        brute.push(j);
                    }
                }
            }
            assert_eq!(fast[i as usize], brute, "point {i}");
        }
    }

    fn dag(n: usize, edges: &[(u32, u32)]) -> DependencyDag {
        let mut deps = vec![Vec::new(); n];
        for &(a, b) in edges {
            deps[a as usize].push(b);
        }
        build_dependency_graph(n, &deps, &vec![NONE_U32; n])
    }

    #[test]
    fn acyclic_nesting_has_no_proxies() {
        // p1 -> p5, p1 -> p8, p8 -> p11
        let d = dag(12, &[(1, 5), (1, 8), (8, 11)]);
        assert_eq!(d.proxy_components().count(), 0);
        assert_eq!(d.components.len(), 12);
        let pos = |p: u32| d.component_of[p as usize];
        assert!(pos(5) < pos(1) && pos(8) < pos(1) && pos(11) < pos(8));
    }

    #[test]
    fn two_cycle_becomes_one_proxy() {
        let d = dag(3, &[(0, 1), (1, 0)]);
        let proxies: Vec<_> = d.proxy_components().collect();
        assert_eq!(proxies, vec![&vec![0, 1]]);
    }

    #[test]
    fn overlapping_cycles_merge() {
        let d = dag(4, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        let proxies: Vec<_> = d.proxy_components().cloned().collect();
        assert_eq!(proxies, vec![vec![0, 1, 2]]);
    }

    fn flat_table(pos: &[(f64, f64)], e_hat: &[f64], d_hat: &[f64]) -> PointTable {
        let n = pos.len();
        PointTable {
            positions: pos.iter().map(|&p| p.into()).collect(),
            polyline: (0..n as u32).collect(),
            saturated_error: e_hat.to_vec(),
            d_max_hat: d_hat.to_vec(),
            baseline: vec![(NONE_U32, NONE_U32); n],
            parent: vec![NONE_U32; n],
        }
    }

    #[test]
    fn isolated_point_keeps_tree_terms() {
        let tbl = flat_table(&[(0.0, 0.0)], &[2.5], &[4.0]);
        let st = compute_star_terms(&dag(1, &[]), &tbl).unwrap();
        assert_eq!(st.e_star, vec![2.5]);
        assert_eq!(st.d_star, vec![4.0]);
    }

    #[test]
    fn chain_hand_expansion() {
        // i -> j, ê_j > ê_i: e*_i = ê_j, d*_i = |ij| + d̂_j.
        let tbl = flat_table(&[(0.0, 0.0), (3.0, 4.0)], &[1.0, 7.0], &[0.5, 2.0]);
        let st = compute_star_terms(&dag(2, &[(0, 1)]), &tbl).unwrap();
        assert_eq!(st.e_star[0], 7.0);
        assert_eq!(st.d_star[0], 7.0);
        assert_eq!((st.e_star[1], st.d_star[1]), (7.0, 2.0));
    }

    #[test]
    fn proxy_shares_terms_at_mean_position() {
        let tbl = flat_table(&[(0.0, 0.0), (2.0, 0.0), (10.0, 0.0)], &[1.0, 3.0, 0.5], &[0.0, 1.0, 0.0]);
        let st = compute_star_terms(&dag(3, &[(0, 1), (1, 0), (2, 0)]), &tbl).unwrap();
        assert_eq!(st.proxies.len(), 1);
        let p = &st.proxies[0];
        assert_eq!(p.members, vec![0, 1]);
        assert_eq!(p.position, WorldPoint::new(1.0, 0.0));
        assert_eq!(p.e_star, 3.0);
        // |P p1| + d̂_1 = 1 + 1
        assert_eq!(p.d_star, 2.0);
        assert_eq!((st.e_star[0], st.e_star[1]), (3.0, 3.0));
        // Point 2 depends on the proxy: |(10,0) (1,0)| + 2.
        assert_eq!(st.e_star[2], 3.0);
        assert_eq!(st.d_star[2], 11.0);
        assert_eq!(st.proxy_of, vec![0, 0, NONE_U32]);
    }

    #[test]
    fn star_terms_match_transitive_closure() {
        // Random DAG over a random point set against explicit closure.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 15;
            let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0))).collect();
            let e: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let mut edges = Vec::new();
            for i in 0..n as u32 {
                for j in i + 1..n as u32 {
                    if rng.gen_bool(0.15) {
                        edges.push((i, j));
                    }
                }
            }
            let tbl = flat_table(&pos, &e, &d);
            let st = compute_star_terms(&dag(n, &edges), &tbl).unwrap();
            // Closure oracle: e* is the max over reachable ê; d* is the
            // longest weighted path plus the endpoint's d̂.
            for i in 0..n {
                let mut best_e = e[i];
                let mut best_d = d[i];
                let mut stack = vec![(i, 0.0f64)];
                while let Some((u, len)) = stack.pop() {
                    best_e = best_e.max(e[u]);
                    best_d = best_d.max(len + d[u]);
                    for &(a, b) in &edges {
                        if a as usize == u {
                            let w = tbl.positions[u].distance(&tbl.positions[b as usize]);
                            stack.push((b as usize, len + w));
                        }
                    }
                }
                assert_eq!(st.e_star[i], round_up_f32(best_e));
                assert!(st.d_star[i] as f64 >= best_d && (st.d_star[i] as f64 - best_d) < 1e-4, "{i}: {} vs {best_d}", st.d_star[i]);
            }
        }
    }

    #[test]
    fn rounding_is_upward() {
        for x in [0.1f64, 1.0 / 3.0, 18.9, 1e-30, 123456.789] {
            assert!(round_up_f32(x) as f64 >= x);
        }
        assert_eq!(round_up_f32(0.0), 0.0);
        assert_eq!(round_up_f32(f64::INFINITY), f32::INFINITY);
        assert_eq!(round_up_f32(2.0), 2.0);
    }

    #[test]
    fn exclusion_extremes() {
        let cam = CameraPose::nadir(0.0, 0.0, 10.0, 1.0, 100, 100);
        let p = WorldPoint::new(5.0, 5.0);
        assert!(is_excluded(3.0, 0.0, &p, &cam, &ThresholdPolicy::Constant(f64::INFINITY), 1.0));
        assert!(!is_excluded(1e-6, 0.0, &p, &cam, &ThresholdPolicy::Constant(0.0), 1.0));
        assert!(is_excluded(0.0, 0.0, &p, &cam, &ThresholdPolicy::Constant(0.0), 1.0));
    }

    #[test]
    fn farthest_dependee_alignment_matches_direct_evaluation() {
        // Camera on the axis through p_i and its dependee, beyond the dependee.
        let tbl = flat_table(&[(0.0, 0.0), (10.0, 0.0)], &[1.0, 4.0], &[0.0, 3.0]);
        let st = compute_star_terms(&dag(2, &[(0, 1)]), &tbl).unwrap();
        let policy_for = |cam: &CameraPose| ThresholdPolicy::screen(1.0, cam);
        for x in [12.0, 20.0, 40.0, 80.0, 160.0, 320.0] {
            let cam = CameraPose::nadir(x, 0.0, 1.0, 1.0, 100, 100);
            let pol = policy_for(&cam);
            let excl = is_excluded(st.e_star[0], st.d_star[0], &tbl.positions[0], &cam, &pol, 1.0);
            // Direct rule: max ê over {i, j} ≤ min ε(d_j - d̂_j).
            let direct = (0..2).map(|j| tbl.saturated_error[j]).fold(0.0, f64::max)
                <= (0..2).map(|j| pol.epsilon(eye_distance(&cam, &tbl.positions[j]) - tbl.d_max_hat[j])).fold(f64::INFINITY, f64::min);
            if excl {
                assert!(direct, "camera x={x}");
            }
        }
    }

    #[test]
    fn no_dependees_gives_empty_sets_and_tree_terms() {
        let ts = trees(&[&[(0.0, 0.0), (1.0, 3.0), (2.0, -1.0), (4.0, 4.0), (5.0, 1.0)]]);
        let tbl = PointTable::from_trees(&ts);
        let deps = find_all_dependees(&tbl);
        let d = build_dependency_graph(tbl.len(), &deps, &tbl.parent);
        let st = compute_star_terms(&d, &tbl).unwrap();
        assert!(st.proxies.is_empty());
        for i in 1..4u32 {
            let n = ts[0].node(i).unwrap();
            assert_eq!(st.e_star[i as usize], round_up_f32(n.saturated_error));
            assert!(st.d_star[i as usize] as f64 >= n.d_max_hat);
        }
        let members: BTreeSet<u32> = d.components.iter().flatten().copied().collect();
        assert_eq!(members.len(), tbl.len());
    }
}
