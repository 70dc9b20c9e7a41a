//! Grid-of-quadtrees segment index.
//!
//! A coarse uniform grid covers the union of all expanded segment boxes; each
//! cell owns a loose quadtree. An item sits at the deepest node whose
//! quadrant split it does not straddle, so a query only walks the single
//! root-to-leaf path containing the query point and still meets every item
//! whose expanded box contains it.
//!
//! The trees are stored flat, the way they are written to disk: a `u32` word
//! stream where each node is `[child0, child1, child2, child3, len, ids...]`,
//! children are written after their parent and missing children are
//! `NONE_U32`. Quadrant `q` has `x` half `q & 1` and `y` half `q >> 1`.

use serde::{Deserialize, Serialize};

use crate::geometry::{Rect, WorldPoint};
use crate::{par, Error, NONE_U32};

const HEADER_WORDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexConfig {
    /// Explicit grid size; derived from `target_per_cell` when absent.
    pub grid: Option<(u32, u32)>,
    pub max_depth: u32,
    /// Nodes holding more items than this are subdivided.
    pub leaf_capacity: u32,
    pub target_per_cell: u32,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self { grid: None, max_depth: 8, leaf_capacity: 16, target_per_cell: 2000 }
    }
}

impl IndexConfig {
    /// Grid size for `items` items over `bbox`.
    pub fn grid_dims(&self, bbox: &Rect, items: usize) -> (u32, u32) {
        if let Some((w, h)) = self.grid {
            return (w.max(1), h.max(1));
        }
        if bbox.is_empty() || items == 0 {
            return (1, 1);
        }
        let cells = items.div_ceil(self.target_per_cell.max(1) as usize).max(1) as f64;
        let (w, h) = (bbox.width().max(f64::MIN_POSITIVE), bbox.height().max(f64::MIN_POSITIVE));
        let aspect = (w / h).clamp(1.0 / cells, cells);
        let gw = (cells * aspect).sqrt().round().clamp(1.0, 4096.0) as u32;
        let gh = (cells / gw as f64).ceil().clamp(1.0, 4096.0) as u32;
        (gw, gh)
    }
}

/// Registration statistics of one index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexStats {
    /// Item references over all nodes; an item counts once per node.
    pub registrations: u64,
    pub nodes: u64,
    pub non_empty_cells: u64,
    pub max_cell_registrations: u64,
    /// Registrations per cell, row-major.
    pub per_cell: Vec<u64>,
    pub memory_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentIndex {
    pub bbox: Rect,
    pub grid_w: u32,
    pub grid_h: u32,
    pub max_depth: u32,
    pub leaf_capacity: u32,
    /// Root node offset per cell, row-major; `NONE_U32` for empty cells.
    pub cells: Vec<u32>,
    pub words: Vec<u32>,
}

struct TmpNode {
    ids: Vec<u32>,
    children: [Option<Box<TmpNode>>; 4],
}

fn quadrant(region: &[f64; 4], q: usize) -> [f64; 4] {
    let mx = 0.5 * (region[0] + region[2]);
    let my = 0.5 * (region[1] + region[3]);
    let (x0, x1) = if q & 1 == 0 { (region[0], mx) } else { (mx, region[2]) };
    let (y0, y1) = if q >> 1 == 0 { (region[1], my) } else { (my, region[3]) };
    [x0, y0, x1, y1]
}

fn build_node(items: Vec<(u32, Rect)>, region: [f64; 4], depth: u32, max_depth: u32, cap: usize) -> TmpNode {
    if items.len() <= cap || depth >= max_depth {
        return TmpNode { ids: items.into_iter().map(|(id, _)| id).collect(), children: Default::default() };
    }
    let mx = 0.5 * (region[0] + region[2]);
    let my = 0.5 * (region[1] + region[3]);
    let mut stay = Vec::new();
    let mut sub: [Vec<(u32, Rect)>; 4] = Default::default();
    for (id, r) in items {
        let qx = if r.max.x < mx { Some(0) } else if r.min.x >= mx { Some(1) } else { None };
        let qy = if r.max.y < my { Some(0) } else if r.min.y >= my { Some(1) } else { None };
        match (qx, qy) {
            (Some(x), Some(y)) => sub[x + 2 * y].push((id, r)),
            _ => stay.push(id),
        }
    }
    let mut children: [Option<Box<TmpNode>>; 4] = Default::default();
    for (q, items) in sub.into_iter().enumerate() {
        if !items.is_empty() {
            children[q] = Some(Box::new(build_node(items, quadrant(&region, q), depth + 1, max_depth, cap)));
        }
    }
    TmpNode { ids: stay, children }
}

fn serialize(node: &TmpNode, out: &mut Vec<u32>) -> u32 {
    let at = out.len();
    out.extend_from_slice(&[NONE_U32; 4]);
    out.push(node.ids.len() as u32);
    out.extend_from_slice(&node.ids);
    for (q, c) in node.children.iter().enumerate() {
        if let Some(c) = c {
            let off = serialize(c, out);
            out[at + q] = off;
        }
    }
    at as u32
}

impl SegmentIndex {
    /// Builds over `items` (id, expanded box). The result depends only on
    /// the input order and contents.
    pub fn build(items: &[(u32, Rect)], grid: (u32, u32), max_depth: u32, leaf_capacity: u32) -> Self {
        let (grid_w, grid_h) = (grid.0.max(1), grid.1.max(1));
        let bbox = items.iter().fold(Rect::EMPTY, |acc, (_, r)| acc.union(r));
        let ncells = (grid_w * grid_h) as usize;
        let mut idx = SegmentIndex {
            bbox,
            grid_w,
            grid_h,
            max_depth,
            leaf_capacity,
            cells: vec![NONE_U32; ncells],
            words: Vec::new(),
        };
        if items.is_empty() {
            return idx;
        }
        let mut per_cell: Vec<Vec<(u32, Rect)>> = vec![Vec::new(); ncells];
        for &(id, r) in items {
            let (x0, y0) = idx.cell_coords(&r.min);
            let (x1, y1) = idx.cell_coords(&r.max);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    per_cell[(cy * grid_w + cx) as usize].push((id, r));
                }
            }
        }
        let trees: Vec<Option<TmpNode>> = par::map_range(ncells, |c| {
            let items = &per_cell[c];
            (!items.is_empty()).then(|| {
                let region = idx.cell_region(c as u32 % grid_w, c as u32 / grid_w);
                build_node(items.clone(), region, 0, max_depth, leaf_capacity as usize)
            })
        });
        let mut words = Vec::new();
        for (c, t) in trees.iter().enumerate() {
            if let Some(t) = t {
                idx.cells[c] = serialize(t, &mut words);
            }
        }
        idx.words = words;
        idx
    }

    fn cell_size(&self) -> (f64, f64) {
        (self.bbox.width() / self.grid_w as f64, self.bbox.height() / self.grid_h as f64)
    }

    fn cell_coords(&self, p: &WorldPoint) -> (u32, u32) {
        let (cw, ch) = self.cell_size();
        let f = |v: f64, min: f64, size: f64, n: u32| -> u32 {
            if size > 0.0 {
                (((v - min) / size).floor().max(0.0) as u64).min(n as u64 - 1) as u32
            } else {
                0
            }
        };
        (f(p.x, self.bbox.min.x, cw, self.grid_w), f(p.y, self.bbox.min.y, ch, self.grid_h))
    }

    fn cell_region(&self, cx: u32, cy: u32) -> [f64; 4] {
        let (cw, ch) = self.cell_size();
        let x0 = self.bbox.min.x + cx as f64 * cw;
        let y0 = self.bbox.min.y + cy as f64 * ch;
        [x0, y0, x0 + cw, y0 + ch]
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Item ids of every node on the path to `q`, root first.
    pub fn descend(&self, q: &WorldPoint) -> Descend<'_> {
        if self.words.is_empty() || !self.bbox.contains(q) {
            return Descend { words: &self.words, node: NONE_U32, pos: 0, end: 0, region: [0.0; 4], q: *q };
        }
        let (cx, cy) = self.cell_coords(q);
        let node = self.cells[(cy * self.grid_w + cx) as usize];
        let mut d = Descend { words: &self.words, node, pos: 0, end: 0, region: self.cell_region(cx, cy), q: *q };
        d.enter();
        d
    }

    pub fn stats(&self) -> IndexStats {
        let mut per_cell = vec![0u64; self.cells.len()];
        let mut nodes = 0u64;
        for (c, &root) in self.cells.iter().enumerate() {
            let mut stack = vec![root];
            while let Some(n) = stack.pop() {
                if n == NONE_U32 {
                    continue;
                }
                let n = n as usize;
                nodes += 1;
                per_cell[c] += self.words[n + 4] as u64;
                stack.extend_from_slice(&self.words[n..n + 4]);
            }
        }
        IndexStats {
            registrations: per_cell.iter().sum(),
            nodes,
            non_empty_cells: per_cell.iter().filter(|&&c| c > 0).count() as u64,
            max_cell_registrations: per_cell.iter().copied().max().unwrap_or(0),
            per_cell,
            memory_bytes: 4 * (self.words.len() + self.cells.len()) as u64,
        }
    }

    /// Depth of the deepest node.
    pub fn depth(&self) -> u32 {
        let mut best = 0;
        for &root in &self.cells {
            let mut stack = vec![(root, 0u32)];
            while let Some((n, d)) = stack.pop() {
                if n == NONE_U32 {
                    continue;
                }
                best = best.max(d);
                for &c in &self.words[n as usize..n as usize + 4] {
                    stack.push((c, d + 1));
                }
            }
        }
        best
    }

    /// Structural checks for data read from disk: offsets in range and
    /// strictly forward, item ids below `item_count`, depth bounded.
    pub fn validate(&self, item_count: usize) -> Result<(), Error> {
        if self.cells.len() != (self.grid_w as usize) * (self.grid_h as usize) {
            return Err(Error::Corrupt("cell table size does not match grid".into()));
        }
        let n = self.words.len();
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for &root in &self.cells {
            if root != NONE_U32 {
                stack.push((root, 0));
            }
        }
        let mut visited = 0usize;
        while let Some((off, depth)) = stack.pop() {
            let o = off as usize;
            if o + HEADER_WORDS > n {
                return Err(Error::Corrupt(format!("quadtree node offset {off} out of range")));
            }
            let len = self.words[o + 4] as usize;
            if o + HEADER_WORDS + len > n {
                return Err(Error::Corrupt(format!("quadtree node at {off} overruns the word stream")));
            }
            if let Some(&bad) = self.words[o + HEADER_WORDS..o + HEADER_WORDS + len].iter().find(|&&id| id as usize >= item_count) {
                return Err(Error::Corrupt(format!("segment id {bad} out of range")));
            }
            if depth > self.max_depth {
                return Err(Error::Corrupt("quadtree deeper than its max depth".into()));
            }
            visited += 1;
            if visited > n {
                return Err(Error::Corrupt("quadtree references repeat".into()));
            }
            for &c in &self.words[o..o + 4] {
                if c != NONE_U32 {
                    if c <= off {
                        return Err(Error::Corrupt(format!("child offset {c} does not follow parent {off}")));
                    }
                    stack.push((c, depth + 1));
                }
            }
        }
        Ok(())
    }
}

/// Iterator over the items on one descent path.
pub struct Descend<'a> {
    words: &'a [u32],
    node: u32,
    pos: usize,
    end: usize,
    region: [f64; 4],
    q: WorldPoint,
}

impl Descend<'_> {
    fn enter(&mut self) {
        if self.node != NONE_U32 {
            let o = self.node as usize;
            self.pos = o + HEADER_WORDS;
            self.end = self.pos + self.words[o + 4] as usize;
        }
    }

    fn step_down(&mut self) {
        let o = self.node as usize;
        let mx = 0.5 * (self.region[0] + self.region[2]);
        let my = 0.5 * (self.region[1] + self.region[3]);
        let q = (self.q.x >= mx) as usize + 2 * (self.q.y >= my) as usize;
        self.node = self.words[o + q];
        self.region = quadrant(&self.region, q);
        self.enter();
    }
}

impl Iterator for Descend<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        loop {
            if self.node == NONE_U32 {
                return None;
            }
            if self.pos < self.end {
                self.pos += 1;
                return Some(self.words[self.pos - 1]);
            }
            self.step_down();
        }
    }
}
