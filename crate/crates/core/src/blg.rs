//! Binary line generalization trees.
//!
//! Douglas-Peucker refinement of one polyline recorded as a binary tree over
//! its interior points. Each node's subtree spans exactly the points strictly
//! between its baseline endpoints, so node `i` is stored at slot `i - 1` and
//! every structural query is index arithmetic.

use crate::geometry::{distance_point_to_line, eye_distance, CameraPose, SourcePolyline, WorldPoint};
use crate::visibility::ThresholdPolicy;

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementNode {
    /// Local index of the refinement point within its polyline.
    pub point: u32,
    /// Distance to the baseline this point splits.
    pub error: f64,
    /// Maximum error over the subtree rooted here.
    pub saturated_error: f64,
    /// Largest distance to any descendant.
    pub d_max: f64,
    /// Conservative distance bound: the longest descending tree path from
    /// this node, so `d_max_hat(n) >= |n c| + d_max_hat(c)` for every child.
    pub d_max_hat: f64,
    pub left: Option<u32>,
    pub right: Option<u32>,
    pub parent: Option<u32>,
    pub baseline: (u32, u32),
}

impl RefinementNode {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none() && self.right.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTree {
    pub polyline_id: u32,
    /// Global id of local point 0.
    pub offset: u32,
    pub line_type: u8,
    pub points: Vec<WorldPoint>,
    pub root: Option<u32>,
    /// `nodes[i - 1]` is the node of interior point `i`.
    nodes: Vec<RefinementNode>,
    /// Node points in construction order; every node precedes its descendants.
    order: Vec<u32>,
    saturated: bool,
}

fn baseline_error(p: &WorldPoint, a: &WorldPoint, b: &WorldPoint) -> f64 {
    // Closed rings bring both baseline ends onto one spot; measure from it.
    distance_point_to_line(p, a, b).unwrap_or_else(|_| p.distance(a))
}

impl RefinementTree {
    /// Recursive Douglas-Peucker construction. Ties on the maximum baseline
    /// distance go to the lower index.
    pub fn build(line: &SourcePolyline, polyline_id: u32, offset: u32) -> Self {
        let pts = &line.points;
        let k = pts.len();
        let mut nodes = vec![
            RefinementNode {
                point: 0,
                error: 0.0,
                saturated_error: 0.0,
                d_max: 0.0,
                d_max_hat: 0.0,
                left: None,
                right: None,
                parent: None,
                baseline: (0, 0),
            };
            k.saturating_sub(2)
        ];
        let mut order = Vec::with_capacity(k.saturating_sub(2));
        let mut root = None;
        // (baseline left, baseline right, parent, is right child)
        let mut stack: Vec<(usize, usize, Option<u32>, bool)> = Vec::new();
        if k >= 3 {
            stack.push((0, k - 1, None, false));
        }
        while let Some((l, r, parent, is_right)) = stack.pop() {
            if r - l < 2 {
                continue;
            }
            let (a, b) = (&pts[l], &pts[r]);
            let mut best = l + 1;
            let mut best_err = baseline_error(&pts[best], a, b);
            for i in l + 2..r {
                let e = baseline_error(&pts[i], a, b);
                if e > best_err {
                    best = i;
                    best_err = e;
                }
            }
            let id = best as u32;
            let node = &mut nodes[best - 1];
            node.point = id;
            node.error = best_err;
            node.parent = parent;
            node.baseline = (l as u32, r as u32);
            match parent {
                None => root = Some(id),
                Some(p) if is_right => nodes[p as usize - 1].right = Some(id),
                Some(p) => nodes[p as usize - 1].left = Some(id),
            }
            order.push(id);
            stack.push((best, r, Some(id), true));
            stack.push((l, best, Some(id), false));
        }
        Self {
            polyline_id,
            offset,
            line_type: line.line_type,
            points: pts.clone(),
            root,
            nodes,
            order,
            saturated: false,
        }
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// The node of interior point `local`, if it is interior.
    pub fn node(&self, local: u32) -> Option<&RefinementNode> {
        if local == 0 {
            return None;
        }
        self.nodes.get(local as usize - 1)
    }

    pub fn nodes(&self) -> &[RefinementNode] {
        &self.nodes
    }

    /// Node points, parents before children.
    pub fn preorder(&self) -> &[u32] {
        &self.order
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn global(&self, local: u32) -> u32 {
        self.offset + local
    }

    pub fn last_local(&self) -> u32 {
        self.points.len() as u32 - 1
    }

    /// Whether `desc` lies in the subtree strictly below `anc` (local ids).
    pub fn is_descendant(&self, desc: u32, anc: u32) -> bool {
        match self.node(anc) {
            Some(n) => desc != anc && desc > n.baseline.0 && desc < n.baseline.1,
            None => false,
        }
    }

    /// Bottom-up propagation of errors and distance bounds.
    pub fn saturate(&mut self) {
        for &id in self.order.iter().rev() {
            let n = &self.nodes[id as usize - 1];
            let (l, r) = n.baseline;
            let p = self.points[id as usize];
            let mut sat = n.error;
            let mut d_hat: f64 = 0.0;
            for c in [n.left, n.right].into_iter().flatten() {
                let child = &self.nodes[c as usize - 1];
                sat = sat.max(child.saturated_error);
                d_hat = d_hat.max(p.distance(&self.points[c as usize]) + child.d_max_hat);
            }
            let d_max = (l + 1..r)
                .filter(|&j| j != id)
                .map(|j| p.distance(&self.points[j as usize]))
                .fold(0.0, f64::max);
            let n = &mut self.nodes[id as usize - 1];
            n.saturated_error = sat;
            n.d_max = d_max;
            n.d_max_hat = d_hat.max(d_max);
        }
        self.saturated = true;
    }

    pub fn saturated(mut self) -> Self {
        self.saturate();
        self
    }

    /// In-order traversal that descends into a subtree only when its root
    /// passes `include`. Returns global point ids from `pB` to `pE`.
    pub fn traverse_with_threshold<F>(&self, include: F) -> Vec<u32>
    where
        F: Fn(&RefinementNode) -> bool,
    {
        let mut chain = vec![self.offset];
        let mut stack: Vec<u32> = Vec::new();
        let mut cur = self.root.filter(|&r| include(&self.nodes[r as usize - 1]));
        loop {
            while let Some(c) = cur {
                stack.push(c);
                cur = self.nodes[c as usize - 1]
                    .left
                    .filter(|&l| include(&self.nodes[l as usize - 1]));
            }
            match stack.pop() {
                Some(n) => {
                    chain.push(self.global(n));
                    cur = self.nodes[n as usize - 1]
                        .right
                        .filter(|&r| include(&self.nodes[r as usize - 1]));
                }
                None => break,
            }
        }
        chain.push(self.global(self.last_local()));
        chain
    }

    /// The saturated view-dependent test `ê > ε(d − d̂max)` applied during a
    /// stopping traversal. Golden reference for the segment-based runtime.
    pub fn reference_simplify(&self, camera: &CameraPose, policy: &ThresholdPolicy) -> Vec<u32> {
        debug_assert!(self.saturated, "reference_simplify on an unsaturated tree");
        self.traverse_with_threshold(|n| {
            let d = eye_distance(camera, &self.points[n.point as usize]);
            n.saturated_error > policy.epsilon(d - n.d_max_hat)
        })
    }
}
