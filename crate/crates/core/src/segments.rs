//! The all-possible segment set of a refinement tree.
//!
//! Inserting refinement point `n` into its baseline `(l, r)` creates the two
//! segments `(l, n)` and `(n, r)`. Together with the initial `(pB, pE)` this
//! enumerates every segment that any refinement state can draw, `2k - 3` for
//! a `k`-point polyline. Each segment records the point that creates it (the
//! generator) and the point that would subdivide it next (the splitter), so
//! its visibility can be decided without walking the tree.

use serde::{Deserialize, Serialize};

use crate::blg::RefinementTree;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    /// The initial segment, present whenever its splitter is excluded.
    None,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributedSegment {
    /// Global point id; precedes `b` in polyline order.
    pub a: u32,
    pub b: u32,
    pub generator: Generator,
    pub splitter: Option<u32>,
    pub line_type: u8,
}

impl AttributedSegment {
    pub fn generator_point(&self) -> Option<u32> {
        match self.generator {
            Generator::None => None,
            Generator::A => Some(self.a),
            Generator::B => Some(self.b),
        }
    }

    /// True for a segment between consecutive source points.
    pub fn is_original(&self) -> bool {
        self.b == self.a + 1
    }

    /// Visibility under an arbitrary inclusion predicate: the generator is
    /// included and the splitter is not.
    pub fn is_visible_with<F: Fn(u32) -> bool>(&self, included: F) -> bool {
        self.generator_point().map_or(true, &included) && !self.splitter.map_or(false, &included)
    }
}

/// Enumerates the segment set of one tree, initial segment first, then two
/// segments per node in pre-order.
pub fn extract_all_segments(tree: &RefinementTree) -> Vec<AttributedSegment> {
    let g = |local: u32| tree.global(local);
    let mut out = Vec::with_capacity(2 * tree.point_count() - 3);
    out.push(AttributedSegment {
        a: g(0),
        b: g(tree.last_local()),
        generator: Generator::None,
        splitter: tree.root.map(g),
        line_type: tree.line_type,
    });
    for &id in tree.preorder() {
        let n = tree.node(id).expect("preorder lists interior points");
        let (l, r) = n.baseline;
        out.push(AttributedSegment {
            a: g(l),
            b: g(id),
            generator: Generator::B,
            splitter: n.left.map(g),
            line_type: tree.line_type,
        });
        out.push(AttributedSegment {
            a: g(id),
            b: g(r),
            generator: Generator::A,
            splitter: n.right.map(g),
            line_type: tree.line_type,
        });
    }
    out
}

/// Cardinality of the segment set of a `k`-point polyline.
pub fn segment_count(k: usize) -> Result<usize, Error> {
    if k < 2 {
        return Err(Error::InvalidPolyline(format!("{k} points")));
    }
    Ok(2 * k - 3)
}

/// Dataset-level identity: `S` original segments over `L` polylines give
/// `2S - L` all-possible segments.
pub fn total_segment_count(original_segments: u64, polylines: u64) -> u64 {
    2 * original_segments - polylines
}
