//! Ingestion, the preprocessing pipeline and the `.lcx` artifact.
//!
//! The pipeline turns source polylines into the flat arrays the renderer
//! needs: per-point `(x, y, e*, d*)` records, the attributed segment list,
//! proxy points and four segment indexes (all-possible or original segments,
//! each with static or dynamic maximum widths).
//!
//! # File layout
//!
//! Little-endian throughout. A 128-byte header:
//!
//! ```text
//! magic "LCX1" | version u32 | pointCount u64 | segmentCount u64
//! bbox minX minY maxX maxY f64 | gridW u32 | gridH u32 | styleTableOffset u64
//! originalCount u64 | proxyCount u64
//! pointsOffset | segmentsOffset | originalsOffset | proxiesOffset | indexesOffset (u64 each)
//! ```
//!
//! followed by the sections:
//!
//! - points: `x f64, y f64, e* f32, d* f32`
//! - segments: `a u32, b u32, splitter u32 (0xFFFFFFFF = none), packed u32`
//!   with bit 0 = generator is `b`, bit 1 = no generator, bits 2..=9 = line type
//! - originals: `u32` ids of segments joining consecutive points
//! - proxies: `x f64, y f64, memberCount u32, members u32...`
//! - indexes, four times (all/static, all/dynamic, original/static,
//!   original/dynamic): `kind u32, bbox 4×f64, gridW u32, gridH u32,
//!   maxDepth u32, leafCapacity u32, cells u32[gridW·gridH], wordCount u64,
//!   words u32[wordCount]`
//! - style table: `length u64` then that many bytes of JSON
//!
//! Polyline boundaries are not stored: each polyline's segments are
//! contiguous and start with its generator-less initial segment.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blg::RefinementTree;
use crate::deps::{build_dependency_graph, compute_star_terms, find_all_dependees, PointTable};
use crate::geometry::{Rect, SourcePolyline, WorldPoint};
use crate::index::{IndexConfig, SegmentIndex};
use crate::raster::{resolve_styles, ResolvedStyle, StyleConfig};
use crate::segments::{extract_all_segments, AttributedSegment, Generator};
use crate::{par, Error, NONE_U32};

pub const MAGIC: [u8; 4] = *b"LCX1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub position: WorldPoint,
    pub e_star: f32,
    pub d_star: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyRecord {
    pub position: WorldPoint,
    pub members: Vec<u32>,
}

/// Where one polyline lives in the point and segment arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineSpan {
    pub first_point: u32,
    pub point_count: u32,
    pub first_segment: u32,
    pub line_type: u8,
    pub bbox: Rect,
}

impl PolylineSpan {
    pub fn segment_count(&self) -> u32 {
        2 * self.point_count - 3
    }

    pub fn segment_range(&self) -> std::ops::Range<usize> {
        self.first_segment as usize..(self.first_segment + self.segment_count()) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    pub all_static: SegmentIndex,
    pub all_dynamic: SegmentIndex,
    pub original_static: SegmentIndex,
    pub original_dynamic: SegmentIndex,
}

impl IndexSet {
    pub fn get(&self, all_segments: bool, dynamic: bool) -> &SegmentIndex {
        match (all_segments, dynamic) {
            (true, false) => &self.all_static,
            (true, true) => &self.all_dynamic,
            (false, false) => &self.original_static,
            (false, true) => &self.original_dynamic,
        }
    }

    fn in_file_order(&self) -> [&SegmentIndex; 4] {
        [&self.all_static, &self.all_dynamic, &self.original_static, &self.original_dynamic]
    }
}

/// A preprocessed, immutable dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Bounding box of all points.
    pub bbox: Rect,
    pub points: Vec<PointRecord>,
    pub segments: Vec<AttributedSegment>,
    /// Ids of segments joining consecutive source points.
    pub original_segments: Vec<u32>,
    pub proxies: Vec<ProxyRecord>,
    pub styles: StyleConfig,
    pub indexes: IndexSet,
    proxy_of: Vec<u32>,
    polylines: Vec<PolylineSpan>,
    resolved: Vec<Option<ResolvedStyle>>,
}

impl Dataset {
    /// Assembles a dataset and derives the polyline table, checking every
    /// cross reference.
    pub fn from_parts(
        points: Vec<PointRecord>,
        segments: Vec<AttributedSegment>,
        original_segments: Vec<u32>,
        proxies: Vec<ProxyRecord>,
        styles: StyleConfig,
        indexes: IndexSet,
    ) -> Result<Self, Error> {
        styles.validate()?;
        let n = points.len();
        let bbox = Rect::from_points(points.iter().map(|p| &p.position));
        if let Some(i) = points.iter().position(|p| !p.position.is_finite() || p.e_star.is_nan() || !(p.d_star >= 0.0)) {
            return Err(Error::Corrupt(format!("point {i} has invalid values")));
        }
        let resolved = resolve_styles(&styles);
        let mut polylines = Vec::new();
        let mut s = 0usize;
        let mut next_point = 0u32;
        while s < segments.len() {
            let head = &segments[s];
            if head.generator != Generator::None || head.a != next_point || head.b as usize >= n || head.b <= head.a {
                return Err(Error::Corrupt(format!("segment {s} does not start a polyline at point {next_point}")));
            }
            let k = head.b - head.a + 1;
            let span = PolylineSpan {
                first_point: head.a,
                point_count: k,
                first_segment: s as u32,
                line_type: head.line_type,
                bbox: Rect::from_points(points[head.a as usize..=head.b as usize].iter().map(|p| &p.position)),
            };
            if span.segment_range().end > segments.len() {
                return Err(Error::Corrupt(format!("polyline at segment {s} is cut short")));
            }
            for (j, seg) in segments[span.segment_range()].iter().enumerate() {
                let id = s + j;
                let inside = seg.a >= head.a && seg.b <= head.b && seg.a < seg.b;
                let gen_ok = (j == 0) == (seg.generator == Generator::None);
                let split_ok = seg.splitter.map_or(true, |sp| sp > seg.a && sp < seg.b);
                if !inside || !gen_ok || !split_ok || seg.line_type != head.line_type {
                    return Err(Error::Corrupt(format!("segment {id} is inconsistent with its polyline")));
                }
            }
            if resolved[head.line_type as usize].is_none() {
                return Err(Error::Corrupt(format!("line type {} has no style", head.line_type)));
            }
            next_point = head.b + 1;
            s = span.segment_range().end;
            polylines.push(span);
        }
        if next_point as usize != n {
            return Err(Error::Corrupt(format!("{} points not covered by any polyline", n - next_point as usize)));
        }
        if let Some(&o) = original_segments.iter().find(|&&o| o as usize >= segments.len() || !segments[o as usize].is_original()) {
            return Err(Error::Corrupt(format!("original segment list holds non-original id {o}")));
        }
        let mut proxy_of = vec![NONE_U32; n];
        for (pi, p) in proxies.iter().enumerate() {
            if p.members.len() < 2 || !p.position.is_finite() {
                return Err(Error::Corrupt(format!("proxy {pi} is malformed")));
            }
            for &m in &p.members {
                if m as usize >= n || proxy_of[m as usize] != NONE_U32 {
                    return Err(Error::Corrupt(format!("proxy {pi} member {m} out of range or shared")));
                }
                proxy_of[m as usize] = pi as u32;
            }
        }
        for idx in indexes.in_file_order() {
            idx.validate(segments.len())?;
        }
        Ok(Self { bbox, points, segments, original_segments, proxies, styles, indexes, proxy_of, polylines, resolved })
    }

    pub fn polylines(&self) -> &[PolylineSpan] {
        &self.polylines
    }

    pub fn proxy_of(&self, id: u32) -> u32 {
        self.proxy_of[id as usize]
    }

    pub fn style(&self, line_type: u8) -> Option<&ResolvedStyle> {
        self.resolved[line_type as usize].as_ref()
    }

    pub fn grid_dims(&self) -> (u32, u32) {
        (self.indexes.all_static.grid_w, self.indexes.all_static.grid_h)
    }

    /// Number of source segments (`S`).
    pub fn original_segment_count(&self) -> usize {
        self.original_segments.len()
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN
            + 24 * self.points.len()
            + 16 * self.segments.len()
            + 4 * self.original_segments.len()
            + self.proxies.iter().map(|p| 20 + 4 * p.members.len()).sum::<usize>()
            + self.indexes.in_file_order().iter().map(|i| 60 + 4 * (i.cells.len() + i.words.len())).sum::<usize>()
            + 8
            + self.styles.to_json().len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter(Vec::with_capacity(self.encoded_len()));
        let (gw, gh) = self.grid_dims();
        let style_json = self.styles.to_json();
        let points_off = HEADER_LEN as u64;
        let segments_off = points_off + 24 * self.points.len() as u64;
        let originals_off = segments_off + 16 * self.segments.len() as u64;
        let proxies_off = originals_off + 4 * self.original_segments.len() as u64;
        let indexes_off = proxies_off + self.proxies.iter().map(|p| 20 + 4 * p.members.len() as u64).sum::<u64>();
        let style_off = self.encoded_len() as u64 - 8 - style_json.len() as u64;

        w.bytes(&MAGIC);
        w.u32(VERSION);
        w.u64(self.points.len() as u64);
        w.u64(self.segments.len() as u64);
        w.rect(&self.bbox);
        w.u32(gw);
        w.u32(gh);
        w.u64(style_off);
        w.u64(self.original_segments.len() as u64);
        w.u64(self.proxies.len() as u64);
        for off in [points_off, segments_off, originals_off, proxies_off, indexes_off] {
            w.u64(off);
        }
        debug_assert_eq!(w.0.len(), HEADER_LEN);
        for p in &self.points {
            w.f64(p.position.x);
            w.f64(p.position.y);
            w.f32(p.e_star);
            w.f32(p.d_star);
        }
        for s in &self.segments {
            w.u32(s.a);
            w.u32(s.b);
            w.u32(s.splitter.unwrap_or(NONE_U32));
            let gen = match s.generator {
                Generator::A => 0,
                Generator::B => 1,
                Generator::None => 2,
            };
            w.u32(gen | (s.line_type as u32) << 2);
        }
        for &o in &self.original_segments {
            w.u32(o);
        }
        for p in &self.proxies {
            w.f64(p.position.x);
            w.f64(p.position.y);
            w.u32(p.members.len() as u32);
            for &m in &p.members {
                w.u32(m);
            }
        }
        for (kind, idx) in self.indexes.in_file_order().iter().enumerate() {
            w.u32(kind as u32);
            w.rect(&idx.bbox);
            w.u32(idx.grid_w);
            w.u32(idx.grid_h);
            w.u32(idx.max_depth);
            w.u32(idx.leaf_capacity);
            for &c in &idx.cells {
                w.u32(c);
            }
            w.u64(idx.words.len() as u64);
            for &x in &idx.words {
                w.u32(x);
            }
        }
        debug_assert_eq!(w.0.len() as u64, style_off);
        w.u64(style_json.len() as u64);
        w.bytes(style_json.as_bytes());
        debug_assert_eq!(w.0.len(), self.encoded_len());
        w.0
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), Error> {
        out.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Parses and validates an artifact. Nothing is returned unless every
    /// section reads completely and all references are in range.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = ByteReader { buf: bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let n_points = r.u64()?;
        let n_segments = r.u64()?;
        let _bbox = r.rect()?;
        let (gw, gh) = (r.u32()?, r.u32()?);
        let style_off = r.u64()?;
        let n_originals = r.u64()?;
        let n_proxies = r.u64()?;
        let offs: Vec<u64> = (0..5).map(|_| r.u64()).collect::<Result<_, _>>()?;

        r.seek(offs[0])?;
        r.need(n_points, 24)?;
        let mut points = Vec::with_capacity(n_points as usize);
        for _ in 0..n_points {
            let (x, y) = (r.f64()?, r.f64()?);
            points.push(PointRecord { position: WorldPoint::new(x, y), e_star: r.f32()?, d_star: r.f32()? });
        }

        r.seek(offs[1])?;
        r.need(n_segments, 16)?;
        let mut segments = Vec::with_capacity(n_segments as usize);
        for i in 0..n_segments {
            let (a, b, sp, packed) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
            let generator = match packed & 3 {
                0 => Generator::A,
                1 => Generator::B,
                2 => Generator::None,
                _ => return Err(Error::Corrupt(format!("segment {i} has both generator bits set"))),
            };
            if packed >> 10 != 0 {
                return Err(Error::Corrupt(format!("segment {i} has unknown flag bits")));
            }
            if a as u64 >= n_points || b as u64 >= n_points || (sp != NONE_U32 && sp as u64 >= n_points) {
                return Err(Error::Corrupt(format!("segment {i} references a point out of range")));
            }
            segments.push(AttributedSegment {
                a,
                b,
                generator,
                splitter: (sp != NONE_U32).then_some(sp),
                line_type: (packed >> 2) as u8,
            });
        }

        r.seek(offs[2])?;
        r.need(n_originals, 4)?;
        let original_segments = (0..n_originals).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;

        r.seek(offs[3])?;
        r.need(n_proxies, 20)?;
        let mut proxies = Vec::with_capacity(n_proxies as usize);
        for _ in 0..n_proxies {
            let (x, y) = (r.f64()?, r.f64()?);
            let m = r.u32()? as u64;
            r.need(m, 4)?;
            let members = (0..m).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            proxies.push(ProxyRecord { position: WorldPoint::new(x, y), members });
        }

        r.seek(offs[4])?;
        let mut read_index = |expect: u32| -> Result<SegmentIndex, Error> {
            let kind = r.u32()?;
            if kind != expect {
                return Err(Error::Corrupt(format!("index section {expect} has kind {kind}")));
            }
            let bbox = r.rect()?;
            let (w, h, max_depth, leaf_capacity) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
            if (w, h) != (gw, gh) {
                return Err(Error::Corrupt("index grid differs from header grid".into()));
            }
            let ncells = w as u64 * h as u64;
            r.need(ncells, 4)?;
            let cells = (0..ncells).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            let nw = r.u64()?;
            r.need(nw, 4)?;
            let words = (0..nw).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            Ok(SegmentIndex { bbox, grid_w: w, grid_h: h, max_depth, leaf_capacity, cells, words })
        };
        let indexes = IndexSet {
            all_static: read_index(0)?,
            all_dynamic: read_index(1)?,
            original_static: read_index(2)?,
            original_dynamic: read_index(3)?,
        };

        r.seek(style_off)?;
        let len = r.u64()?;
        r.need(len, 1)?;
        let text = std::str::from_utf8(r.take(len as usize)?).map_err(|_| Error::Corrupt("style table is not UTF-8".into()))?;
        let styles = StyleConfig::from_json(text).map_err(|e| Error::Corrupt(e.to_string()))?;
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Dataset::from_parts(points, segments, original_segments, proxies, styles, indexes)
    }
}

struct ByteWriter(Vec<u8>);

impl ByteWriter {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f32) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn rect(&mut self, r: &Rect) {
        for v in [r.min.x, r.min.y, r.max.x, r.max.y] {
            self.f64(v);
        }
    }
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], Error> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(Error::Truncated { needed: self.pos + n, available: self.buf.len() });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    /// Fails early, before allocating, when `count` records of `size` bytes
    /// cannot fit in the rest of the buffer.
    fn need(&self, count: u64, size: u64) -> Result<(), Error> {
        let available = (self.buf.len() - self.pos) as u64;
        match count.checked_mul(size) {
            Some(n) if n <= available => Ok(()),
            _ => Err(Error::Truncated {
                needed: self.pos.saturating_add(count.saturating_mul(size).min(usize::MAX as u64) as usize),
                available: self.buf.len(),
            }),
        }
    }
    fn seek(&mut self, off: u64) -> Result<(), Error> {
        if off > self.buf.len() as u64 {
            return Err(Error::Truncated { needed: off as usize, available: self.buf.len() });
        }
        if (off as usize) < self.pos {
            return Err(Error::Corrupt(format!("section offset {off} overlaps earlier data")));
        }
        self.pos = off as usize;
        Ok(())
    }
    fn u32(&mut self) -> Result<u32, Error> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, Error> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32, Error> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, Error> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn rect(&mut self) -> Result<Rect, Error> {
        let (a, b, c, d) = (self.f64()?, self.f64()?, self.f64()?, self.f64()?);
        Ok(Rect::new(WorldPoint::new(a, b), WorldPoint::new(c, d)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PreprocessConfig {
    pub index: IndexConfig,
    /// Intersection-avoidance dependencies. When off, only tree ordering
    /// constrains inclusion.
    pub dependencies: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { index: IndexConfig::default(), dependencies: true }
    }
}

/// Dataset counts in the style of a dataset table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PreprocessStats {
    pub polylines: u64,
    pub points: u64,
    /// Source segments, `S`.
    pub segs: u64,
    /// All-possible segments, `2S - L`.
    pub ap_segs: u64,
    /// Index registrations of all-possible segments at static width.
    pub qt_segs: u64,
    /// The same with dynamic maximum widths.
    pub dt_qt_segs: u64,
    pub original_qt_segs: u64,
    pub original_dt_qt_segs: u64,
    pub dependee_edges: u64,
    pub proxies: u64,
    pub proxy_members: u64,
    pub grid_w: u32,
    pub grid_h: u32,
    pub max_depth: u32,
    pub leaf_capacity: u32,
    pub bytes: u64,
}

impl PreprocessStats {
    pub fn of(ds: &Dataset, dependee_edges: u64) -> Self {
        let (grid_w, grid_h) = ds.grid_dims();
        Self {
            polylines: ds.polylines().len() as u64,
            points: ds.points.len() as u64,
            segs: ds.original_segments.len() as u64,
            ap_segs: ds.segments.len() as u64,
            qt_segs: ds.indexes.all_static.stats().registrations,
            dt_qt_segs: ds.indexes.all_dynamic.stats().registrations,
            original_qt_segs: ds.indexes.original_static.stats().registrations,
            original_dt_qt_segs: ds.indexes.original_dynamic.stats().registrations,
            dependee_edges,
            proxies: ds.proxies.len() as u64,
            proxy_members: ds.proxies.iter().map(|p| p.members.len() as u64).sum(),
            grid_w,
            grid_h,
            max_depth: ds.indexes.all_static.max_depth,
            leaf_capacity: ds.indexes.all_static.leaf_capacity,
            bytes: ds.encoded_len() as u64,
        }
    }
}

/// Runs the whole pipeline: trees, saturation, segment extraction,
/// dependees, proxies and star terms, and the four indexes.
pub fn preprocess(polylines: &[SourcePolyline], styles: &StyleConfig, config: &PreprocessConfig) -> Result<(Dataset, PreprocessStats), Error> {
    styles.validate()?;
    if let Some(l) = polylines.iter().find(|l| styles.get(l.line_type).is_none()) {
        return Err(Error::InvalidPolyline(format!("line type {} is not defined in the style table", l.line_type)));
    }
    let total: usize = polylines.iter().map(|l| l.len()).sum();
    if total >= NONE_U32 as usize {
        return Err(Error::InvalidPolyline(format!("{total} points exceed the u32 id space")));
    }
    let mut offsets = Vec::with_capacity(polylines.len());
    let mut off = 0u32;
    for l in polylines {
        offsets.push(off);
        off += l.len() as u32;
    }
    let ids: Vec<usize> = (0..polylines.len()).collect();
    let trees: Vec<RefinementTree> = par::map_slice(&ids, |&i| RefinementTree::build(&polylines[i], i as u32, offsets[i]).saturated());

    let per_tree: Vec<Vec<AttributedSegment>> = par::map_slice(&trees, extract_all_segments);
    let mut segments = Vec::with_capacity(per_tree.iter().map(|s| s.len()).sum());
    for s in per_tree {
        segments.extend(s);
    }
    let original_segments: Vec<u32> = (0..segments.len() as u32).filter(|&i| segments[i as usize].is_original()).collect();

    let table = PointTable::from_trees(&trees);
    let dependees = if config.dependencies { find_all_dependees(&table) } else { vec![Vec::new(); table.len()] };
    let dependee_edges = dependees.iter().map(|d| d.len() as u64).sum();
    let dag = build_dependency_graph(table.len(), &dependees, &table.parent);
    let star = compute_star_terms(&dag, &table)?;

    let points: Vec<PointRecord> = (0..table.len())
        .map(|i| PointRecord { position: table.positions[i], e_star: star.e_star[i], d_star: star.d_star[i] })
        .collect();
    let proxies: Vec<ProxyRecord> = star.proxies.iter().map(|p| ProxyRecord { position: p.position, members: p.members.clone() }).collect();

    let indexes = build_indexes(&points, &segments, &original_segments, styles, &config.index);
    let ds = Dataset::from_parts(points, segments, original_segments, proxies, styles.clone(), indexes)?;
    let stats = PreprocessStats::of(&ds, dependee_edges);
    Ok((ds, stats))
}

fn build_indexes(points: &[PointRecord], segments: &[AttributedSegment], originals: &[u32], styles: &StyleConfig, cfg: &IndexConfig) -> IndexSet {
    let half = |dynamic: bool| -> Vec<f64> {
        let mut hw = vec![0.0; 256];
        for s in &styles.line_types {
            hw[s.id as usize] = 0.5 * s.line_type().max_width(dynamic);
        }
        hw
    };
    let (hs, hd) = (half(false), half(true));
    let bbox = Rect::from_points(points.iter().map(|p| &p.position));
    let grid = cfg.grid_dims(&bbox, segments.len());
    let boxes = |ids: &mut dyn Iterator<Item = u32>, hw: &[f64]| -> Vec<(u32, Rect)> {
        ids.map(|i| {
            let s = &segments[i as usize];
            let r = Rect::from_points([&points[s.a as usize].position, &points[s.b as usize].position]);
            (i, r.expand(hw[s.line_type as usize]))
        })
        .collect()
    };
    let build = |items: Vec<(u32, Rect)>| SegmentIndex::build(&items, grid, cfg.max_depth, cfg.leaf_capacity);
    IndexSet {
        all_static: build(boxes(&mut (0..segments.len() as u32), &hs)),
        all_dynamic: build(boxes(&mut (0..segments.len() as u32), &hd)),
        original_static: build(boxes(&mut originals.iter().copied(), &hs)),
        original_dynamic: build(boxes(&mut originals.iter().copied(), &hd)),
    }
}

/// Polylines read from GeoJSON plus what had to be left out.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub polylines: Vec<SourcePolyline>,
    /// Lines with fewer than two distinct points.
    pub dropped_degenerate: usize,
    /// Features whose geometry is not a line.
    pub skipped_geometries: usize,
    /// Consecutive duplicate vertices removed.
    pub collapsed_duplicates: usize,
}

/// Reads `LineString` and `MultiLineString` geometries from a GeoJSON
/// `FeatureCollection`, `Feature` or bare geometry. A feature's `type`
/// property selects its line type.
pub fn ingest_geojson(text: &str) -> Result<Ingested, Error> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("geojson: {e}")))?;
    let mut out = Ingested::default();
    match v.get("type").and_then(|t| t.as_str()) {
        Some("FeatureCollection") => {
            let feats = v.get("features").and_then(|f| f.as_array()).ok_or_else(|| Error::Parse("geojson: FeatureCollection without features".into()))?;
            for (i, f) in feats.iter().enumerate() {
                ingest_feature(f, i, &mut out)?;
            }
        }
        Some("Feature") => ingest_feature(&v, 0, &mut out)?,
        Some(_) => ingest_geometry(&v, 0, 0, &mut out)?,
        None => return Err(Error::Parse("geojson: missing \"type\"".into())),
    }
    Ok(out)
}

fn ingest_feature(f: &serde_json::Value, i: usize, out: &mut Ingested) -> Result<(), Error> {
    let line_type = match f.get("properties").and_then(|p| p.get("type")) {
        None | Some(serde_json::Value::Null) => 0,
        Some(t) => t
            .as_u64()
            .filter(|&t| t <= u8::MAX as u64)
            .ok_or_else(|| Error::Parse(format!("geojson: feature {i} has line type {t}, expected an integer 0..=255")))? as u8,
    };
    match f.get("geometry") {
        None | Some(serde_json::Value::Null) => {
            out.skipped_geometries += 1;
            Ok(())
        }
        Some(g) => ingest_geometry(g, i, line_type, out),
    }
}

fn ingest_geometry(g: &serde_json::Value, i: usize, line_type: u8, out: &mut Ingested) -> Result<(), Error> {
    let coords = g.get("coordinates");
    match g.get("type").and_then(|t| t.as_str()) {
        Some("LineString") => {
            let c = coords.ok_or_else(|| Error::Parse(format!("geojson: feature {i} LineString without coordinates")))?;
            push_line(c, i, line_type, out)
        }
        Some("MultiLineString") => {
            let parts = coords.and_then(|c| c.as_array()).ok_or_else(|| Error::Parse(format!("geojson: feature {i} MultiLineString without coordinates")))?;
            for p in parts {
                push_line(p, i, line_type, out)?;
            }
            Ok(())
        }
        Some(_) => {
            out.skipped_geometries += 1;
            Ok(())
        }
        None => Err(Error::Parse(format!("geojson: feature {i} geometry without type"))),
    }
}

fn push_line(c: &serde_json::Value, i: usize, line_type: u8, out: &mut Ingested) -> Result<(), Error> {
    let arr = c.as_array().ok_or_else(|| Error::Parse(format!("geojson: feature {i} coordinates are not an array")))?;
    let mut pts: Vec<WorldPoint> = Vec::with_capacity(arr.len());
    for p in arr {
        let xy = p
            .as_array()
            .filter(|a| a.len() >= 2)
            .and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)))
            .ok_or_else(|| Error::Parse(format!("geojson: feature {i} has a malformed position {p}")))?;
        let wp = WorldPoint::from(xy);
        if !wp.is_finite() {
            return Err(Error::Parse(format!("geojson: feature {i} has a non-finite coordinate")));
        }
        if pts.last() == Some(&wp) {
            out.collapsed_duplicates += 1;
            continue;
        }
        pts.push(wp);
    }
    if pts.len() < 2 {
        out.dropped_degenerate += 1;
        return Ok(());
    }
    out.polylines.push(SourcePolyline::new(pts, line_type)?);
    Ok(())
}
