//! View-dependent polyline level of detail.
//!
//! Source polylines are turned into Douglas-Peucker refinement trees, whose
//! every reachable refinement state is flattened into a set of individually
//! testable attributed segments. At run time each segment's visibility is a
//! pair of per-point threshold tests, so any view-dependent simplification can
//! be rendered by a deferred per-pixel rasterizer that only ever looks at the
//! segments near the pixel.
//!
//! Module map:
//! - [`geometry`]: points, cameras, line types and planar primitives.
//! - [`blg`]: refinement trees, saturation and the reference traversal.
//! - [`segments`]: the all-possible segment set with generator/splitter.
//! - [`deps`]: dependee detection, proxy contraction and star terms.
//! - [`index`]: grid-of-quadtrees segment index.
//! - [`visibility`]: threshold policies, lenses and runtime visibility.
//! - [`raster`]: the deferred per-pixel renderer.
//! - [`artifact`]: ingestion, the preprocessing pipeline and the `.lcx` format.
//! - [`bench`]: experiment modes and frame statistics.

pub mod artifact;
pub mod bench;
pub mod blg;
pub mod deps;
pub mod geometry;
pub mod index;
mod par;
pub mod raster;
pub mod segments;
pub mod visibility;

use std::fmt;

pub use artifact::{Dataset, PreprocessConfig, PreprocessStats};
pub use geometry::{CameraPose, LineType, Rect, SourcePolyline, WorldPoint};
pub use visibility::{Lens, ThresholdPolicy};

/// Sentinel for "no point" / "no node" in packed `u32` fields.
pub const NONE_U32: u32 = u32::MAX;

#[derive(Debug)]
pub enum Error {
    InvalidPolyline(String),
    InvalidCamera(String),
    InvalidFrame(String),
    DegenerateGeometry(String),
    /// Malformed or unreadable input file.
    Parse(String),
    BadMagic([u8; 4]),
    UnsupportedVersion(u32),
    Truncated { needed: usize, available: usize },
    /// An index inside a loaded artifact points outside its table.
    Corrupt(String),
    /// A dependency cycle survived proxy contraction.
    CycleDetected,
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPolyline(m) => write!(f, "invalid polyline: {m}"),
            Error::InvalidCamera(m) => write!(f, "invalid camera: {m}"),
            Error::InvalidFrame(m) => write!(f, "invalid frame: {m}"),
            Error::DegenerateGeometry(m) => write!(f, "degenerate geometry: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::BadMagic(m) => write!(f, "bad magic {:?}, expected \"LCX1\"", String::from_utf8_lossy(m)),
            Error::UnsupportedVersion(v) => write!(f, "unsupported artifact version {v}"),
            Error::Truncated { needed, available } => {
                write!(f, "truncated artifact: needed {needed} bytes, {available} available")
            }
            Error::Corrupt(m) => write!(f, "corrupt artifact: {m}"),
            Error::CycleDetected => write!(f, "dependency cycle remained after proxy contraction"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
