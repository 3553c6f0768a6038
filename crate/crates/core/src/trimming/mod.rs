//! Implicit trimming boundaries, element classification and slicing.

mod boundary;
mod classify;
mod roots;

pub use boundary::{KeepSide, Shape, TrimmingBoundary};
pub use classify::{
    active_index_set, classify, classify_box, eps_geo, slice, ElementClassification, ElementLabel,
    SliceResult,
};
pub use roots::{bracketed_root, intersect_segment, SegmentRoots, SCAN_INTERVALS};
