//! Convex minorant trees of Brownian-type paths, their fragmentation and cut
//! tree, and the Prim-order representation of minimum spanning trees on the
//! complete graph with uniform weights.

// `!(x > 0.0)` also rejects NaN; matrix code indexes both ways
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cmt;
pub mod convexmin;
pub mod discrete;
pub mod error;
pub mod fmt;
pub mod frag;
pub mod paths;
pub mod rng;
pub mod verify;

pub use cmt::{Cutoff, RecursionTree, UniformAssignment};
pub use convexmin::{ConvexMinorant, Face};
pub use discrete::{MergeRecord, PrimResult, Weights};
pub use error::{Error, Result};
pub use frag::{CutData, MergeEvent, ZeroSet};
pub use paths::{Noise, PathKind, PathSample};
pub use rng::RngKey;
pub use verify::StatReport;
