//! Constrained CAD sketch processing.
//!
//! - [`sketch`]: sketch graphs, validation, normalization, tokens, JSONL
//! - [`solver`]: residual constraint systems, Levenberg–Marquardt, DOF
//! - [`cpt`]: constraint-preserving transformations and baseline augmentations
//! - [`raster`]: binary rendering and hand-drawn style rendering
//! - [`metrics`]: Hungarian matching, Acc, PF1, CF1, Chamfer distance
//! - [`scaffold`]: valid subreference pairs, pair features and the set loss

// `!(x <= tol)` is deliberate: NaN must fail every tolerance check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod geom;

pub mod cpt;
pub mod metrics;
pub mod raster;
pub mod scaffold;
pub mod sketch;
pub mod solver;

pub use error::{SketchError, SolverError};
pub use geom::Point2;
pub use sketch::{Constraint, ConstraintKind, Primitive, PrimitiveKind, SketchGraph, Subref};
