use thiserror::Error;

use crate::sketch::{ConstraintKind, PrimitiveKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SketchError {
    #[error("{} expects {} parameters, got {got}", kind.name(), kind.param_count())]
    ParamCount { kind: PrimitiveKind, got: usize },
    #[error("subreference {subref} is not valid for a {}", kind.name())]
    InvalidSubref { kind: PrimitiveKind, subref: u8 },
    #[error("primitive is not an arc")]
    NotAnArc,
    #[error("arc points are collinear")]
    CollinearArc,
    #[error("sketch has zero extent")]
    Degenerate,
    #[error("{0} primitives exceeds the 16-primitive limit")]
    TooManyPrimitives(usize),
    #[error("token sequence must have 16 rows, got {0}")]
    RowCount(usize),
    #[error("token row {row}: {detail}")]
    BadToken { row: usize, detail: String },
    #[error("sketch is invalid: {0}")]
    Invalid(String),
    #[error("read error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("constraint {index} ({kind:?}) is undefined here: {reason}")]
    Unsupported {
        index: usize,
        kind: ConstraintKind,
        reason: String,
    },
    #[error("pin on primitive {primitive}: {reason}")]
    BadPin { primitive: usize, reason: String },
    #[error("non-finite residual at the initial point")]
    NonFinite,
    #[error("constraints are not satisfied (max residual {0:e})")]
    Unsatisfied(f64),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}
