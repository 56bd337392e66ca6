use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{arc_center, PrimitiveKind, SketchGraph, MAX_PRIMITIVES};

/// One broken invariant, with the primitive or constraint it was found on.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    TooManyPrimitives { count: usize },
    ParamCount { primitive: usize, expected: usize, got: usize },
    NonFinite { primitive: usize },
    OutOfCanvas { primitive: usize, value: f64 },
    NonPositiveRadius { primitive: usize, radius: f64 },
    CollinearArc { primitive: usize },
    ZeroLengthLine { primitive: usize },
    IndexOutOfRange { constraint: usize, index: usize },
    InvalidSubref { constraint: usize, primitive: usize, kind: PrimitiveKind, subref: u8 },
    NotCanonical { constraint: usize },
    DuplicateConstraint { constraint: usize },
    NonFiniteDatum { constraint: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooManyPrimitives { count } => {
                write!(f, "{count} primitives exceeds the limit of {MAX_PRIMITIVES}")
            }
            Self::ParamCount { primitive, expected, got } => write!(
                f,
                "primitive {primitive}: expected {expected} parameters, got {got}"
            ),
            Self::NonFinite { primitive } => write!(f, "primitive {primitive}: non-finite parameter"),
            Self::OutOfCanvas { primitive, value } => {
                write!(f, "primitive {primitive}: parameter {value} outside [0, 1]")
            }
            Self::NonPositiveRadius { primitive, radius } => {
                write!(f, "primitive {primitive}: radius {radius} is not positive")
            }
            Self::CollinearArc { primitive } => write!(f, "primitive {primitive}: arc points are collinear"),
            Self::ZeroLengthLine { primitive } => write!(f, "primitive {primitive}: line has zero length"),
            Self::IndexOutOfRange { constraint, index } => {
                write!(f, "constraint {constraint}: primitive index {index} out of range")
            }
            Self::InvalidSubref { constraint, primitive, kind, subref } => write!(
                f,
                "constraint {constraint}: subreference {subref} is invalid for {} primitive {primitive}",
                kind.name()
            ),
            Self::NotCanonical { constraint } => {
                write!(f, "constraint {constraint}: endpoints not in canonical order")
            }
            Self::DuplicateConstraint { constraint } => {
                write!(f, "constraint {constraint}: duplicate of an earlier constraint")
            }
            Self::NonFiniteDatum { constraint } => write!(f, "constraint {constraint}: non-finite datum"),
        }
    }
}

/// Check every structural and geometric invariant; an empty list means valid.
pub fn validate(sketch: &SketchGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if sketch.primitives.len() > MAX_PRIMITIVES {
        out.push(Violation::TooManyPrimitives { count: sketch.primitives.len() });
    }
    for (idx, p) in sketch.primitives.iter().enumerate() {
        let expected = p.kind.param_count();
        if p.params.len() != expected {
            out.push(Violation::ParamCount { primitive: idx, expected, got: p.params.len() });
            continue;
        }
        if p.params.iter().any(|v| !v.is_finite()) {
            out.push(Violation::NonFinite { primitive: idx });
            continue;
        }
        if let Some(&value) = p.params.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            out.push(Violation::OutOfCanvas { primitive: idx, value });
        }
        match p.kind {
            PrimitiveKind::Circle if p.params[2] <= 0.0 => {
                out.push(Violation::NonPositiveRadius { primitive: idx, radius: p.params[2] })
            }
            PrimitiveKind::Arc if arc_center(p).is_err() => {
                out.push(Violation::CollinearArc { primitive: idx })
            }
            PrimitiveKind::Line if p.params[0] == p.params[2] && p.params[1] == p.params[3] => {
                out.push(Violation::ZeroLengthLine { primitive: idx })
            }
            _ => {}
        }
    }

    let mut seen = HashSet::new();
    for (ci, c) in sketch.constraints.iter().enumerate() {
        let mut in_range = true;
        for (index, s) in c.endpoints() {
            match sketch.primitives.get(index) {
                None => {
                    in_range = false;
                    out.push(Violation::IndexOutOfRange { constraint: ci, index });
                }
                Some(p) if !s.is_valid_for(p.kind) => out.push(Violation::InvalidSubref {
                    constraint: ci,
                    primitive: index,
                    kind: p.kind,
                    subref: s.0,
                }),
                Some(_) => {}
            }
        }
        if in_range && !c.is_canonical() {
            out.push(Violation::NotCanonical { constraint: ci });
        }
        if c.datum.is_some_and(|d| !d.is_finite()) {
            out.push(Violation::NonFiniteDatum { constraint: ci });
        }
        let key = {
            let [a, b] = c.endpoints();
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            (a, b, c.kind)
        };
        if !seen.insert(key) {
            out.push(Violation::DuplicateConstraint { constraint: ci });
        }
    }
    out
}
