//! Sketch graph data model: typed primitives, subreferences and undirected
//! constraints, plus validation, normalization, tokens and JSONL I/O.

mod jsonl;
mod normalize;
mod tokens;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{circumcircle, Point2, V2};
use crate::SketchError;

pub use jsonl::{read_sketches, to_json_line, SketchReader};
pub use normalize::{bounding_box, normalize, BBox, CANVAS_MARGIN};
pub use tokens::{
    dequantize, detokenize, quantize, tokenize, TokenRow, TokenSequence, NO_PRIMITIVE, N_BINS,
    PAD_TOKEN,
};
pub use validate::{validate, Violation};

/// Maximum number of primitives per sketch (and rows per token sequence).
pub const MAX_PRIMITIVES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Arc,
    Circle,
    Line,
    Point,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 4] = [Self::Arc, Self::Circle, Self::Line, Self::Point];

    /// Number of continuous parameters of this kind.
    pub const fn param_count(self) -> usize {
        match self {
            Self::Arc => 6,
            Self::Circle => 3,
            Self::Line => 4,
            Self::Point => 2,
        }
    }

    /// Type token `t¹` (1..=4; 5 is "no primitive").
    pub const fn token(self) -> u8 {
        match self {
            Self::Arc => 1,
            Self::Circle => 2,
            Self::Line => 3,
            Self::Point => 4,
        }
    }

    pub fn from_token(t: u8) -> Option<Self> {
        match t {
            1 => Some(Self::Arc),
            2 => Some(Self::Circle),
            3 => Some(Self::Line),
            4 => Some(Self::Point),
            _ => None,
        }
    }

    /// Subreferences a constraint may attach to on this kind.
    pub const fn valid_subrefs(self) -> &'static [u8] {
        match self {
            Self::Arc => &[1, 2, 3, 4],
            Self::Circle => &[2, 3],
            Self::Line => &[1, 2, 4],
            Self::Point => &[4],
        }
    }

    /// Subreferences that resolve to a single point.
    pub const fn point_subrefs(self) -> &'static [u8] {
        match self {
            Self::Arc => &[1, 2, 3],
            Self::Circle => &[2],
            Self::Line => &[1, 2],
            Self::Point => &[4],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Arc => "arc",
            Self::Circle => "circle",
            Self::Line => "line",
            Self::Point => "point",
        }
    }
}

/// Index into a primitive's attachment points, 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subref(pub u8);

impl Subref {
    pub fn is_valid_for(self, kind: PrimitiveKind) -> bool {
        kind.valid_subrefs().contains(&self.0)
    }
}

impl fmt::Display for Subref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a subreference resolves to on a concrete primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubrefTarget {
    Point(Point2),
    Whole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub params: Vec<f64>,
    #[serde(default)]
    pub construction: bool,
}

impl Primitive {
    pub fn line(s: Point2, e: Point2) -> Self {
        Self::new(PrimitiveKind::Line, vec![s.x, s.y, e.x, e.y])
    }

    pub fn circle(c: Point2, r: f64) -> Self {
        Self::new(PrimitiveKind::Circle, vec![c.x, c.y, r])
    }

    pub fn arc(s: Point2, m: Point2, e: Point2) -> Self {
        Self::new(PrimitiveKind::Arc, vec![s.x, s.y, m.x, m.y, e.x, e.y])
    }

    pub fn point(p: Point2) -> Self {
        Self::new(PrimitiveKind::Point, vec![p.x, p.y])
    }

    pub fn new(kind: PrimitiveKind, params: Vec<f64>) -> Self {
        Self {
            kind,
            params,
            construction: false,
        }
    }

    pub fn with_construction(mut self, construction: bool) -> Self {
        self.construction = construction;
        self
    }

    fn pt(&self, at: usize) -> Point2 {
        Point2::new(self.params[at], self.params[at + 1])
    }

    /// Resolve a subreference.
    ///
    /// Arc: 1 start, 2 mid, 3 end, 4 whole. Line: 1 start, 2 end, 4 whole.
    /// Circle: 2 center, 3 whole. Point: 4 the point itself.
    pub fn subref_point(&self, s: Subref) -> Result<SubrefTarget, SketchError> {
        use PrimitiveKind::*;
        if self.params.len() != self.kind.param_count() {
            return Err(SketchError::ParamCount {
                kind: self.kind,
                got: self.params.len(),
            });
        }
        let target = match (self.kind, s.0) {
            (Arc, 1) | (Line, 1) => SubrefTarget::Point(self.pt(0)),
            (Arc, 2) => SubrefTarget::Point(self.pt(2)),
            (Arc, 3) => SubrefTarget::Point(self.pt(4)),
            (Line, 2) => SubrefTarget::Point(self.pt(2)),
            (Circle, 2) | (Point, 4) => SubrefTarget::Point(self.pt(0)),
            (Arc, 4) | (Line, 4) | (Circle, 3) => SubrefTarget::Whole,
            _ => {
                return Err(SketchError::InvalidSubref {
                    kind: self.kind,
                    subref: s.0,
                })
            }
        };
        Ok(target)
    }

    /// Parameter offset of the x coordinate for a point-valued subref.
    pub fn subref_param_offset(&self, s: Subref) -> Option<usize> {
        use PrimitiveKind::*;
        match (self.kind, s.0) {
            (Arc, 1) | (Line, 1) | (Circle, 2) | (Point, 4) => Some(0),
            (Arc, 2) | (Line, 2) => Some(2),
            (Arc, 3) => Some(4),
            _ => None,
        }
    }

    /// Characteristic size used to scale perturbations: line length, curve
    /// diameter, zero for points.
    pub fn extent(&self) -> f64 {
        match self.kind {
            PrimitiveKind::Line => self.pt(0).distance(self.pt(2)),
            PrimitiveKind::Circle => 2.0 * self.params[2],
            PrimitiveKind::Arc => arc_center(self).map(|(_, r)| 2.0 * r).unwrap_or(0.0),
            PrimitiveKind::Point => 0.0,
        }
    }

    /// Apply `f` to every point stored in the parameters (not radii).
    pub fn map_points(&self, mut f: impl FnMut(Point2) -> Point2) -> Primitive {
        let mut out = self.clone();
        let n_points = match self.kind {
            PrimitiveKind::Arc => 3,
            PrimitiveKind::Line => 2,
            PrimitiveKind::Circle | PrimitiveKind::Point => 1,
        };
        for k in 0..n_points {
            let p = f(self.pt(2 * k));
            out.params[2 * k] = p.x;
            out.params[2 * k + 1] = p.y;
        }
        out
    }
}

/// Circumcenter and radius of an arc's three defining points.
pub fn arc_center(a: &Primitive) -> Result<(Point2, f64), SketchError> {
    if a.kind != PrimitiveKind::Arc || a.params.len() != 6 {
        return Err(SketchError::NotAnArc);
    }
    let p = |k: usize| V2::<f64>::new(a.params[k], a.params[k + 1]);
    circumcircle(p(0), p(2), p(4))
        .map(|(c, r)| (c.value(), r))
        .ok_or(SketchError::CollinearArc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Coincident,
    Concentric,
    Equal,
    Fix,
    Horizontal,
    Midpoint,
    Normal,
    Offset,
    Parallel,
    Perpendicular,
    Quadrant,
    Tangent,
    Vertical,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 13] = [
        Self::Coincident,
        Self::Concentric,
        Self::Equal,
        Self::Fix,
        Self::Horizontal,
        Self::Midpoint,
        Self::Normal,
        Self::Offset,
        Self::Parallel,
        Self::Perpendicular,
        Self::Quadrant,
        Self::Tangent,
        Self::Vertical,
    ];

    /// Zero-based class index; index 13 is the empty class.
    pub fn class_index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).unwrap()
    }
}

/// Undirected edge `{(i, si), (j, sj)}` stored in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawConstraint")]
pub struct Constraint {
    pub i: usize,
    pub si: Subref,
    pub j: usize,
    pub sj: Subref,
    pub kind: ConstraintKind,
    pub datum: Option<f64>,
}

#[derive(Deserialize)]
struct RawConstraint {
    i: usize,
    si: Subref,
    j: usize,
    sj: Subref,
    kind: ConstraintKind,
    #[serde(default)]
    datum: Option<f64>,
}

impl From<RawConstraint> for Constraint {
    fn from(r: RawConstraint) -> Self {
        Constraint::new(r.kind, (r.i, r.si.0), (r.j, r.sj.0)).with_datum(r.datum)
    }
}

impl Constraint {
    pub fn new(kind: ConstraintKind, a: (usize, u8), b: (usize, u8)) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Self {
            i: a.0,
            si: Subref(a.1),
            j: b.0,
            sj: Subref(b.1),
            kind,
            datum: None,
        }
    }

    pub fn with_datum(mut self, datum: Option<f64>) -> Self {
        self.datum = datum;
        self
    }

    pub fn is_canonical(&self) -> bool {
        (self.i, self.si) <= (self.j, self.sj)
    }

    /// Identity ignoring the datum.
    pub fn key(&self) -> (usize, u8, usize, u8, ConstraintKind) {
        (self.i, self.si.0, self.j, self.sj.0, self.kind)
    }

    pub fn endpoints(&self) -> [(usize, Subref); 2] {
        [(self.i, self.si), (self.j, self.sj)]
    }
}

/// A sketch: ordered primitives and the constraints between them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SketchGraph {
    pub primitives: Vec<Primitive>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl SketchGraph {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        Self {
            primitives,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, p: Primitive) -> usize {
        self.primitives.push(p);
        self.primitives.len() - 1
    }

    /// Add a constraint unless an identical canonical edge is present.
    /// Returns whether it was inserted.
    pub fn constrain(&mut self, c: Constraint) -> bool {
        if self.constraints.iter().any(|o| o.key() == c.key()) {
            return false;
        }
        self.constraints.push(c);
        true
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.constrain(c);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// All parameters concatenated in primitive order.
    pub fn flat_params(&self) -> Vec<f64> {
        self.primitives
            .iter()
            .flat_map(|p| p.params.iter().copied())
            .collect()
    }

    /// Largest absolute parameter difference against another sketch with the
    /// same primitive layout; infinity if layouts differ.
    pub fn max_param_delta(&self, other: &SketchGraph) -> f64 {
        let a = self.flat_params();
        let b = other.flat_params();
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}
