//! Residual catalog. Every term reads primitive parameters from the flat
//! variable vector through a getter, so the same code serves plain
//! evaluation and dual-number differentiation.

use crate::geom::{circumcircle, signed_line_distance, Point2, Real, V2};
use crate::sketch::{Constraint, ConstraintKind, Primitive, PrimitiveKind, SubrefTarget};
use crate::SolverError;

/// A curve's center and radius as read from the variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveRef {
    /// `x, y, r` at offset.
    Circle(usize),
    /// Three points at offset; center via circumcircle.
    Arc(usize),
    /// A bare point acting as a center with zero radius.
    Point(usize),
}

impl CurveRef {
    fn of(p: &Primitive, off: usize) -> Option<Self> {
        match p.kind {
            PrimitiveKind::Circle => Some(Self::Circle(off)),
            PrimitiveKind::Arc => Some(Self::Arc(off)),
            _ => None,
        }
    }

    fn vars(&self) -> std::ops::Range<usize> {
        match *self {
            Self::Circle(o) => o..o + 3,
            Self::Arc(o) => o..o + 6,
            Self::Point(o) => o..o + 2,
        }
    }

    fn eval<T: Real>(&self, x: &impl Fn(usize) -> T) -> (V2<T>, T) {
        match *self {
            Self::Circle(o) => (V2::new(x(o), x(o + 1)), x(o + 2)),
            Self::Point(o) => (V2::new(x(o), x(o + 1)), T::cst(0.0)),
            Self::Arc(o) => {
                let p = |k: usize| V2::new(x(o + k), x(o + k + 1));
                match circumcircle(p(0), p(2), p(4)) {
                    Some(cr) => cr,
                    None => {
                        let nan = T::cst(f64::NAN);
                        (V2::new(nan, nan), nan)
                    }
                }
            }
        }
    }
}

/// One residual block's formula. Offsets index the flat variable vector:
/// points are `(o, o + 1)`, lines are `(o..o + 4)` start then end.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    PointsCoincide { a: usize, b: usize },
    PointOnLine { p: usize, line: usize },
    PointOnCurve { p: usize, curve: CurveRef },
    Concentric { a: CurveRef, b: CurveRef },
    EqualLength { a: usize, b: usize },
    EqualRadius { a: CurveRef, b: CurveRef },
    FixPoint { p: usize, at: Point2 },
    FixParams { off: usize, values: Vec<f64> },
    HorizontalLine { line: usize },
    HorizontalPoints { a: usize, b: usize },
    VerticalLine { line: usize },
    VerticalPoints { a: usize, b: usize },
    Midpoint { p: usize, line: usize },
    Parallel { a: usize, b: usize },
    Perpendicular { a: usize, b: usize },
    Normal { line: usize, curve: CurveRef },
    TangentLine { line: usize, curve: CurveRef },
    TangentCurves { a: CurveRef, b: CurveRef, internal: bool },
    Offset { a: usize, b: usize, distance: f64 },
    Quadrant { p: usize, curve: CurveRef, dir: (f64, f64) },
    Pin { p: usize, target: Point2 },
}

fn pt<T: Real>(x: &impl Fn(usize) -> T, o: usize) -> V2<T> {
    V2::new(x(o), x(o + 1))
}

fn line<T: Real>(x: &impl Fn(usize) -> T, o: usize) -> (V2<T>, V2<T>) {
    (pt(x, o), pt(x, o + 2))
}

impl Term {
    /// Flat variable indices the term depends on (may repeat).
    pub fn vars(&self) -> Vec<usize> {
        use Term::*;
        let p2 = |o: usize| o..o + 2;
        let l4 = |o: usize| o..o + 4;
        let mut v: Vec<usize> = match self {
            PointsCoincide { a, b } | HorizontalPoints { a, b } | VerticalPoints { a, b } => {
                p2(*a).chain(p2(*b)).collect()
            }
            PointOnLine { p, line } | Midpoint { p, line } => p2(*p).chain(l4(*line)).collect(),
            PointOnCurve { p, curve } | Quadrant { p, curve, .. } => p2(*p).chain(curve.vars()).collect(),
            Concentric { a, b } | EqualRadius { a, b } | TangentCurves { a, b, .. } => {
                a.vars().chain(b.vars()).collect()
            }
            EqualLength { a, b } | Parallel { a, b } | Perpendicular { a, b } | Offset { a, b, .. } => {
                l4(*a).chain(l4(*b)).collect()
            }
            FixPoint { p, .. } | Pin { p, .. } => p2(*p).collect(),
            FixParams { off, values } => (*off..*off + values.len()).collect(),
            HorizontalLine { line } | VerticalLine { line } => l4(*line).collect(),
            Normal { line, curve } | TangentLine { line, curve } => l4(*line).chain(curve.vars()).collect(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn eval<T: Real>(&self, x: &impl Fn(usize) -> T, out: &mut Vec<T>) {
        use Term::*;
        match self {
            PointsCoincide { a, b } => {
                let d = pt(x, *a).sub(pt(x, *b));
                out.extend([d.x, d.y]);
            }
            PointOnLine { p, line: l } => {
                let (s, e) = line(x, *l);
                out.push(signed_line_distance(pt(x, *p), s, e));
            }
            PointOnCurve { p, curve } => {
                let (c, r) = curve.eval(x);
                out.push(pt(x, *p).sub(c).norm() - r);
            }
            Concentric { a, b } => {
                let d = a.eval(x).0.sub(b.eval(x).0);
                out.extend([d.x, d.y]);
            }
            EqualLength { a, b } => {
                let (sa, ea) = line(x, *a);
                let (sb, eb) = line(x, *b);
                out.push(ea.sub(sa).norm() - eb.sub(sb).norm());
            }
            EqualRadius { a, b } => out.push(a.eval(x).1 - b.eval(x).1),
            FixPoint { p, at } => {
                let d = pt(x, *p).sub(V2::from_point(*at));
                out.extend([d.x, d.y]);
            }
            FixParams { off, values } => {
                out.extend(values.iter().enumerate().map(|(k, &v)| x(off + k) - T::cst(v)));
            }
            HorizontalLine { line: l } => out.push(x(l + 1) - x(l + 3)),
            VerticalLine { line: l } => out.push(x(*l) - x(l + 2)),
            HorizontalPoints { a, b } => out.push(x(a + 1) - x(b + 1)),
            VerticalPoints { a, b } => out.push(x(*a) - x(*b)),
            Midpoint { p, line: l } => {
                let (s, e) = line(x, *l);
                let m = s.add(e).scale(T::cst(0.5));
                let d = pt(x, *p).sub(m);
                out.extend([d.x, d.y]);
            }
            Parallel { a, b } | Perpendicular { a, b } => {
                let (sa, ea) = line(x, *a);
                let (sb, eb) = line(x, *b);
                let (da, db) = (ea.sub(sa), eb.sub(sb));
                out.push(if matches!(self, Parallel { .. }) { da.cross(db) } else { da.dot(db) });
            }
            Normal { line: l, curve } => {
                let (s, e) = line(x, *l);
                out.push(signed_line_distance(curve.eval(x).0, s, e));
            }
            TangentLine { line: l, curve } => {
                let (s, e) = line(x, *l);
                let (c, r) = curve.eval(x);
                out.push(signed_line_distance(c, s, e).abs() - r);
            }
            TangentCurves { a, b, internal } => {
                let (ca, ra) = a.eval(x);
                let (cb, rb) = b.eval(x);
                let d = ca.sub(cb).norm();
                out.push(if *internal { d - (ra - rb).abs() } else { d - (ra + rb) });
            }
            Offset { a, b, distance } => {
                let (sa, ea) = line(x, *a);
                let (sb, eb) = line(x, *b);
                let mid_b = sb.add(eb).scale(T::cst(0.5));
                out.push(ea.sub(sa).cross(eb.sub(sb)));
                out.push(signed_line_distance(mid_b, sa, ea).abs() - T::cst(*distance));
            }
            Quadrant { p, curve, dir } => {
                let (c, r) = curve.eval(x);
                let anchor = c.add(V2::new(T::cst(dir.0), T::cst(dir.1)).scale(r));
                let d = pt(x, *p).sub(anchor);
                out.extend([d.x, d.y]);
            }
            Pin { p, target } => {
                let d = pt(x, *p).sub(V2::from_point(*target));
                out.extend([d.x, d.y]);
            }
        }
    }

    pub fn eval_f64(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(2);
        self.eval(&|k| theta[k], &mut out);
        out
    }
}

pub const QUADRANT_DIRS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];

/// One side of a constraint resolved against the sketch.
struct Side<'a> {
    prim: &'a Primitive,
    off: usize,
    /// Offset of the point if the subref is point-valued.
    point: Option<usize>,
}

impl Side<'_> {
    fn curve(&self) -> Option<CurveRef> {
        match self.point {
            Some(_) => None,
            None => CurveRef::of(self.prim, self.off),
        }
    }

    fn center(&self) -> Option<CurveRef> {
        match self.prim.kind {
            PrimitiveKind::Point => Some(CurveRef::Point(self.off)),
            _ => CurveRef::of(self.prim, self.off),
        }
    }

    fn whole_line(&self) -> Option<usize> {
        (self.prim.kind == PrimitiveKind::Line && self.point.is_none()).then_some(self.off)
    }

    fn line(&self) -> Option<usize> {
        (self.prim.kind == PrimitiveKind::Line).then_some(self.off)
    }
}

/// Translate one sketch constraint into a residual term at the given
/// parameters. Datums missing from the constraint are captured from `theta`.
pub fn term_for(
    index: usize,
    c: &Constraint,
    prims: &[Primitive],
    offsets: &[usize],
    theta: &[f64],
) -> Result<Term, SolverError> {
    let unsupported = |reason: &str| SolverError::Unsupported {
        index,
        kind: c.kind,
        reason: reason.to_string(),
    };
    let side = |i: usize, s| -> Result<Side, SolverError> {
        let prim = prims.get(i).ok_or_else(|| unsupported("primitive index out of range"))?;
        let target = prim.subref_point(s)?;
        let off = offsets[i];
        let point = match target {
            SubrefTarget::Point(_) => Some(off + prim.subref_param_offset(s).unwrap()),
            SubrefTarget::Whole => None,
        };
        Ok(Side { prim, off, point })
    };
    let a = side(c.i, c.si)?;
    let b = side(c.j, c.sj)?;
    let same = c.i == c.j;

    use ConstraintKind as K;
    let term = match c.kind {
        K::Coincident => match (a.point, b.point) {
            (Some(pa), Some(pb)) if pa != pb => Term::PointsCoincide { a: pa, b: pb },
            (Some(p), None) | (None, Some(p)) if !same => {
                let whole = if a.point.is_none() { &a } else { &b };
                match whole.prim.kind {
                    PrimitiveKind::Line => Term::PointOnLine { p, line: whole.off },
                    _ => Term::PointOnCurve {
                        p,
                        curve: whole.curve().ok_or_else(|| unsupported("no curve side"))?,
                    },
                }
            }
            _ => return Err(unsupported("needs two distinct points or a point and a curve")),
        },
        K::Concentric => {
            if same {
                return Err(unsupported("needs two primitives"));
            }
            match (a.center(), b.center()) {
                (Some(ca), Some(cb)) => Term::Concentric { a: ca, b: cb },
                _ => return Err(unsupported("needs circles, arcs or points")),
            }
        }
        K::Equal => {
            if same {
                return Err(unsupported("needs two primitives"));
            }
            match (a.line(), b.line(), CurveRef::of(a.prim, a.off), CurveRef::of(b.prim, b.off)) {
                (Some(la), Some(lb), _, _) => Term::EqualLength { a: la, b: lb },
                (_, _, Some(ca), Some(cb)) => Term::EqualRadius { a: ca, b: cb },
                _ => return Err(unsupported("needs two lines or two curves")),
            }
        }
        K::Fix => {
            if !same {
                return Err(unsupported("fix applies to a single primitive"));
            }
            match a.point.filter(|_| c.si == c.sj) {
                Some(p) => Term::FixPoint {
                    p,
                    at: Point2::new(theta[p], theta[p + 1]),
                },
                None => Term::FixParams {
                    off: a.off,
                    values: theta[a.off..a.off + a.prim.kind.param_count()].to_vec(),
                },
            }
        }
        K::Horizontal | K::Vertical => {
            let horizontal = c.kind == K::Horizontal;
            match (a.point, b.point) {
                (Some(pa), Some(pb)) if pa != pb => {
                    if horizontal {
                        Term::HorizontalPoints { a: pa, b: pb }
                    } else {
                        Term::VerticalPoints { a: pa, b: pb }
                    }
                }
                (None, None) if same && a.whole_line().is_some() => {
                    if horizontal {
                        Term::HorizontalLine { line: a.off }
                    } else {
                        Term::VerticalLine { line: a.off }
                    }
                }
                _ => return Err(unsupported("needs a line or two points")),
            }
        }
        K::Midpoint => match (a.point, b.point, a.whole_line(), b.whole_line()) {
            (Some(p), None, _, Some(l)) | (None, Some(p), Some(l), _) if !same => Term::Midpoint { p, line: l },
            _ => return Err(unsupported("needs a point and a line")),
        },
        K::Parallel | K::Perpendicular => match (a.line(), b.line()) {
            (Some(la), Some(lb)) if !same => {
                if c.kind == K::Parallel {
                    Term::Parallel { a: la, b: lb }
                } else {
                    Term::Perpendicular { a: la, b: lb }
                }
            }
            _ => return Err(unsupported("needs two lines")),
        },
        K::Normal | K::Tangent if same => return Err(unsupported("needs two primitives")),
        K::Normal => match (a.line(), b.line()) {
            (Some(l), None) => Term::Normal {
                line: l,
                curve: b.center().filter(|_| b.prim.kind != PrimitiveKind::Point).ok_or_else(|| unsupported("needs a curve"))?,
            },
            (None, Some(l)) => Term::Normal {
                line: l,
                curve: a.center().filter(|_| a.prim.kind != PrimitiveKind::Point).ok_or_else(|| unsupported("needs a curve"))?,
            },
            _ => return Err(unsupported("needs a line and a curve")),
        },
        K::Tangent => {
            let ca = CurveRef::of(a.prim, a.off);
            let cb = CurveRef::of(b.prim, b.off);
            match (a.line(), b.line(), ca, cb) {
                (Some(l), None, _, Some(curve)) | (None, Some(l), Some(curve), _) => {
                    Term::TangentLine { line: l, curve }
                }
                (None, None, Some(ca), Some(cb)) => {
                    let internal = match c.datum {
                        Some(sigma) => sigma < 0.0,
                        None => {
                            let (p, q) = (ca.eval(&|k| theta[k]), cb.eval(&|k| theta[k]));
                            let d = p.0.sub(q.0).norm();
                            (d - (p.1 - q.1).abs()).abs() < (d - (p.1 + q.1)).abs()
                        }
                    };
                    Term::TangentCurves { a: ca, b: cb, internal }
                }
                _ => return Err(unsupported("needs a line and a curve or two curves")),
            }
        }
        K::Offset => match (a.line(), b.line()) {
            (Some(la), Some(lb)) if !same => {
                let distance = match c.datum {
                    Some(d) => d,
                    None => {
                        let mid = Point2::new(
                            0.5 * (theta[lb] + theta[lb + 2]),
                            0.5 * (theta[lb + 1] + theta[lb + 3]),
                        );
                        signed_line_distance(
                            V2::from_point(mid),
                            V2::new(theta[la], theta[la + 1]),
                            V2::new(theta[la + 2], theta[la + 3]),
                        )
                        .abs()
                    }
                };
                Term::Offset { a: la, b: lb, distance }
            }
            _ => return Err(unsupported("needs two lines")),
        },
        K::Quadrant => {
            let (p, curve) = match (a.point, b.curve(), b.point, a.curve()) {
                (Some(p), Some(curve), _, _) if !same => (p, curve),
                (_, _, Some(p), Some(curve)) if !same => (p, curve),
                _ => return Err(unsupported("needs a point and a circle or arc")),
            };
            let k = match c.datum {
                Some(d) => {
                    let k = d.round();
                    if !(0.0..=3.0).contains(&k) {
                        return Err(unsupported("quadrant datum must be 0..=3"));
                    }
                    k as usize
                }
                None => {
                    let (center, _) = curve.eval(&|k| theta[k]);
                    let dx = theta[p] - center.x;
                    let dy = theta[p + 1] - center.y;
                    (0..4)
                        .max_by(|&i, &j| {
                            let s = |k: usize| QUADRANT_DIRS[k].0 * dx + QUADRANT_DIRS[k].1 * dy;
                            s(i).total_cmp(&s(j))
                        })
                        .unwrap()
                }
            };
            Term::Quadrant { p, curve, dir: QUADRANT_DIRS[k] }
        }
    };
    Ok(term)
}
