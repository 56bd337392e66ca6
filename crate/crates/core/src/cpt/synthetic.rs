use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Point2;
use crate::sketch::{Constraint, ConstraintKind, Primitive, PrimitiveKind, SketchGraph, MAX_PRIMITIVES};

const LO: f64 = 0.05;
const HI: f64 = 0.95;
const TRIES: usize = 64;

/// Ways to attach a new primitive to an existing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    ParallelLine,
    PerpendicularLine,
    ChainedLine,
    ConcentricCircle,
    TangentLine,
    TangentCircle,
    MidpointPoint,
}

impl Pattern {
    pub const ALL: [Pattern; 7] = [
        Pattern::ParallelLine,
        Pattern::PerpendicularLine,
        Pattern::ChainedLine,
        Pattern::ConcentricCircle,
        Pattern::TangentLine,
        Pattern::TangentCircle,
        Pattern::MidpointPoint,
    ];

    fn anchor_kind(self) -> PrimitiveKind {
        match self {
            Pattern::ConcentricCircle | Pattern::TangentLine => PrimitiveKind::Circle,
            _ => PrimitiveKind::Line,
        }
    }
}

fn inside(p: Point2) -> bool {
    (LO..=HI).contains(&p.x) && (LO..=HI).contains(&p.y)
}

fn circle_inside(c: Point2, r: f64) -> bool {
    c.x - r >= LO && c.x + r <= HI && c.y - r >= LO && c.y + r <= HI
}

fn uniform_point(rng: &mut ChaCha8Rng) -> Point2 {
    Point2::new(rng.random_range(LO..HI), rng.random_range(LO..HI))
}

fn line_ends(p: &Primitive) -> (Point2, Point2) {
    let v = &p.params;
    (Point2::new(v[0], v[1]), Point2::new(v[2], v[3]))
}

fn unit_dir(p: &Primitive) -> (f64, f64) {
    let (s, e) = line_ends(p);
    let (dx, dy) = (e.x - s.x, e.y - s.y);
    let n = dx.hypot(dy);
    (dx / n, dy / n)
}

/// Line of random length from `start` along `dir` (either sense).
fn line_along(rng: &mut ChaCha8Rng, start: Point2, dir: (f64, f64)) -> Option<Primitive> {
    let len = rng.random_range(0.15..0.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let end = Point2::new(start.x + dir.0 * len, start.y + dir.1 * len);
    inside(end).then(|| Primitive::line(start, end))
}

fn random_circle(rng: &mut ChaCha8Rng) -> Option<Primitive> {
    let c = uniform_point(rng);
    let r = rng.random_range(0.04..0.25);
    circle_inside(c, r).then(|| Primitive::circle(c, r))
}

/// Seed primitive: a free line (optionally axis-aligned) or a circle.
fn first_primitive(rng: &mut ChaCha8Rng) -> (Primitive, Option<ConstraintKind>) {
    loop {
        if rng.random_bool(0.5) {
            if let Some(c) = random_circle(rng) {
                return (c, None);
            }
            continue;
        }
        let (dir, label) = axis_or_random(rng);
        let start = uniform_point(rng);
        if let Some(l) = line_along(rng, start, dir) {
            return (l, label);
        }
    }
}

/// One time in three an axis-aligned direction tagged with its constraint.
fn axis_or_random(rng: &mut ChaCha8Rng) -> ((f64, f64), Option<ConstraintKind>) {
    match rng.random_range(0..6) {
        0 => ((1.0, 0.0), Some(ConstraintKind::Horizontal)),
        1 => ((0.0, 1.0), Some(ConstraintKind::Vertical)),
        _ => {
            let a = rng.random_range(0.0..TAU);
            ((a.cos(), a.sin()), None)
        }
    }
}

/// New primitive plus constraints `(kind, anchor subref, new subref)`.
type Attachment = (Primitive, Vec<(ConstraintKind, u8, u8)>);

/// Try to attach one primitive to `anchor` by `pattern`.
fn attach(
    rng: &mut ChaCha8Rng,
    sketch: &SketchGraph,
    anchor: usize,
    pattern: Pattern,
) -> Option<Attachment> {
    let a = &sketch.primitives[anchor];
    let mut extra = Vec::new();
    let prim = match pattern {
        Pattern::ParallelLine => {
            extra.push((ConstraintKind::Parallel, 4, 4));
            let start = uniform_point(rng);
            line_along(rng, start, unit_dir(a))?
        }
        Pattern::PerpendicularLine => {
            extra.push((ConstraintKind::Perpendicular, 4, 4));
            let (dx, dy) = unit_dir(a);
            let start = uniform_point(rng);
            line_along(rng, start, (-dy, dx))?
        }
        Pattern::ChainedLine => {
            let (s, e) = line_ends(a);
            let (from, sub) = if rng.random_bool(0.5) { (s, 1) } else { (e, 2) };
            let (dir, label) = axis_or_random(rng);
            extra.push((ConstraintKind::Coincident, sub, 1));
            if let Some(k) = label {
                extra.push((k, u8::MAX, 4));
            }
            line_along(rng, from, dir)?
        }
        Pattern::ConcentricCircle => {
            let c = Point2::new(a.params[0], a.params[1]);
            let r = rng.random_range(0.04..0.3);
            if (r - a.params[2]).abs() < 0.03 || !circle_inside(c, r) {
                return None;
            }
            extra.push((ConstraintKind::Concentric, 2, 2));
            Primitive::circle(c, r)
        }
        Pattern::TangentLine => {
            let (cx, cy, r) = (a.params[0], a.params[1], a.params[2]);
            let phi = rng.random_range(0.0..TAU);
            let (s, c) = phi.sin_cos();
            let p = Point2::new(cx + r * c, cy + r * s);
            let (l0, l1) = (rng.random_range(0.05..0.25), rng.random_range(0.05..0.25));
            let start = Point2::new(p.x + s * l0, p.y - c * l0);
            let end = Point2::new(p.x - s * l1, p.y + c * l1);
            if !inside(start) || !inside(end) {
                return None;
            }
            extra.push((ConstraintKind::Tangent, 3, 4));
            Primitive::line(start, end)
        }
        Pattern::TangentCircle => {
            let (s, e) = line_ends(a);
            let (dx, dy) = unit_dir(a);
            let t = rng.random_range(0.1..0.9);
            let foot = Point2::new(s.x + t * (e.x - s.x), s.y + t * (e.y - s.y));
            let rho = rng.random_range(0.04..0.2);
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let c = Point2::new(foot.x - side * dy * rho, foot.y + side * dx * rho);
            if !circle_inside(c, rho) {
                return None;
            }
            extra.push((ConstraintKind::Tangent, 4, 3));
            Primitive::circle(c, rho)
        }
        Pattern::MidpointPoint => {
            let (s, e) = line_ends(a);
            extra.push((ConstraintKind::Midpoint, 4, 4));
            Primitive::point(Point2::new((s.x + e.x) * 0.5, (s.y + e.y) * 0.5))
        }
    };
    Some((prim, extra))
}

/// Random constrained sketch with `n_prims` primitives (clamped to 1..=16)
/// built from every pattern.
pub fn generate_synthetic(seed: u64, n_prims: usize) -> SketchGraph {
    generate_synthetic_with(seed, n_prims, &Pattern::ALL)
}

/// Like [`generate_synthetic`] but restricted to `patterns`. Every
/// constraint holds exactly by construction.
pub fn generate_synthetic_with(seed: u64, n_prims: usize, patterns: &[Pattern]) -> SketchGraph {
    let n = n_prims.clamp(1, MAX_PRIMITIVES);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sketch = SketchGraph::default();
    let (first, label) = first_primitive(&mut rng);
    sketch.push(first);
    if let Some(k) = label {
        sketch.constrain(Constraint::new(k, (0, 4), (0, 4)));
    }
    while sketch.primitives.len() < n {
        let mut placed = false;
        for _ in 0..TRIES {
            let usable: Vec<Pattern> = patterns
                .iter()
                .copied()
                .filter(|p| sketch.primitives.iter().any(|q| q.kind == p.anchor_kind()))
                .collect();
            if usable.is_empty() {
                break;
            }
            let pattern = usable[rng.random_range(0..usable.len())];
            let anchors: Vec<usize> = (0..sketch.primitives.len())
                .filter(|&k| sketch.primitives[k].kind == pattern.anchor_kind())
                .collect();
            let anchor = anchors[rng.random_range(0..anchors.len())];
            if let Some((prim, cons)) = attach(&mut rng, &sketch, anchor, pattern) {
                let new = sketch.push(prim);
                for (kind, sa, sb) in cons {
                    // `u8::MAX` marks a self-constraint on the new primitive.
                    let c = if sa == u8::MAX {
                        Constraint::new(kind, (new, sb), (new, sb))
                    } else {
                        Constraint::new(kind, (anchor, sa), (new, sb))
                    };
                    sketch.constrain(c);
                }
                placed = true;
                break;
            }
        }
        if !placed {
            // No pattern fits: fall back to a free primitive.
            let (p, label) = first_primitive(&mut rng);
            let new = sketch.push(p);
            if let Some(k) = label {
                sketch.constrain(Constraint::new(k, (new, 4), (new, 4)));
            }
        }
    }
    sketch
}
