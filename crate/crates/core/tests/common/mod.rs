#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketchgraph::geom::Point2;
use sketchgraph::{Constraint, ConstraintKind, Primitive, SketchGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

/// A random primitive whose geometry survives quantization to the 64-grid.
pub fn random_primitive(rng: &mut ChaCha8Rng) -> Primitive {
    let prim = loop {
        match rng.random_range(0..4) {
            0 => {
                let s = p(rng.random(), rng.random());
                let e = p(rng.random(), rng.random());
                if (s.x - e.x).abs().max((s.y - e.y).abs()) >= 2.0 / 64.0 {
                    break Primitive::line(s, e);
                }
            }
            1 => {
                let c = p(rng.random(), rng.random());
                break Primitive::circle(c, rng.random_range(1.0 / 64.0..0.5));
            }
            2 => {
                let c = p(rng.random_range(0.2..0.8), rng.random_range(0.2..0.8));
                let r = rng.random_range(0.1..0.4);
                let a0 = rng.random_range(0.0..TAU);
                let sweep = rng.random_range(0.5 * PI..1.5 * PI) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let at = |a: f64| p(c.x + r * a.cos(), c.y + r * a.sin());
                let pts = [at(a0), at(a0 + 0.5 * sweep), at(a0 + sweep)];
                if pts.iter().all(|q| (0.0..=1.0).contains(&q.x) && (0.0..=1.0).contains(&q.y)) {
                    break Primitive::arc(pts[0], pts[1], pts[2]);
                }
            }
            _ => break Primitive::point(p(rng.random(), rng.random())),
        }
    };
    prim.with_construction(rng.random_bool(0.2))
}

/// Unconstrained sketch with up to 16 random primitives.
pub fn random_sketch(rng: &mut ChaCha8Rng) -> SketchGraph {
    let n = rng.random_range(0..=16);
    SketchGraph::new((0..n).map(|_| random_primitive(rng)).collect())
}

pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64) -> SketchGraph {
    let c = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)];
    let lines = (0..4)
        .map(|k| {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            Primitive::line(p(a.0, a.1), p(b.0, b.1))
        })
        .collect();
    let mut s = SketchGraph::new(lines);
    for k in 0..4 {
        s.constrain(Constraint::new(ConstraintKind::Coincident, (k, 2), ((k + 1) % 4, 1)));
    }
    for k in [0, 2] {
        s.constrain(Constraint::new(ConstraintKind::Horizontal, (k, 4), (k, 4)));
    }
    for k in [1, 3] {
        s.constrain(Constraint::new(ConstraintKind::Vertical, (k, 4), (k, 4)));
    }
    s
}

/// Square with its bottom edge fixed: no freedom left.
pub fn fixed_square() -> SketchGraph {
    rectangle(0.2, 0.2, 0.5, 0.5)
        .with(Constraint::new(ConstraintKind::Fix, (0, 4), (0, 4)))
        .with(Constraint::new(ConstraintKind::Equal, (0, 4), (1, 4)))
}

/// One constraint of every kind, not necessarily satisfied.
pub fn every_kind() -> SketchGraph {
    use ConstraintKind as K;
    let prims = vec![
        Primitive::line(p(0.1, 0.1), p(0.6, 0.15)),
        Primitive::line(p(0.12, 0.3), p(0.55, 0.4)),
        Primitive::circle(p(0.5, 0.6), 0.2),
        Primitive::arc(p(0.3, 0.7), p(0.42, 0.83), p(0.6, 0.75)),
        Primitive::point(p(0.33, 0.14)),
        Primitive::circle(p(0.52, 0.58), 0.1),
    ];
    let cs = [
        (K::Coincident, (0, 2), (1, 1)),
        (K::Concentric, (2, 2), (5, 2)),
        (K::Equal, (0, 4), (1, 4)),
        (K::Fix, (4, 4), (4, 4)),
        (K::Horizontal, (0, 4), (0, 4)),
        (K::Midpoint, (1, 4), (4, 4)),
        (K::Normal, (1, 4), (2, 3)),
        (K::Offset, (0, 4), (1, 4)),
        (K::Parallel, (0, 4), (1, 4)),
        (K::Perpendicular, (0, 4), (1, 4)),
        (K::Quadrant, (3, 1), (5, 3)),
        (K::Tangent, (0, 4), (3, 4)),
        (K::Vertical, (3, 1), (3, 3)),
    ];
    let mut s = SketchGraph::new(prims);
    for (k, a, b) in cs {
        s.constrain(Constraint::new(k, a, b));
    }
    s.constrain(Constraint::new(K::Tangent, (2, 3), (5, 3)));
    s.constrain(Constraint::new(K::Coincident, (4, 4), (2, 3)));
    s.constrain(Constraint::new(K::Equal, (2, 3), (3, 4)));
    s
}
