use std::f64::consts::TAU;

use crate::geom::{arc_sweep, Point2};
use crate::sketch::{Primitive, PrimitiveKind, SketchGraph};

/// Grid used for Chamfer units: one unit is 1/64 of the canvas.
pub const CHAMFER_GRID: f64 = 64.0;
pub const MIN_SAMPLES: usize = 8;

fn along(n: usize, closed: bool, f: impl Fn(f64) -> Point2) -> Vec<Point2> {
    // Closed curves do not repeat the start point.
    let denom = if closed { n } else { n - 1 } as f64;
    (0..n).map(|k| f(k as f64 / denom)).collect()
}

fn count(length_units: f64, closed: bool) -> usize {
    let spans = length_units.ceil() as usize;
    (if closed { spans } else { spans + 1 }).max(MIN_SAMPLES)
}

/// Points spaced at most one grid unit apart along the primitive, in grid
/// units. A point primitive contributes a single sample.
pub fn sample_primitive(p: &Primitive) -> Vec<Point2> {
    let v: Vec<f64> = p.params.iter().map(|x| x * CHAMFER_GRID).collect();
    match p.kind {
        PrimitiveKind::Point => vec![Point2::new(v[0], v[1])],
        PrimitiveKind::Line => {
            let (s, e) = (Point2::new(v[0], v[1]), Point2::new(v[2], v[3]));
            along(count(s.distance(e), false), false, |t| {
                Point2::new(s.x + t * (e.x - s.x), s.y + t * (e.y - s.y))
            })
        }
        PrimitiveKind::Circle => {
            let (c, r) = (Point2::new(v[0], v[1]), v[2]);
            along(count(TAU * r, true), true, |t| {
                Point2::new(c.x + r * (TAU * t).cos(), c.y + r * (TAU * t).sin())
            })
        }
        PrimitiveKind::Arc => {
            let (s, m, e) = (Point2::new(v[0], v[1]), Point2::new(v[2], v[3]), Point2::new(v[4], v[5]));
            match arc_sweep(s, m, e) {
                Some((c, r, a0, sweep)) => along(count(r * sweep.abs(), false), false, |t| {
                    let a = a0 + t * sweep;
                    Point2::new(c.x + r * a.cos(), c.y + r * a.sin())
                }),
                None => vec![s, m, e],
            }
        }
    }
}

fn samples(s: &SketchGraph) -> Vec<Point2> {
    s.primitives.iter().flat_map(sample_primitive).collect()
}

fn mean_nearest(from: &[Point2], to: &[Point2]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| to.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
        .sum();
    total / from.len() as f64
}

/// Both directed mean nearest-sample distances, in grid units:
/// `(pred → gt, gt → pred)`.
pub fn chamfer_sides(pred: &SketchGraph, gt: &SketchGraph) -> (f64, f64) {
    let (a, b) = (samples(pred), samples(gt));
    match (a.is_empty(), b.is_empty()) {
        (true, true) => (0.0, 0.0),
        (true, false) | (false, true) => (f64::INFINITY, f64::INFINITY),
        _ => (mean_nearest(&a, &b), mean_nearest(&b, &a)),
    }
}

/// Bidirectional Chamfer distance in grid units. One empty side yields
/// `f64::INFINITY`.
pub fn chamfer(pred: &SketchGraph, gt: &SketchGraph) -> f64 {
    let (ab, ba) = chamfer_sides(pred, gt);
    0.5 * (ab + ba)
}
