use crate::geom::{arc_sweep, Point2};
use crate::SketchError;

use super::{ConstraintKind, PrimitiveKind, SketchGraph};

/// Free border left on each side of the unit canvas after normalization.
pub const CANVAS_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point2,
    pub max: Point2,
}

impl BBox {
    fn empty() -> Self {
        Self {
            min: Point2::new(f64::INFINITY, f64::INFINITY),
            max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn add(&mut self, p: Point2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.min.x >= lo && self.min.y >= lo && self.max.x <= hi && self.max.y <= hi
    }
}

/// Geometric bounding box: circles contribute their full disk extent, arcs
/// their endpoints plus any axis extremes inside the sweep.
pub fn bounding_box(sketch: &SketchGraph) -> Option<BBox> {
    if sketch.primitives.is_empty() {
        return None;
    }
    let mut bb = BBox::empty();
    for p in &sketch.primitives {
        let pt = |k: usize| Point2::new(p.params[k], p.params[k + 1]);
        match p.kind {
            PrimitiveKind::Point => bb.add(pt(0)),
            PrimitiveKind::Line => {
                bb.add(pt(0));
                bb.add(pt(2));
            }
            PrimitiveKind::Circle => {
                let (c, r) = (pt(0), p.params[2]);
                bb.add(Point2::new(c.x - r, c.y - r));
                bb.add(Point2::new(c.x + r, c.y + r));
            }
            PrimitiveKind::Arc => {
                for k in [0, 2, 4] {
                    bb.add(pt(k));
                }
                if let Some((c, r, a0, sweep)) = arc_sweep(pt(0), pt(2), pt(4)) {
                    for q in 0..4 {
                        let axis = q as f64 * std::f64::consts::FRAC_PI_2;
                        let rel = if sweep >= 0.0 {
                            (axis - a0).rem_euclid(std::f64::consts::TAU)
                        } else {
                            (a0 - axis).rem_euclid(std::f64::consts::TAU)
                        };
                        if rel <= sweep.abs() {
                            bb.add(Point2::new(c.x + r * axis.cos(), c.y + r * axis.sin()));
                        }
                    }
                }
            }
        }
    }
    Some(bb)
}

/// Uniformly scale and translate so the bounding box is centered and its
/// longer side spans `[0.05, 0.95]`. Offset datums are rescaled with it.
pub fn normalize(sketch: &SketchGraph) -> Result<SketchGraph, SketchError> {
    let bb = bounding_box(sketch).ok_or(SketchError::Degenerate)?;
    let span = bb.width().max(bb.height());
    if !(span > 0.0) || !span.is_finite() {
        return Err(SketchError::Degenerate);
    }
    let scale = (1.0 - 2.0 * CANVAS_MARGIN) / span;
    let center = Point2::new(0.5 * (bb.min.x + bb.max.x), 0.5 * (bb.min.y + bb.max.y));
    if (scale - 1.0).abs() < 1e-12 && (center.x - 0.5).abs() < 1e-12 && (center.y - 0.5).abs() < 1e-12 {
        return Ok(sketch.clone());
    }
    let map = |p: Point2| Point2::new((p.x - center.x) * scale + 0.5, (p.y - center.y) * scale + 0.5);

    let mut out = sketch.clone();
    for p in &mut out.primitives {
        *p = p.map_points(map);
        if p.kind == PrimitiveKind::Circle {
            p.params[2] *= scale;
        }
    }
    for c in &mut out.constraints {
        if c.kind == ConstraintKind::Offset {
            c.datum = c.datum.map(|d| d * scale);
        }
    }
    Ok(out)
}
