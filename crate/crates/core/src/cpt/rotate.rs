use serde::Serialize;

use crate::geom::Point2;
use crate::sketch::{normalize, Constraint, ConstraintKind, SketchGraph};
use crate::solver::{check, TOL_FEAS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotatedSketch {
    pub sketch: SketchGraph,
    /// Orientation-dependent constraints the rotation broke.
    pub dropped: Vec<Constraint>,
}

fn rotate_point(p: Point2, cos: f64, sin: f64) -> Point2 {
    let (dx, dy) = (p.x - 0.5, p.y - 0.5);
    Point2::new(0.5 + cos * dx - sin * dy, 0.5 + sin * dx + cos * dy)
}

fn still_holds(rotated: &SketchGraph, original: &SketchGraph, c: &Constraint) -> bool {
    match c.kind {
        ConstraintKind::Horizontal | ConstraintKind::Vertical | ConstraintKind::Quadrant => {
            let single = SketchGraph::new(rotated.primitives.clone()).with(c.clone());
            check(&single).is_ok_and(|r| r <= TOL_FEAS)
        }
        // Fixed geometry must not have moved at all.
        ConstraintKind::Fix => {
            let (a, b) = (&original.primitives[c.i].params, &rotated.primitives[c.i].params);
            a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
        }
        _ => true,
    }
}

/// Rotate every primitive about the canvas center by `angle` radians, drop
/// the orientation-dependent constraints that no longer hold, and
/// re-normalize. Angle 0 returns the (normalized) input unchanged.
pub fn generate_rotated(sketch: &SketchGraph, angle: f64) -> RotatedSketch {
    let angle = angle.rem_euclid(std::f64::consts::TAU);
    let rotated = if angle == 0.0 {
        sketch.clone()
    } else {
        let (sin, cos) = angle.sin_cos();
        let mut out = sketch.clone();
        for p in &mut out.primitives {
            *p = p.map_points(|q| rotate_point(q, cos, sin));
        }
        out
    };
    let (kept, dropped): (Vec<_>, Vec<_>) = rotated
        .constraints
        .iter()
        .cloned()
        .partition(|c| still_holds(&rotated, sketch, c));
    let rotated = SketchGraph {
        primitives: rotated.primitives,
        constraints: kept,
    };
    let sketch = normalize(&rotated).unwrap_or(rotated);
    RotatedSketch { sketch, dropped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpt::fixtures::rectangle;

    #[test]
    fn zero_angle_is_identity() {
        let s = normalize(&rectangle(0.2, 0.3, 0.4, 0.3)).unwrap();
        let r = generate_rotated(&s, 0.0);
        assert_eq!(r.sketch, s);
        assert!(r.dropped.is_empty());
        assert_eq!(generate_rotated(&s, std::f64::consts::TAU).sketch, s);
    }

    #[test]
    fn quarter_turn_keeps_axis_constraints() {
        let s = rectangle(0.2, 0.3, 0.4, 0.3);
        let r = generate_rotated(&s, std::f64::consts::FRAC_PI_2);
        // Horizontal sides become vertical: the labels no longer hold.
        assert_eq!(r.dropped.len(), 4);
        assert!(check(&r.sketch).unwrap() <= 1e-6);
    }

    #[test]
    fn oblique_rotation_drops_only_orientation_kinds() {
        let s = rectangle(0.2, 0.3, 0.4, 0.3);
        let r = generate_rotated(&s, 0.3);
        assert!(r
            .dropped
            .iter()
            .all(|c| matches!(c.kind, ConstraintKind::Horizontal | ConstraintKind::Vertical)));
        assert_eq!(r.sketch.constraints.len(), 4);
        assert!(check(&r.sketch).unwrap() <= 1e-6);
        let lengths: Vec<f64> = r.sketch.primitives.iter().map(|p| p.extent()).collect();
        assert!((lengths[0] / lengths[1] - 0.4 / 0.3).abs() < 1e-9);
    }
}
