//! Hand-drawn style degradation: an approximation built from endpoint
//! jitter, bowed strokes and overshoot. With every amplitude at zero the
//! strokes are exactly the clean ones.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_renderable, draw, primitive_strokes, Frame, SketchImage, Stroke, DEFAULT_SIZE};
use crate::geom::{arc_sweep, Point2};
use crate::sketch::{Primitive, PrimitiveKind, SketchGraph};
use crate::SketchError;

/// Segments used to flatten a bowed line.
const BEZIER_SEGMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HanddrawConfig {
    /// Standard deviation of endpoint noise, canvas units. Samples are
    /// truncated at 3σ.
    pub jitter_sigma: f64,
    /// Largest perpendicular offset of a line's Bezier control point.
    pub bow: f64,
    /// Largest extension of a stroke past each endpoint.
    pub overshoot: f64,
    pub seed: u64,
}

impl Default for HanddrawConfig {
    fn default() -> Self {
        Self {
            jitter_sigma: 0.01,
            bow: 0.02,
            overshoot: 0.015,
            seed: 0,
        }
    }
}

impl HanddrawConfig {
    pub fn zero(seed: u64) -> Self {
        Self {
            jitter_sigma: 0.0,
            bow: 0.0,
            overshoot: 0.0,
            seed,
        }
    }
}

struct Noise {
    rng: ChaCha8Rng,
    cfg: HanddrawConfig,
}

impl Noise {
    fn jitter(&mut self, p: Point2) -> Point2 {
        let sigma = self.cfg.jitter_sigma;
        if sigma <= 0.0 {
            return p;
        }
        let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
        let (dx, dy) = (normal.sample(&mut self.rng), normal.sample(&mut self.rng));
        let n = dx.hypot(dy);
        let k = if n > 3.0 * sigma { 3.0 * sigma / n } else { 1.0 };
        Point2::new(p.x + k * dx, p.y + k * dy)
    }

    fn uniform(&mut self, hi: f64) -> f64 {
        if hi <= 0.0 {
            0.0
        } else {
            self.rng.random_range(0.0..=hi)
        }
    }

    fn line(&mut self, s: Point2, e: Point2, frame: &Frame, dashed: bool) -> Stroke {
        let (mut s, mut e) = (self.jitter(s), self.jitter(e));
        let (dx, dy) = (e.x - s.x, e.y - s.y);
        let len = dx.hypot(dy);
        let (ux, uy) = if len > 0.0 { (dx / len, dy / len) } else { (0.0, 0.0) };
        let (o0, o1) = (self.uniform(self.cfg.overshoot), self.uniform(self.cfg.overshoot));
        if o0 > 0.0 || o1 > 0.0 {
            s = Point2::new(s.x - ux * o0, s.y - uy * o0);
            e = Point2::new(e.x + ux * o1, e.y + uy * o1);
        }
        let offset = if self.cfg.bow > 0.0 {
            self.rng.random_range(-self.cfg.bow..=self.cfg.bow)
        } else {
            0.0
        };
        let points = if offset == 0.0 {
            vec![frame.to_px(s), frame.to_px(e)]
        } else {
            let ctrl = Point2::new((s.x + e.x) * 0.5 - uy * offset, (s.y + e.y) * 0.5 + ux * offset);
            (0..=BEZIER_SEGMENTS)
                .map(|k| {
                    let t = k as f64 / BEZIER_SEGMENTS as f64;
                    let (a, b, c) = ((1.0 - t) * (1.0 - t), 2.0 * (1.0 - t) * t, t * t);
                    frame.to_px(Point2::new(
                        a * s.x + b * ctrl.x + c * e.x,
                        a * s.y + b * ctrl.y + c * e.y,
                    ))
                })
                .collect()
        };
        Stroke::Polyline { points, dashed }
    }

    fn strokes(&mut self, p: &Primitive, frame: &Frame) -> Vec<Stroke> {
        let v = &p.params;
        let dashed = p.construction;
        match p.kind {
            PrimitiveKind::Line => vec![self.line(Point2::new(v[0], v[1]), Point2::new(v[2], v[3]), frame, dashed)],
            PrimitiveKind::Circle => {
                let c = self.jitter(Point2::new(v[0], v[1]));
                let r = v[2];
                let extra = self.uniform(self.cfg.overshoot) / r;
                vec![Stroke::Polyline {
                    points: frame.arc_points(c, r, 0.0, TAU + extra),
                    dashed,
                }]
            }
            PrimitiveKind::Arc => {
                let s = self.jitter(Point2::new(v[0], v[1]));
                let m = self.jitter(Point2::new(v[2], v[3]));
                let e = self.jitter(Point2::new(v[4], v[5]));
                let (o0, o1) = (self.uniform(self.cfg.overshoot), self.uniform(self.cfg.overshoot));
                match arc_sweep(s, m, e) {
                    Some((c, r, start, sweep)) => {
                        let dir = sweep.signum();
                        vec![Stroke::Polyline {
                            points: frame.arc_points(c, r, start - dir * o0 / r, sweep + dir * (o0 + o1) / r),
                            dashed,
                        }]
                    }
                    // Jitter collapsed the arc; keep the clean one.
                    None => primitive_strokes(p, frame),
                }
            }
            PrimitiveKind::Point => {
                let q = self.jitter(Point2::new(v[0], v[1]));
                let (u, w) = frame.to_px(q);
                vec![Stroke::Mark(u, w)]
            }
        }
    }
}

pub fn render_handdrawn(sketch: &SketchGraph, cfg: &HanddrawConfig) -> Result<SketchImage, SketchError> {
    render_handdrawn_sized(sketch, cfg, DEFAULT_SIZE, DEFAULT_SIZE)
}

pub fn render_handdrawn_sized(
    sketch: &SketchGraph,
    cfg: &HanddrawConfig,
    width: usize,
    height: usize,
) -> Result<SketchImage, SketchError> {
    check_renderable(sketch)?;
    let ok = |x: f64| x.is_finite() && x >= 0.0;
    if !(ok(cfg.jitter_sigma) && ok(cfg.bow) && ok(cfg.overshoot)) {
        return Err(SketchError::Invalid("hand-drawn amplitudes must be finite and non-negative".into()));
    }
    let frame = Frame {
        w: width as f64,
        h: height as f64,
    };
    let mut noise = Noise {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg: *cfg,
    };
    let mut img = SketchImage::blank(width, height);
    for p in &sketch.primitives {
        let strokes = noise.strokes(p, &frame);
        draw(&mut img, &strokes);
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{signed_line_distance, V2};
    use crate::raster::render;

    fn mixed() -> SketchGraph {
        SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.2), Point2::new(0.8, 0.7)),
            Primitive::circle(Point2::new(0.5, 0.5), 0.2).with_construction(true),
            Primitive::arc(Point2::new(0.2, 0.8), Point2::new(0.35, 0.9), Point2::new(0.5, 0.8)),
            Primitive::point(Point2::new(0.3, 0.3)),
        ])
    }

    #[test]
    fn zero_noise_equals_clean() {
        let s = mixed();
        for seed in 0..5 {
            assert_eq!(render_handdrawn(&s, &HanddrawConfig::zero(seed)).unwrap(), render(&s).unwrap());
        }
    }

    #[test]
    fn seeded_and_noisy() {
        let s = mixed();
        let cfg = HanddrawConfig { seed: 4, ..Default::default() };
        let a = render_handdrawn(&s, &cfg).unwrap();
        assert_eq!(a.to_pgm(), render_handdrawn(&s, &cfg).unwrap().to_pgm());
        assert_ne!(a, render(&s).unwrap());
    }

    #[test]
    fn jittered_line_stays_near() {
        let (s, e) = (Point2::new(0.2, 0.3), Point2::new(0.7, 0.6));
        let sk = SketchGraph::new(vec![Primitive::line(s, e)]);
        for seed in 0..50 {
            let img = render_handdrawn(&sk, &HanddrawConfig { seed, ..Default::default() }).unwrap();
            for (c, r) in img.lit_pixels() {
                let p = img.pixel_center(c, r);
                let d: f64 = signed_line_distance(V2::<f64>::from_point(p), V2::from_point(s), V2::from_point(e)).abs();
                assert!(d <= 0.05, "seed {seed}: {d}");
            }
        }
    }
}
