//! Binary rasterization of sketches.
//!
//! Every primitive becomes one or more polylines in pixel space, which are
//! stroked one pixel wide. Pixel `(col, row)` covers `[col, col+1) × [row,
//! row+1)` after mapping `u = x·W`, `v = (1 − y)·H`, so row 0 is the top.

mod handdrawn;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geom::{arc_sweep, Point2};
use crate::sketch::{validate, Primitive, PrimitiveKind, SketchGraph};
use crate::SketchError;

pub use handdrawn::{render_handdrawn, render_handdrawn_sized, HanddrawConfig};

pub const DEFAULT_SIZE: usize = 128;
/// Maximum distance between a flattened curve and its chords, in pixels.
pub const CHORD_ERROR_PX: f64 = 0.25;
pub const MIN_CURVE_SEGMENTS: usize = 8;
/// Dash pattern for construction geometry, in pixels of arc length.
pub const DASH_ON: f64 = 4.0;
pub const DASH_OFF: f64 = 4.0;

/// Row-major binary image; every pixel is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl SketchImage {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    fn set(&mut self, col: i64, row: i64) {
        if (0..self.width as i64).contains(&col) && (0..self.height as i64).contains(&row) {
            self.pixels[row as usize * self.width + col as usize] = 1;
        }
    }

    /// Light the pixel containing pixel-space point `(u, v)`. The far canvas
    /// edges `u = W` and `v = H` belong to the last column and row.
    fn set_px(&mut self, u: f64, v: f64) {
        let index = |x: f64, n: usize| (0.0..=n as f64).contains(&x).then(|| (x.floor() as i64).min(n as i64 - 1));
        if let (Some(c), Some(r)) = (index(u, self.width), index(v, self.height)) {
            self.set(c, r);
        }
    }

    pub fn lit_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }

    /// `(col, row)` of every lit pixel in row-major order.
    pub fn lit_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(|(k, _)| (k % self.width, k / self.width))
    }

    /// Canvas coordinates of a pixel center.
    pub fn pixel_center(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            (col as f64 + 0.5) / self.width as f64,
            1.0 - (row as f64 + 0.5) / self.height as f64,
        )
    }

    /// Binary PGM (P5) with lit pixels at 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|&p| if p != 0 { 255 } else { 0 }));
        out
    }

    /// Grayscale bytes (0 or 255) in row-major order.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| if p != 0 { 255 } else { 0 }).collect()
    }
}

/// Pixel-space geometry ready for stroking.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Stroke {
    Polyline { points: Vec<(f64, f64)>, dashed: bool },
    Mark(f64, f64),
}

pub(crate) struct Frame {
    pub w: f64,
    pub h: f64,
}

impl Frame {
    pub fn to_px(&self, p: Point2) -> (f64, f64) {
        (p.x * self.w, (1.0 - p.y) * self.h)
    }

    /// Segment count keeping the chord error of a radius-`r` curve within
    /// `CHORD_ERROR_PX`.
    pub fn segments(&self, r: f64, sweep: f64) -> usize {
        let r_px = r * self.w.max(self.h);
        let step = if r_px <= CHORD_ERROR_PX {
            TAU
        } else {
            2.0 * (1.0 - CHORD_ERROR_PX / r_px).acos()
        };
        let full = (TAU / step).ceil().max(MIN_CURVE_SEGMENTS as f64);
        ((full * sweep.abs() / TAU).ceil() as usize).max(MIN_CURVE_SEGMENTS)
    }

    /// Flattened arc of circle `(c, r)` from `start` through `sweep` radians.
    pub fn arc_points(&self, c: Point2, r: f64, start: f64, sweep: f64) -> Vec<(f64, f64)> {
        let n = self.segments(r, sweep);
        (0..=n)
            .map(|k| {
                let a = start + sweep * k as f64 / n as f64;
                self.to_px(Point2::new(c.x + r * a.cos(), c.y + r * a.sin()))
            })
            .collect()
    }
}

pub(crate) fn check_renderable(sketch: &SketchGraph) -> Result<(), SketchError> {
    match validate(sketch).first() {
        Some(v) => Err(SketchError::Invalid(v.to_string())),
        None => Ok(()),
    }
}

/// Clean strokes of one primitive.
pub(crate) fn primitive_strokes(p: &Primitive, frame: &Frame) -> Vec<Stroke> {
    let v = &p.params;
    let dashed = p.construction;
    match p.kind {
        PrimitiveKind::Line => vec![Stroke::Polyline {
            points: vec![
                frame.to_px(Point2::new(v[0], v[1])),
                frame.to_px(Point2::new(v[2], v[3])),
            ],
            dashed,
        }],
        PrimitiveKind::Circle => vec![Stroke::Polyline {
            points: frame.arc_points(Point2::new(v[0], v[1]), v[2], 0.0, TAU),
            dashed,
        }],
        PrimitiveKind::Arc => {
            let (s, m, e) = (Point2::new(v[0], v[1]), Point2::new(v[2], v[3]), Point2::new(v[4], v[5]));
            match arc_sweep(s, m, e) {
                Some((c, r, start, sweep)) => vec![Stroke::Polyline {
                    points: frame.arc_points(c, r, start, sweep),
                    dashed,
                }],
                None => vec![],
            }
        }
        PrimitiveKind::Point => {
            let (u, w) = frame.to_px(Point2::new(v[0], v[1]));
            vec![Stroke::Mark(u, w)]
        }
    }
}

/// Stroke one segment, lighting one pixel per major-axis pixel center.
/// `dash` carries the arc length already walked along the polyline.
fn stroke_segment(img: &mut SketchImage, a: (f64, f64), b: (f64, f64), dash: Option<f64>) {
    let (du, dv) = (b.0 - a.0, b.1 - a.1);
    let len = du.hypot(dv);
    let horizontal_major = du.abs() >= dv.abs();
    let (a0, a1) = if horizontal_major { (a.0, b.0) } else { (a.1, b.1) };
    let (lo, hi) = (a0.min(a1), a0.max(a1));
    let first = lo.floor() as i64;
    // A segment ending exactly on a pixel boundary only touches the next pixel.
    let last = if hi > lo && hi.fract() == 0.0 { hi as i64 - 1 } else { hi.floor() as i64 };
    for k in first..=last {
        let center = (k as f64 + 0.5).clamp(lo, hi);
        let t = if a1 == a0 { 0.0 } else { (center - a0) / (a1 - a0) };
        if let Some(s0) = dash {
            let s = s0 + t * len;
            if s.rem_euclid(DASH_ON + DASH_OFF) >= DASH_ON {
                continue;
            }
        }
        let minor = if horizontal_major { a.1 + t * dv } else { a.0 + t * du };
        if horizontal_major {
            img.set_px(center, minor);
        } else {
            img.set_px(minor, center);
        }
    }
}

pub(crate) fn draw(img: &mut SketchImage, strokes: &[Stroke]) {
    for s in strokes {
        match s {
            Stroke::Polyline { points, dashed } => {
                let mut walked = 0.0;
                for w in points.windows(2) {
                    stroke_segment(img, w[0], w[1], dashed.then_some(walked));
                    walked += (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
                }
            }
            Stroke::Mark(u, v) => {
                let c = (u.floor() as i64).min(img.width as i64 - 1);
                let r = (v.floor() as i64).min(img.height as i64 - 1);
                for (dc, dr) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
                    img.set(c + dc, r + dr);
                }
            }
        }
    }
}

/// Render at the default 128×128 resolution.
pub fn render(sketch: &SketchGraph) -> Result<SketchImage, SketchError> {
    render_sized(sketch, DEFAULT_SIZE, DEFAULT_SIZE)
}

pub fn render_sized(sketch: &SketchGraph, width: usize, height: usize) -> Result<SketchImage, SketchError> {
    check_renderable(sketch)?;
    let frame = Frame {
        w: width as f64,
        h: height as f64,
    };
    let mut img = SketchImage::blank(width, height);
    for p in &sketch.primitives {
        draw(&mut img, &primitive_strokes(p, &frame));
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(p: Primitive) -> SketchGraph {
        SketchGraph::new(vec![p])
    }

    #[test]
    fn empty_is_blank() {
        assert_eq!(render(&SketchGraph::default()).unwrap().lit_count(), 0);
    }

    #[test]
    fn full_width_horizontal_line() {
        let img = render(&one(Primitive::line(Point2::new(0.0, 0.5), Point2::new(1.0, 0.5)))).unwrap();
        assert_eq!(img.lit_count(), 128);
        assert!((0..128).all(|c| img.get(c, 64) == 1));
    }

    #[test]
    fn circle_pixels_hug_the_curve() {
        let img = render(&one(Primitive::circle(Point2::new(0.5, 0.5), 0.25))).unwrap();
        for (c, r) in img.lit_pixels() {
            let p = img.pixel_center(c, r);
            let d = (p.distance(Point2::new(0.5, 0.5)) - 0.25).abs() * 128.0;
            assert!(d <= 1.0, "pixel {c},{r} off by {d}px");
        }
        let expected = TAU * 0.25 * 128.0;
        let n = img.lit_count() as f64;
        assert!((n - expected).abs() <= 0.15 * expected, "{n} vs {expected}");
    }

    #[test]
    fn canvas_edges_stay_visible() {
        let img = render(&one(Primitive::line(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)))).unwrap();
        assert!((0..128).all(|c| img.get(c, 127) == 1));
        let img = render(&one(Primitive::point(Point2::new(1.0, 1.0)))).unwrap();
        assert_eq!(img.get(127, 0), 1);
    }

    #[test]
    fn point_is_a_plus() {
        let img = render(&one(Primitive::point(Point2::new(0.5, 0.5)))).unwrap();
        assert_eq!(img.lit_count(), 5);
    }

    #[test]
    fn construction_is_dashed() {
        let l = Primitive::line(Point2::new(0.0, 0.5), Point2::new(1.0, 0.5));
        let img = render(&one(l.with_construction(true))).unwrap();
        assert_eq!(img.lit_count(), 64);
        assert_eq!((0..8).map(|c| img.get(c, 64)).collect::<Vec<_>>(), [1, 1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(render(&one(Primitive::line(Point2::new(0.0, 0.5), Point2::new(1.2, 0.5)))).is_err());
    }

    #[test]
    fn pgm_header() {
        let pgm = render_sized(&SketchGraph::default(), 3, 2).unwrap().to_pgm();
        assert_eq!(&pgm[..11], b"P5\n3 2\n255\n");
        assert_eq!(pgm.len(), 17);
    }
}
