mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sketchgraph::cpt::generate_synthetic;
use sketchgraph::raster::{render, render_handdrawn, HanddrawConfig, SketchImage, DEFAULT_SIZE};
use sketchgraph::{Point2, Primitive, SketchGraph};

const PX: f64 = 1.0 / DEFAULT_SIZE as f64;

/// Curve with a closed-form distance and a parametrization for coverage.
enum Shape {
    Segment(Point2, Point2),
    /// Center, radius, start angle, signed sweep.
    Arc(Point2, f64, f64, f64),
}

impl Shape {
    fn at(&self, t: f64) -> Point2 {
        match *self {
            Shape::Segment(a, b) => Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)),
            Shape::Arc(c, r, a0, sweep) => {
                let a = a0 + t * sweep;
                Point2::new(c.x + r * a.cos(), c.y + r * a.sin())
            }
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Shape::Segment(a, b) => a.distance(b),
            Shape::Arc(_, r, _, sweep) => r * sweep.abs(),
        }
    }

    fn distance(&self, p: Point2) -> f64 {
        match *self {
            Shape::Segment(a, b) => {
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                p.distance(self.at(t))
            }
            Shape::Arc(c, r, a0, sweep) => {
                let ang = (p.y - c.y).atan2(p.x - c.x);
                let rel = if sweep >= 0.0 { (ang - a0).rem_euclid(TAU) } else { (a0 - ang).rem_euclid(TAU) };
                if rel <= sweep.abs() {
                    (p.distance(c) - r).abs()
                } else {
                    p.distance(self.at(0.0)).min(p.distance(self.at(1.0)))
                }
            }
        }
    }
}

fn random_shape(r: &mut ChaCha8Rng) -> (Primitive, Shape) {
    loop {
        match r.random_range(0..3) {
            0 => {
                let a = Point2::new(r.random(), r.random());
                let b = Point2::new(r.random(), r.random());
                if a.distance(b) > 0.05 {
                    return (Primitive::line(a, b), Shape::Segment(a, b));
                }
            }
            1 => {
                let c = Point2::new(r.random_range(0.3..0.7), r.random_range(0.3..0.7));
                let rad = r.random_range(0.05..0.3);
                return (Primitive::circle(c, rad), Shape::Arc(c, rad, 0.0, TAU));
            }
            _ => {
                let c = Point2::new(r.random_range(0.3..0.7), r.random_range(0.3..0.7));
                let rad = r.random_range(0.05..0.3);
                let a0 = r.random_range(0.0..TAU);
                let sweep = r.random_range(0.3 * PI..1.7 * PI) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
                let shape = Shape::Arc(c, rad, a0, sweep);
                let prim = Primitive::arc(shape.at(0.0), shape.at(0.5), shape.at(1.0));
                return (prim, shape);
            }
        }
    }
}

fn lit_near(img: &SketchImage, p: Point2, radius: f64) -> bool {
    img.lit_pixels().any(|(c, r)| img.pixel_center(c, r).distance(p) <= radius)
}

#[test]
fn clean_render_stays_within_one_pixel_of_the_geometry() {
    let mut r = rng(31);
    for case in 0..150 {
        let (prim, shape) = random_shape(&mut r);
        let img = render(&SketchGraph::new(vec![prim])).unwrap();
        assert!(img.lit_count() > 0);
        for (c, row) in img.lit_pixels() {
            let d = shape.distance(img.pixel_center(c, row)) / PX;
            assert!(d <= 1.0, "case {case}: pixel ({c},{row}) is {d} px away");
        }
    }
}

#[test]
fn clean_render_covers_the_whole_curve() {
    let mut r = rng(32);
    for case in 0..150 {
        let (prim, shape) = random_shape(&mut r);
        let img = render(&SketchGraph::new(vec![prim])).unwrap();
        // Every sample along the curve has a lit pixel center within 1.5 px.
        let n = (shape.length() / PX).ceil() as usize;
        for k in 0..=n {
            let p = shape.at(k as f64 / n as f64);
            assert!(lit_near(&img, p, 1.5 * PX), "case {case}: gap at {p:?}");
        }
        // At least one lit pixel per two pixels of length.
        assert!(img.lit_count() as f64 >= shape.length() / PX / 2.0, "case {case}");
    }
}

#[test]
fn rendering_is_byte_identical_on_rerun() {
    for seed in 0..50 {
        let s = generate_synthetic(seed, 12);
        assert_eq!(render(&s).unwrap().to_pgm(), render(&s).unwrap().to_pgm());
        let cfg = HanddrawConfig { seed, ..HanddrawConfig::default() };
        assert_eq!(render_handdrawn(&s, &cfg).unwrap().to_pgm(), render_handdrawn(&s, &cfg).unwrap().to_pgm());
    }
}

#[test]
fn zero_noise_handdrawn_equals_clean() {
    let mut r = rng(33);
    for seed in 0..100 {
        let s = random_sketch(&mut r);
        let hand = render_handdrawn(&s, &HanddrawConfig::zero(seed)).unwrap();
        assert_eq!(hand.to_pgm(), render(&s).unwrap().to_pgm());
    }
}
