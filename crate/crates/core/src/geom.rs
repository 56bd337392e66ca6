//! Planar geometry helpers shared by the solver, renderer and metrics.
//!
//! Residual code is written once against [`Real`] and evaluated either on
//! plain `f64` or on [`Dual`] numbers, which gives exact first derivatives
//! without a separate hand-derived Jacobian per constraint.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point in normalized canvas units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Scalar abstraction over `f64` and forward-mode duals.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;

    fn hypot(a: Self, b: Self) -> Self {
        (a * a + b * b).sqrt()
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn hypot(a: Self, b: Self) -> Self {
        f64::hypot(a, b)
    }
}

/// Dual number `v + d·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Real for Dual {
    fn cst(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual::new(s, self.d / (2.0 * s))
    }
    fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
}

/// Generic 2-vector used inside residual evaluation.
#[derive(Debug, Clone, Copy)]
pub struct V2<T> {
    pub x: T,
    pub y: T,
}

// Named methods keep call sites generic over `Real` without operator impls.
#[allow(clippy::should_implement_trait)]
impl<T: Real> V2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn from_point(p: Point2) -> Self {
        Self::new(T::cst(p.x), T::cst(p.y))
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        T::hypot(self.x, self.y)
    }

    pub fn value(self) -> Point2 {
        Point2::new(self.x.value(), self.y.value())
    }
}

/// Circumcenter and circumradius of three points, `None` when they are
/// (numerically) collinear.
pub fn circumcircle<T: Real>(a: V2<T>, b: V2<T>, c: V2<T>) -> Option<(V2<T>, T)> {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let det = ab.cross(ac) * T::cst(2.0);
    let scale = ab.norm().value().max(ac.norm().value());
    if !(det.value().abs() > 1e-12 * scale * scale) {
        return None;
    }
    let ab2 = ab.dot(ab);
    let ac2 = ac.dot(ac);
    let ux = (ac.y * ab2 - ab.y * ac2) / det;
    let uy = (ab.x * ac2 - ac.x * ab2) / det;
    let offset = V2::new(ux, uy);
    Some((a.add(offset), offset.norm()))
}

/// Signed distance from `p` to the infinite line through `s` and `e`.
/// Positive on the left of `s → e`.
pub fn signed_line_distance<T: Real>(p: V2<T>, s: V2<T>, e: V2<T>) -> T {
    let d = e.sub(s);
    d.cross(p.sub(s)) / d.norm()
}

/// Angular sweep of an arc through start → mid → end as
/// `(center, radius, start_angle, signed_sweep)`.
pub fn arc_sweep(start: Point2, mid: Point2, end: Point2) -> Option<(Point2, f64, f64, f64)> {
    use std::f64::consts::TAU;
    let (c, r) = circumcircle(
        V2::<f64>::from_point(start),
        V2::from_point(mid),
        V2::from_point(end),
    )?;
    let c = c.value();
    let ang = |p: Point2| (p.y - c.y).atan2(p.x - c.x);
    let a0 = ang(start);
    let ccw = |a: f64| (a - a0).rem_euclid(TAU);
    let to_mid = ccw(ang(mid));
    let to_end = ccw(ang(end));
    let sweep = if to_mid <= to_end { to_end } else { to_end - TAU };
    Some((c, r, a0, sweep))
}
