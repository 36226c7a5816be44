//! Plane points and cyclic directions.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn unit(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn angle(self) -> Direction {
        Direction::new(self.y.atan2(self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A position on the curve at infinity, as an angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Direction(f64);

impl Direction {
    pub fn new(theta: f64) -> Self {
        Direction(normalize_angle(theta))
    }

    pub fn theta(self) -> f64 {
        self.0
    }

    pub fn unit(self) -> Point {
        Point::new(self.0.cos(), self.0.sin())
    }

    /// Counterclockwise sweep from `self` to `to`, in `[0, 2π)`.
    pub fn ccw_to(self, to: Direction) -> f64 {
        ccw_delta(self.0, to.0)
    }

    /// Smallest absolute angular separation.
    pub fn separation(self, o: Direction) -> f64 {
        let d = ccw_delta(self.0, o.0);
        d.min(TAU - d)
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t -= TAU;
    }
    t
}

/// Counterclockwise sweep from angle `from` to angle `to`, in `[0, 2π)`.
pub fn ccw_delta(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

/// Position of `theta` inside the ccw angular interval starting at `from` with
/// sweep `len`, as an offset in `[0, len]`. Angles within `tol` of either end
/// snap onto the interval.
pub fn angle_offset(from: f64, len: f64, theta: f64, tol: f64) -> Option<f64> {
    let mut rel = ccw_delta(from, theta);
    if rel > TAU - tol {
        rel -= TAU;
    }
    if rel >= -tol && rel <= len + tol {
        Some(rel.clamp(0.0, len))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ccw_delta_wraps() {
        assert!((ccw_delta(3.0 * PI / 2.0, PI / 2.0) - PI).abs() < 1e-15);
        assert!((ccw_delta(0.1, 0.0) - (TAU - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn offset_snaps_near_start() {
        assert_eq!(angle_offset(1.0, 0.5, 1.0 - 1e-12, 1e-9), Some(0.0));
        assert!(angle_offset(1.0, 0.5, 0.9, 1e-9).is_none());
        let o = angle_offset(6.0, 1.0, 0.2, 1e-9).unwrap();
        assert!((o - (0.2 + TAU - 6.0)).abs() < 1e-12);
    }
}
