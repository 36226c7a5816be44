use super::geom::{Direction, Point};

/// Which unbounded end of a bisector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Minus,
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    /// Constant offset from the first site along the focal axis.
    Line { along: f64 },
    /// One branch of a hyperbola with foci at the two sites. `side` is `+1`
    /// when the branch bends towards the first site.
    Branch { half_focal: f64, semi_major: f64, semi_minor: f64, side: f64 },
}

/// The oriented bisector `J(a, b)`.
///
/// The curve is a graph over the axis perpendicular to `b - a`: the parameter
/// of a point `z` is `(z - a)·n` with `n` the left normal of `b - a`. Walking
/// towards increasing parameter keeps `D(a, b)` on the left. Reversing the
/// pair negates the parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bisector {
    pub a: usize,
    pub b: usize,
    origin: Point,
    u: Point,
    n: Point,
    shape: Shape,
}

impl Bisector {
    pub(crate) fn line(a: usize, b: usize, pa: Point, pb: Point, along: f64) -> Self {
        let u = (pb - pa).unit();
        Bisector { a, b, origin: pa, u, n: u.perp(), shape: Shape::Line { along } }
    }

    /// Locus `|z - b| - |z - a| = delta` with `|delta| < |b - a|`.
    pub(crate) fn branch(a: usize, b: usize, pa: Point, pb: Point, delta: f64) -> Self {
        let d = pa.dist(pb);
        if delta == 0.0 {
            return Self::line(a, b, pa, pb, d / 2.0);
        }
        let u = (pb - pa).unit();
        let c = d / 2.0;
        let semi_major = delta.abs() / 2.0;
        let semi_minor = (c * c - semi_major * semi_major).max(0.0).sqrt();
        Bisector {
            a,
            b,
            origin: pa,
            u,
            n: u.perp(),
            shape: Shape::Branch { half_focal: c, semi_major, semi_minor, side: delta.signum() },
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self.shape, Shape::Line { .. })
    }

    fn along(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Line { along } => along,
            Shape::Branch { half_focal, semi_major, semi_minor, side } => {
                let r = t / semi_minor;
                half_focal - side * semi_major * (1.0 + r * r).sqrt()
            }
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.origin + self.u * self.along(t) + self.n * t
    }

    pub fn param(&self, z: Point) -> f64 {
        (z - self.origin).dot(self.n)
    }

    /// Asymptotic slope of the focal-axis coordinate against the parameter.
    fn slope(&self) -> f64 {
        match self.shape {
            Shape::Line { .. } => 0.0,
            Shape::Branch { semi_major, semi_minor, side, .. } => -side * semi_major / semi_minor,
        }
    }

    pub fn direction(&self, end: End) -> Direction {
        let k = self.slope();
        match end {
            End::Plus => (self.u * k + self.n).angle(),
            End::Minus => (self.u * k - self.n).angle(),
        }
    }

    /// Directions where the curve meets the curve at infinity, as
    /// `(minus end, plus end)`.
    pub fn gamma_crossings(&self) -> (Direction, Direction) {
        (self.direction(End::Minus), self.direction(End::Plus))
    }

    /// Unit tangent at parameter `t`, pointing towards increasing parameter.
    pub fn tangent(&self, t: f64) -> Point {
        let da = match self.shape {
            Shape::Line { .. } => 0.0,
            Shape::Branch { semi_major, semi_minor, side, .. } => {
                let r = t / semi_minor;
                -side * semi_major * r / (semi_minor * (1.0 + r * r).sqrt())
            }
        };
        (self.u * da + self.n).unit()
    }

    /// Parameter at which the curve leaves the disc of radius `radius` around
    /// `center` on the given end. Assumes the curve passes within `radius` of
    /// `center`.
    pub fn exit_param(&self, end: End, center: Point, radius: f64) -> f64 {
        let sign = if end == End::Plus { 1.0 } else { -1.0 };
        let mut lo = self.param(center);
        if self.point(lo).dist(center) >= radius {
            return lo;
        }
        // Moving by |dt| along the parameter moves the point at least |dt|.
        let mut hi = lo + sign * 2.0 * radius;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.point(mid).dist(center) < radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}
