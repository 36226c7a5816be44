use std::f64::consts::TAU;

use crate::kernel::{normalize_angle, Direction, End, Point, SiteIdx, SiteSystem};

/// Nearest or farthest dominance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Nearest,
    Farthest,
}

impl Mode {
    /// The oriented bisector that carries the boundary of `region`'s side
    /// against `other`, with `region` locally on the left.
    pub fn side_curve(self, region: SiteIdx, other: SiteIdx) -> (SiteIdx, SiteIdx) {
        match self {
            Mode::Nearest => (region, other),
            Mode::Farthest => (other, region),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Nearest => "nearest",
            Mode::Farthest => "farthest",
        }
    }
}

/// A point of the plane or a position on the curve at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Vertex {
    Finite(Point),
    Gamma(Direction),
}

impl Vertex {
    pub fn is_gamma(&self) -> bool {
        matches!(self, Vertex::Gamma(_))
    }

    pub fn close_to(&self, o: &Vertex, tol: f64, angle_tol: f64) -> bool {
        match (self, o) {
            (Vertex::Finite(a), Vertex::Finite(b)) => a.dist(*b) <= tol,
            (Vertex::Gamma(a), Vertex::Gamma(b)) => a.separation(*b) <= angle_tol,
            _ => false,
        }
    }
}

/// Geometry of an element of a face or region boundary.
///
/// `Curve` is the stretch `[t0, t1]` of `J(a, b)` traversed with increasing
/// parameter, so `D(a, b)` is on its left; either end may be infinite.
/// `Gamma` is the counterclockwise angular interval of length `len` starting
/// at `from`; `len == TAU` is the full circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Curve { a: SiteIdx, b: SiteIdx, t0: f64, t1: f64 },
    Gamma { from: f64, len: f64 },
}

impl Piece {
    pub fn curve(a: SiteIdx, b: SiteIdx, t0: f64, t1: f64) -> Self {
        Piece::Curve { a, b, t0, t1 }
    }

    pub fn gamma(from: f64, len: f64) -> Self {
        Piece::Gamma { from: normalize_angle(from), len: len.min(TAU) }
    }

    /// Γ interval running counterclockwise from `from` to `to`.
    pub fn gamma_between(from: Direction, to: Direction) -> Self {
        Piece::gamma(from.theta(), from.ccw_to(to))
    }

    pub fn is_gamma(&self) -> bool {
        matches!(self, Piece::Gamma { .. })
    }

    pub fn sites(&self) -> Option<(SiteIdx, SiteIdx)> {
        match *self {
            Piece::Curve { a, b, .. } => Some((a, b)),
            Piece::Gamma { .. } => None,
        }
    }

    /// Parameter range, or `[0, len]` for Γ pieces.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Piece::Curve { t0, t1, .. } => (t0, t1),
            Piece::Gamma { len, .. } => (0.0, len),
        }
    }

    /// The same stretch traversed backwards, as seen from the other side.
    pub fn reversed(&self) -> Piece {
        match *self {
            Piece::Curve { a, b, t0, t1 } => Piece::Curve { a: b, b: a, t0: -t1, t1: -t0 },
            Piece::Gamma { from, len } => Piece::Gamma { from, len },
        }
    }

    /// Sub-piece between positions `lo <= hi` of [`Piece::range`].
    pub fn sub(&self, lo: f64, hi: f64) -> Piece {
        match *self {
            Piece::Curve { a, b, .. } => Piece::Curve { a, b, t0: lo, t1: hi },
            Piece::Gamma { from, .. } => Piece::gamma(from + lo, hi - lo),
        }
    }

    pub fn point_at(&self, sys: &SiteSystem, pos: f64) -> Vertex {
        match *self {
            Piece::Curve { a, b, .. } => {
                let j = sys.bisector(a, b);
                if pos == f64::INFINITY {
                    Vertex::Gamma(j.direction(End::Plus))
                } else if pos == f64::NEG_INFINITY {
                    Vertex::Gamma(j.direction(End::Minus))
                } else {
                    Vertex::Finite(j.point(pos))
                }
            }
            Piece::Gamma { from, .. } => Vertex::Gamma(Direction::new(from + pos)),
        }
    }

    pub fn start(&self, sys: &SiteSystem) -> Vertex {
        self.point_at(sys, self.range().0)
    }

    pub fn end(&self, sys: &SiteSystem) -> Vertex {
        self.point_at(sys, self.range().1)
    }

    /// Whether `self` followed by `next` can be fused into one piece.
    pub fn joins(&self, next: &Piece, tol: f64, angle_tol: f64) -> bool {
        match (*self, *next) {
            (Piece::Curve { a, b, t1, .. }, Piece::Curve { a: a2, b: b2, t0, .. }) => {
                a == a2 && b == b2 && t1.is_finite() && t0.is_finite() && (t1 - t0).abs() <= tol * (1.0 + t1.abs())
            }
            (Piece::Gamma { from, len }, Piece::Gamma { from: f2, .. }) => {
                Direction::new(from + len).separation(Direction::new(f2)) <= angle_tol
            }
            _ => false,
        }
    }

    /// Concatenation of two joining pieces.
    pub fn fuse(&self, next: &Piece) -> Piece {
        match (*self, *next) {
            (Piece::Curve { a, b, t0, .. }, Piece::Curve { t1, .. }) => Piece::Curve { a, b, t0, t1 },
            (Piece::Gamma { from, len }, Piece::Gamma { len: l2, .. }) => Piece::gamma(from, len + l2),
            _ => *self,
        }
    }

    /// Position of vertex `v` on this piece, if it lies there.
    pub fn locate(&self, sys: &SiteSystem, v: &Vertex, tol: f64, angle_tol: f64) -> Option<f64> {
        match (*self, v) {
            (Piece::Curve { a, b, t0, t1 }, Vertex::Finite(z)) => {
                let j = sys.bisector(a, b);
                let t = j.param(*z);
                let slack = tol * (1.0 + t.abs());
                if t < t0 - slack || t > t1 + slack || j.point(t).dist(*z) > tol * 1e3 {
                    return None;
                }
                Some(t.clamp(t0, t1))
            }
            (Piece::Curve { a, b, t0, t1 }, Vertex::Gamma(d)) => {
                let j = sys.bisector(a, b);
                if t1 == f64::INFINITY && j.direction(End::Plus).separation(*d) <= angle_tol {
                    Some(t1)
                } else if t0 == f64::NEG_INFINITY && j.direction(End::Minus).separation(*d) <= angle_tol {
                    Some(t0)
                } else {
                    None
                }
            }
            (Piece::Gamma { from, len }, Vertex::Gamma(d)) => crate::kernel::angle_offset(from, len, d.theta(), angle_tol),
            (Piece::Gamma { .. }, Vertex::Finite(_)) => None,
        }
    }
}

/// Parameter slack used when comparing positions on a curve.
pub fn param_tol(tol: f64, t: f64) -> f64 {
    if t.is_finite() {
        tol * (1.0 + t.abs())
    } else {
        tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{SiteKind, SiteRecord};

    fn two() -> SiteSystem {
        SiteSystem::new(vec![
            SiteRecord::new(0, SiteKind::EuclideanPoint, 0.0, 0.0, 0.0),
            SiteRecord::new(1, SiteKind::EuclideanPoint, 2.0, 0.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn reversed_curve_has_same_endpoints_swapped() {
        let sys = two();
        let p = Piece::curve(0, 1, -1.0, 2.0);
        let r = p.reversed();
        assert!(p.start(&sys).close_to(&r.end(&sys), 1e-12, 1e-12));
        assert!(p.end(&sys).close_to(&r.start(&sys), 1e-12, 1e-12));
    }

    #[test]
    fn gamma_sub_and_fuse_round_trip() {
        let g = Piece::gamma(6.0, 1.0);
        let a = g.sub(0.0, 0.4);
        let b = g.sub(0.4, 1.0);
        assert!(a.joins(&b, 1e-9, 1e-9));
        let f = a.fuse(&b);
        match (f, g) {
            (Piece::Gamma { from: f1, len: l1 }, Piece::Gamma { from: f2, len: l2 }) => {
                assert!((f1 - f2).abs() < 1e-12 && (l1 - l2).abs() < 1e-12)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn unbounded_ends_are_gamma_vertices() {
        let sys = two();
        let p = Piece::curve(0, 1, f64::NEG_INFINITY, f64::INFINITY);
        assert!(p.start(&sys).is_gamma() && p.end(&sys).is_gamma());
        assert_eq!(p.locate(&sys, &p.end(&sys), 1e-9, 1e-9), Some(f64::INFINITY));
    }
}
