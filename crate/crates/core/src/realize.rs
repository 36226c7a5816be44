//! Finite polygonal stand-ins for faces, used for point location in the
//! validators and for drawing. Γ is drawn as a large circle; nothing computed
//! here is fed back into the combinatorial algorithms.

use std::f64::consts::TAU;

use crate::diagram::{Elem, Face, Piece, Vertex};
use crate::kernel::{ccw_delta, End, Point, SiteSystem};

/// Display circle standing in for Γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub center: Point,
    pub radius: f64,
}

impl Frame {
    /// A circle enclosing all sites and all finite vertices of `faces`, grown
    /// by `factor`.
    pub fn enclosing<'a>(sys: &SiteSystem, faces: impl IntoIterator<Item = &'a Face>, factor: f64) -> Frame {
        let recs = sys.records();
        let n = recs.len().max(1) as f64;
        let center = recs.iter().fold(Point::default(), |acc, r| acc + r.position) * (1.0 / n);
        let mut reach = recs.iter().map(|r| r.position.dist(center) + r.weight.abs().sqrt()).fold(0.0, f64::max);
        for f in faces {
            for e in &f.cycle {
                if let Vertex::Finite(p) = e.piece.start(sys) {
                    reach = reach.max(p.dist(center));
                }
            }
        }
        Frame { center, radius: factor * (reach + sys.tol().scale) }
    }

    fn on_circle(&self, theta: f64) -> Point {
        self.center + Point::new(theta.cos(), theta.sin()) * self.radius
    }
}

const CURVE_SAMPLES: usize = 24;
/// Largest chord deviation of a drawn curve, relative to the input scale.
const FLATNESS: f64 = 5e-7;

/// Polyline of a curve piece with infinite ends cut at the frame circle.
pub fn curve_polyline(sys: &SiteSystem, piece: &Piece, frame: &Frame) -> Vec<Point> {
    let Piece::Curve { a, b, t0, t1 } = *piece else {
        return Vec::new();
    };
    let j = sys.bisector(a, b);
    let lo = if t0.is_finite() { t0 } else { j.exit_param(End::Minus, frame.center, frame.radius) };
    let hi = if t1.is_finite() { t1 } else { j.exit_param(End::Plus, frame.center, frame.radius) };
    if j.is_line() || hi <= lo {
        return vec![j.point(lo), j.point(hi)];
    }
    // Uniform in asinh space keeps samples dense near the apex; chords that
    // still stray from the curve are split until they follow it closely.
    let sigma = sys.tol().scale;
    let flat = FLATNESS * sigma;
    let (u0, u1) = ((lo / sigma).asinh(), (hi / sigma).asinh());
    let ts: Vec<f64> = (0..=CURVE_SAMPLES)
        .map(|k| match k {
            0 => lo,
            k if k == CURVE_SAMPLES => hi,
            k => sigma * (u0 + (u1 - u0) * k as f64 / CURVE_SAMPLES as f64).sinh(),
        })
        .collect();
    let mut out = vec![j.point(lo)];
    for w in ts.windows(2) {
        refine(&|t| j.point(t), w[0], w[1], flat, 16, &mut out);
    }
    out
}

/// Appends points of `(a, b]` so that no chord is farther than `flat` from
/// the curve at its parameter midpoint.
fn refine(f: &dyn Fn(f64) -> Point, a: f64, b: f64, flat: f64, depth: u32, out: &mut Vec<Point>) {
    let (pa, pb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let pm = f(m);
    if depth > 0 && pm.dist((pa + pb) * 0.5) > flat {
        refine(f, a, m, flat, depth - 1, out);
        refine(f, m, b, flat, depth - 1, out);
    } else {
        out.push(pb);
    }
}

/// Closed polygon of one face cycle.
pub fn cycle_polygon(sys: &SiteSystem, cycle: &[Elem], frame: &Frame) -> Vec<Point> {
    let parts: Vec<Vec<Point>> = cycle.iter().map(|e| curve_polyline(sys, &e.piece, frame)).collect();
    let n = cycle.len();
    let mut out = Vec::new();
    for i in 0..n {
        match cycle[i].piece {
            Piece::Curve { .. } => out.extend_from_slice(&parts[i]),
            Piece::Gamma { from, len } => {
                let prev = (0..n).map(|k| (i + n - 1 - k) % n).find(|&k| !parts[k].is_empty());
                let next = (1..=n).map(|k| (i + k) % n).find(|&k| !parts[k].is_empty());
                let (start, sweep) = match (prev, next) {
                    (Some(p), Some(q)) => {
                        let a0 = angle_about(frame, *parts[p].last().unwrap());
                        let a1 = angle_about(frame, parts[q][0]);
                        let mut sweep = ccw_delta(a0, a1);
                        if sweep - len > std::f64::consts::PI {
                            sweep -= TAU;
                        } else if len - sweep > std::f64::consts::PI {
                            sweep += TAU;
                        }
                        (a0, sweep.max(0.0))
                    }
                    _ => (from, len),
                };
                let steps = ((sweep / TAU * 256.0).ceil() as usize).max(2);
                for k in 0..=steps {
                    out.push(frame.on_circle(start + sweep * k as f64 / steps as f64));
                }
            }
        }
    }
    out
}

fn angle_about(frame: &Frame, p: Point) -> f64 {
    let d = p - frame.center;
    d.y.atan2(d.x)
}

/// Winding number of a closed polygon around `z`.
pub fn winding(poly: &[Point], z: Point) -> i32 {
    winding_range(poly, z, 0, poly.len(), poly.len())
}

/// Distance from `z` to a closed polygon's boundary.
pub fn boundary_distance(poly: &[Point], z: Point) -> f64 {
    let n = poly.len();
    (0..n).map(|i| segment_distance2(poly[i], poly[(i + 1) % n], z)).fold(f64::INFINITY, f64::min).sqrt()
}

const CHUNK: usize = 32;

/// A closed polygon with per-chunk bounding boxes for fast repeated queries.
pub struct Polygon {
    pub pts: Vec<Point>,
    /// Bounding box and segment range `[start, end)` of each chunk.
    chunks: Vec<(Point, Point, usize, usize)>,
}

impl Polygon {
    pub fn new(pts: Vec<Point>) -> Self {
        let n = pts.len();
        let chunks = (0..n)
            .step_by(CHUNK)
            .map(|start| {
                let end = (start + CHUNK).min(n);
                let (mut lo, mut hi) = (pts[start], pts[start]);
                for i in start..=end {
                    let p = pts[i % n];
                    lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                (lo, hi, start, end)
            })
            .collect();
        Polygon { pts, chunks }
    }

    pub fn winding(&self, z: Point) -> i32 {
        let n = self.pts.len();
        let mut w = 0;
        for &(lo, hi, start, end) in &self.chunks {
            // No segment of the chunk straddles the horizontal through z.
            if hi.y <= z.y || lo.y > z.y {
                continue;
            }
            w += winding_range(&self.pts, z, start, end, n);
        }
        w
    }

    /// Whether some boundary point lies within `d` of `z`.
    pub fn near(&self, z: Point, d: f64) -> bool {
        let n = self.pts.len();
        let d2 = d * d;
        self.chunks.iter().any(|&(lo, hi, start, end)| {
            z.x >= lo.x - d
                && z.x <= hi.x + d
                && z.y >= lo.y - d
                && z.y <= hi.y + d
                && (start..end).any(|i| segment_distance2(self.pts[i], self.pts[(i + 1) % n], z) <= d2)
        })
    }
}

fn winding_range(poly: &[Point], z: Point, start: usize, end: usize, n: usize) -> i32 {
    let mut w = 0;
    for i in start..end {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.y <= z.y {
            if b.y > z.y && (b - a).cross(z - a) > 0.0 {
                w += 1;
            }
        } else if b.y <= z.y && (b - a).cross(z - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

fn segment_distance2(a: Point, b: Point, z: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm2();
    let t = if l2 > 0.0 { ((z - a).dot(ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * t - z).norm2()
}

/// A polygonized set of faces for repeated point location.
pub struct Located {
    pub site: usize,
    pub poly: Polygon,
}

pub fn locate_faces(sys: &SiteSystem, faces: &[Face], frame: &Frame) -> Vec<Located> {
    faces.iter().map(|f| Located { site: f.site, poly: Polygon::new(cycle_polygon(sys, &f.cycle, frame)) }).collect()
}

/// Sites whose faces contain `z` (winding summed per site), or `None` when
/// `z` is within `band` of a face boundary.
pub fn containing_sites(located: &[Located], z: Point, band: f64) -> Option<Vec<usize>> {
    let mut per: Vec<(usize, i32)> = Vec::new();
    for l in located {
        if l.poly.near(z, band) {
            return None;
        }
        let w = l.poly.winding(z);
        match per.iter_mut().find(|(s, _)| *s == l.site) {
            Some(e) => e.1 += w,
            None => per.push((l.site, w)),
        }
    }
    Some(per.into_iter().filter(|&(_, w)| w > 0).map(|(s, _)| s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_of_ccw_square() {
        let sq = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert_eq!(winding(&sq, Point::new(0.5, 0.5)), 1);
        assert_eq!(winding(&sq, Point::new(1.5, 0.5)), 0);
        let rev: Vec<Point> = sq.iter().rev().copied().collect();
        assert_eq!(winding(&rev, Point::new(0.5, 0.5)), -1);
        assert!((boundary_distance(&sq, Point::new(0.5, 0.25)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn chunked_polygon_agrees_with_plain_scans() {
        let pts: Vec<Point> = (0..200).map(|k| {
            let th = std::f64::consts::TAU * k as f64 / 200.0;
            let r = 1.0 + 0.3 * (5.0 * th).sin();
            Point::new(r * th.cos(), r * th.sin())
        }).collect();
        let poly = Polygon::new(pts.clone());
        for i in 0..40 {
            for j in 0..40 {
                let z = Point::new(-1.6 + 0.08 * i as f64, -1.6 + 0.08 * j as f64);
                assert_eq!(poly.winding(z), winding(&pts, z));
                let d = boundary_distance(&pts, z);
                assert!(poly.near(z, d * 1.000001));
                assert!(!poly.near(z, d * 0.999999));
            }
        }
    }
}
