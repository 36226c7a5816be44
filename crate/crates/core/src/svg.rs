//! SVG pictures of diagrams and of single insertion steps.
//!
//! Γ is drawn as a display circle twice the size of the sites' extent. The
//! circle is a drawing aid only.

use std::fmt::Write as _;

use crate::diagram::{Diagram, Face, Piece, Vertex, VoronoiLike};
use crate::insert::{MergeCurve, Step};
use crate::kernel::{Point, SiteKind, SiteSystem};
use crate::realize::{curve_polyline, cycle_polygon, Frame};

const SIZE: f64 = 640.0;

fn fill(site: usize) -> String {
    // Golden-angle hues keep neighbouring indices apart; pastel HSL to hex.
    let h = (site as f64 * 137.508) % 360.0 / 60.0;
    let (s, l) = (0.55, 0.85);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

struct Canvas {
    frame: Frame,
    /// User units per output pixel.
    px: f64,
    out: String,
}

impl Canvas {
    fn new(frame: Frame) -> Self {
        let r = frame.radius * 1.05;
        let (x0, y0) = (frame.center.x - r, -frame.center.y - r);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="{x0} {y0} {} {}">"#,
            2.0 * r,
            2.0 * r
        );
        out.push_str("<g transform=\"scale(1,-1)\" stroke-linejoin=\"round\" stroke-linecap=\"round\">\n");
        Canvas { frame, px: 2.0 * r / SIZE, out }
    }

    fn points(pts: &[Point]) -> String {
        let mut s = String::with_capacity(pts.len() * 24);
        for p in pts {
            let _ = write!(s, "{:.6},{:.6} ", p.x, p.y);
        }
        s.trim_end().to_string()
    }

    fn polygon(&mut self, pts: &[Point], fill: &str) {
        if pts.len() >= 3 {
            let _ = writeln!(self.out, r#"<polygon points="{}" fill="{fill}" stroke="none"/>"#, Self::points(pts));
        }
    }

    fn polyline(&mut self, pts: &[Point], stroke: &str, width: f64) {
        if pts.len() >= 2 {
            let _ = writeln!(
                self.out,
                r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
                Self::points(pts),
                width * self.px
            );
        }
    }

    fn piece(&mut self, sys: &SiteSystem, piece: &Piece, stroke: &str, width: f64) {
        let pts = match *piece {
            Piece::Curve { .. } => curve_polyline(sys, piece, &self.frame),
            Piece::Gamma { from, len } => {
                let steps = ((len / std::f64::consts::TAU * 256.0).ceil() as usize).max(2);
                (0..=steps)
                    .map(|k| {
                        let th = from + len * k as f64 / steps as f64;
                        self.frame.center + Point::new(th.cos(), th.sin()) * self.frame.radius
                    })
                    .collect()
            }
        };
        self.polyline(&pts, stroke, width);
    }

    fn gamma(&mut self) {
        let Frame { center, radius } = self.frame;
        let px = self.px;
        let _ = writeln!(
            self.out,
            r##"<circle cx="{}" cy="{}" r="{radius}" fill="none" stroke="#999" stroke-width="{px}" stroke-dasharray="{} {}"/>"##,
            center.x,
            center.y,
            6.0 * px,
            4.0 * px
        );
    }

    fn sites(&mut self, sys: &SiteSystem) {
        let (dot, px) = (2.5 * self.px, self.px);
        for r in sys.records() {
            let (x, y) = (r.position.x, r.position.y);
            let radius = match r.kind {
                SiteKind::EuclideanPoint => 0.0,
                SiteKind::PowerCircle => r.weight.sqrt(),
                SiteKind::ApolloniusPoint => r.weight,
            };
            if radius > 0.0 {
                let _ = writeln!(
                    self.out,
                    r##"<circle cx="{x}" cy="{y}" r="{radius}" fill="none" stroke="#555" stroke-width="{}"/>"##,
                    0.75 * px
                );
            }
            let _ = writeln!(self.out, r##"<circle cx="{x}" cy="{y}" r="{dot}" fill="#222"/>"##);
        }
    }

    fn faces(&mut self, sys: &SiteSystem, faces: &[Face]) {
        for f in faces {
            let poly = cycle_polygon(sys, &f.cycle, &self.frame);
            self.polygon(&poly, &fill(f.site));
        }
        for f in faces {
            for e in &f.cycle {
                if !e.piece.is_gamma() {
                    self.piece(sys, &e.piece, "#333", 1.0);
                }
            }
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</g>\n</svg>\n");
        self.out
    }
}

/// The display circle: centered on the sites' bounding box with twice its
/// half-diagonal as radius, grown if a finite vertex of `faces` lies beyond.
pub fn display_frame<'a>(sys: &SiteSystem, faces: impl IntoIterator<Item = &'a Face>) -> Frame {
    let recs = sys.records();
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for r in recs {
        let w = match r.kind {
            SiteKind::EuclideanPoint => 0.0,
            SiteKind::PowerCircle => r.weight.sqrt(),
            SiteKind::ApolloniusPoint => r.weight,
        };
        lo = Point::new(lo.x.min(r.position.x - w), lo.y.min(r.position.y - w));
        hi = Point::new(hi.x.max(r.position.x + w), hi.y.max(r.position.y + w));
    }
    let center = (lo + hi) * 0.5;
    let mut radius = (hi - lo).norm().max(sys.tol().scale * 0.1).max(1e-9);
    for f in faces {
        for e in &f.cycle {
            if let Vertex::Finite(p) = e.piece.start(sys) {
                radius = radius.max(1.1 * p.dist(center));
            }
        }
    }
    Frame { center, radius }
}

/// A full diagram with filled faces, edges and sites.
pub fn diagram_svg(sys: &SiteSystem, d: &Diagram) -> String {
    let mut c = Canvas::new(display_frame(sys, &d.faces));
    c.faces(sys, &d.faces);
    c.gamma();
    c.sites(sys);
    c.finish()
}

/// One insertion step: the host diagram faintly if given, the current
/// diagram `V_l(P_i)` inside `P_i`, core arcs of `P_i` in bold and the merge
/// curve of the step highlighted.
pub fn step_svg(sys: &SiteSystem, host: Option<&Diagram>, vl: &VoronoiLike, curve: &MergeCurve) -> String {
    let inner = vl.to_diagram();
    let frame = match host {
        // Intermediate diagrams can have vertices far outside the final
        // picture; those parts are clipped.
        Some(h) => display_frame(sys, &h.faces),
        None => display_frame(sys, &inner.faces),
    };
    let mut c = Canvas::new(frame);
    if let Some(h) = host {
        for f in &h.faces {
            for e in &f.cycle {
                if !e.piece.is_gamma() {
                    c.piece(sys, &e.piece, "#bbb", 0.75);
                }
            }
        }
    }
    c.faces(sys, &inner.faces);
    for a in vl.boundary() {
        c.piece(sys, &vl.arcs[a].piece, "#000", 1.5);
    }
    for (id, at) in vl.core_arc.iter().enumerate() {
        if at.is_some() {
            c.piece(sys, &vl.cores[id].piece, "#000", 4.0);
        }
    }
    for st in &curve.steps {
        match st {
            Step::Edge(v) => c.piece(sys, &v.piece, "#d62728", 3.0),
            Step::Gamma(g) => c.piece(sys, &Piece::gamma(g.start - g.len, g.len), "#d62728", 3.0),
        }
    }
    c.gamma();
    c.sites(sys);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deletion::delete_site_observed;
    use crate::insert::InsertOptions;
    use crate::kernel::SiteRecord;
    use crate::oracle::brute_voronoi;

    fn square_and_center() -> SiteSystem {
        let pts = [(0.0, 0.0), (1.0, 0.05), (1.05, 1.0), (-0.05, 0.95), (0.52, 0.48)];
        SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, SiteKind::EuclideanPoint, p.0, p.1, 0.0)).collect()).unwrap()
    }

    #[test]
    fn diagram_picture_has_one_polygon_per_face() {
        let sys = square_and_center();
        let d = brute_voronoi(&sys, &[0, 1, 2, 3, 4], crate::diagram::Mode::Nearest).unwrap();
        let svg = diagram_svg(&sys, &d);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), d.faces.len());
    }

    #[test]
    fn deleting_the_center_draws_every_step() {
        let sys = square_and_center();
        let host = brute_voronoi(&sys, &[0, 1, 2, 3, 4], crate::diagram::Mode::Nearest).unwrap();
        let mut pictures = Vec::new();
        let mut obs = |_: usize, _: usize, vl: &VoronoiLike, _: &crate::insert::InsertStats, curve: &MergeCurve| {
            pictures.push(step_svg(&sys, Some(&host), vl, curve));
        };
        delete_site_observed(&sys, &host, 4, 1, InsertOptions::default(), Some(&mut obs)).unwrap();
        // Four neighbours: P_1 then three insertions.
        assert_eq!(pictures.len(), 3);
        assert!(pictures.iter().all(|p| p.contains("#d62728")));
    }
}
