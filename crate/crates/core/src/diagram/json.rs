//! Deterministic JSON form of a [`Diagram`]: shared vertices, undirected
//! edges and per-face edge cycles, all in a canonical order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::full::{Diagram, Elem, Face};
use super::piece::{Mode, Piece, Vertex};
use crate::kernel::{normalize_angle, SiteIdx, SiteSystem};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed diagram json: {0}")]
    Format(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown site id {0}")]
    UnknownSite(u32),
    #[error("edge {0} referenced but not defined")]
    UnknownEdge(usize),
    #[error("unknown mode {0:?}")]
    Mode(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    /// Finite vertices carry coordinates, vertices on Γ a direction.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    /// Site ids `(p, q)` of the bisector with `p < q`, or `None` for a piece
    /// of Γ.
    pub bisector: Option<[u32; 2]>,
    /// Parameter interval on `J(p, q)` (`null` for an unbounded end), or the
    /// counterclockwise angular interval on Γ.
    pub interval: [Option<f64>; 2],
    pub endpoints: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UseJson {
    pub edge: usize,
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceJson {
    pub site: u32,
    pub cycle: Vec<UseJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub mode: String,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub faces: Vec<FaceJson>,
}

fn opt(t: f64) -> Option<f64> {
    t.is_finite().then_some(t)
}

/// Canonical (site-id ordered) form of an element and whether it was flipped.
fn canonical(sys: &SiteSystem, piece: &Piece) -> (Piece, bool) {
    match *piece {
        Piece::Curve { a, b, .. } if sys.site(a).id > sys.site(b).id => (piece.reversed(), true),
        _ => (*piece, false),
    }
}

fn elem_key(sys: &SiteSystem, e: &Elem) -> (u32, u32, f64) {
    match e.piece {
        Piece::Curve { a, b, t0, .. } => (sys.site(a).id, sys.site(b).id, t0),
        Piece::Gamma { from, .. } => (u32::MAX, u32::MAX, from),
    }
}

/// Faces sorted by site id, each cycle rotated to start at its smallest
/// element.
fn canonical_faces(sys: &SiteSystem, d: &Diagram) -> Vec<Face> {
    let mut faces: Vec<Face> = d
        .faces
        .iter()
        .map(|f| {
            let n = f.cycle.len();
            let start = (0..n)
                .min_by(|&i, &j| {
                    let (a, b) = (elem_key(sys, &f.cycle[i]), elem_key(sys, &f.cycle[j]));
                    (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2))
                })
                .unwrap_or(0);
            let cycle = (0..n).map(|k| f.cycle[(start + k) % n]).collect();
            Face { site: f.site, cycle }
        })
        .collect();
    faces.sort_by(|a, b| {
        let ka = a.cycle.first().map(|e| elem_key(sys, e)).unwrap_or((0, 0, 0.0));
        let kb = b.cycle.first().map(|e| elem_key(sys, e)).unwrap_or((0, 0, 0.0));
        sys.site(a.site).id.cmp(&sys.site(b.site).id).then((ka.0, ka.1).cmp(&(kb.0, kb.1))).then(ka.2.total_cmp(&kb.2))
    });
    faces
}

pub fn to_json(sys: &SiteSystem, d: &Diagram) -> DiagramJson {
    let tol = sys.tol().abs() * 1e3;
    let atol = sys.tol().angle() * 1e3;
    let mut verts: Vec<Vertex> = Vec::new();
    let vid = |v: Vertex, verts: &mut Vec<Vertex>| match verts.iter().position(|w| w.close_to(&v, tol, atol)) {
        Some(i) => i,
        None => {
            verts.push(v);
            verts.len() - 1
        }
    };
    let mut edges: Vec<(Piece, EdgeJson)> = Vec::new();
    let mut faces = Vec::new();
    for f in canonical_faces(sys, d) {
        let mut cycle = Vec::with_capacity(f.cycle.len());
        for e in &f.cycle {
            let (c, reversed) = canonical(sys, &e.piece);
            let found = match c {
                Piece::Curve { .. } => edges.iter().position(|(p, _)| same_curve(p, &c, tol)),
                Piece::Gamma { .. } => None,
            };
            let edge = match found {
                Some(i) => i,
                None => {
                    let (s, t) = (vid(c.start(sys), &mut verts), vid(c.end(sys), &mut verts));
                    let (bisector, interval) = match c {
                        Piece::Curve { a, b, t0, t1 } => (Some([sys.site(a).id, sys.site(b).id]), [opt(t0), opt(t1)]),
                        Piece::Gamma { from, len } => (None, [Some(from), Some(from + len)]),
                    };
                    let id = edges.len();
                    edges.push((c, EdgeJson { id, bisector, interval, endpoints: [s, t] }));
                    id
                }
            };
            cycle.push(UseJson { edge, reversed });
        }
        faces.push(FaceJson { site: sys.site(f.site).id, cycle });
    }
    let vertices = verts
        .into_iter()
        .enumerate()
        .map(|(id, v)| match v {
            Vertex::Finite(p) => VertexJson { id, x: Some(p.x), y: Some(p.y), theta: None },
            Vertex::Gamma(w) => VertexJson { id, x: None, y: None, theta: Some(w.theta()) },
        })
        .collect();
    DiagramJson { mode: d.mode.name().to_string(), vertices, edges: edges.into_iter().map(|(_, e)| e).collect(), faces }
}

fn same_curve(a: &Piece, b: &Piece, tol: f64) -> bool {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= tol * (1.0 + x.abs());
    match (*a, *b) {
        (Piece::Curve { a: a1, b: b1, t0, t1 }, Piece::Curve { a: a2, b: b2, t0: u0, t1: u1 }) => {
            a1 == a2 && b1 == b2 && close(t0, u0) && close(t1, u1)
        }
        _ => false,
    }
}

pub fn from_json(sys: &SiteSystem, j: &DiagramJson) -> Result<Diagram, JsonError> {
    let mode = match j.mode.as_str() {
        "nearest" => Mode::Nearest,
        "farthest" => Mode::Farthest,
        m => return Err(JsonError::Mode(m.to_string())),
    };
    let idx = |id: u32| -> Result<SiteIdx, JsonError> { sys.index_of(id).ok_or(JsonError::UnknownSite(id)) };
    let mut pieces = Vec::with_capacity(j.edges.len());
    for e in &j.edges {
        let p = match e.bisector {
            Some([p, q]) => Piece::curve(idx(p)?, idx(q)?, e.interval[0].unwrap_or(f64::NEG_INFINITY), e.interval[1].unwrap_or(f64::INFINITY)),
            None => {
                let from = e.interval[0].unwrap_or(0.0);
                let to = e.interval[1].unwrap_or(from);
                Piece::gamma(normalize_angle(from), to - from)
            }
        };
        pieces.push((e.id, p));
    }
    let mut faces = Vec::with_capacity(j.faces.len());
    for f in &j.faces {
        let site = idx(f.site)?;
        let mut cycle = Vec::with_capacity(f.cycle.len());
        for u in &f.cycle {
            let piece = pieces.iter().find(|(id, _)| *id == u.edge).map(|(_, p)| *p).ok_or(JsonError::UnknownEdge(u.edge))?;
            let piece = if u.reversed { piece.reversed() } else { piece };
            let neighbor = match piece {
                Piece::Curve { a, b, .. } => Some(if a == site { b } else { a }),
                Piece::Gamma { .. } => None,
            };
            cycle.push(Elem { piece, neighbor });
        }
        faces.push(Face { site, cycle });
    }
    Ok(Diagram { mode, faces })
}

pub fn write_diagram<W: Write>(w: W, sys: &SiteSystem, d: &Diagram) -> Result<(), JsonError> {
    serde_json::to_writer_pretty(w, &to_json(sys, d))?;
    Ok(())
}

pub fn read_diagram<R: Read>(r: R, sys: &SiteSystem) -> Result<Diagram, JsonError> {
    let j: DiagramJson = serde_json::from_reader(r)?;
    from_json(sys, &j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{SiteKind, SiteRecord};
    use crate::oracle::{brute_voronoi, compare_diagrams};

    fn sys() -> SiteSystem {
        let pts = [(0.1, 0.2), (0.9, 0.15), (0.5, 0.8), (0.45, 0.4), (0.8, 0.7)];
        SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(10 + i as u32, SiteKind::EuclideanPoint, p.0, p.1, 0.0)).collect()).unwrap()
    }

    #[test]
    fn round_trip_preserves_the_diagram() {
        let sys = sys();
        let all: Vec<SiteIdx> = (0..sys.len()).collect();
        for mode in [Mode::Nearest, Mode::Farthest] {
            let d = brute_voronoi(&sys, &all, mode).unwrap();
            let mut buf = Vec::new();
            write_diagram(&mut buf, &sys, &d).unwrap();
            let back = read_diagram(buf.as_slice(), &sys).unwrap();
            assert!(compare_diagrams(&sys, &d, &back, 1e-9).isomorphic);
        }
    }

    #[test]
    fn edges_are_shared_and_output_is_stable() {
        let sys = sys();
        let all: Vec<SiteIdx> = (0..sys.len()).collect();
        let d = brute_voronoi(&sys, &all, Mode::Nearest).unwrap();
        let j = to_json(&sys, &d);
        let curve_edges = j.edges.iter().filter(|e| e.bisector.is_some()).count();
        assert_eq!(2 * curve_edges, d.edge_count());
        let mut shuffled = d.clone();
        shuffled.faces.reverse();
        for f in &mut shuffled.faces {
            f.cycle.rotate_left(1);
        }
        let a = serde_json::to_string(&j).unwrap();
        let b = serde_json::to_string(&to_json(&sys, &shuffled)).unwrap();
        assert_eq!(a, b);
    }
}
