use std::f64::consts::TAU;

use thiserror::Error;

use super::piece::{Mode, Piece, Vertex};
use crate::kernel::{SiteIdx, SiteSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("site {0} has an empty region")]
    EmptyRegion(u32),
    #[error("site {0} has {1} faces; expected one")]
    SplitRegion(u32, usize),
    #[error("boundary sequence of site {0} contains an abab alternation")]
    NotDavenportSchinzel(u32),
}

/// One element of a face boundary. `neighbor` is the site across the element,
/// or `None` on the curve at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Elem {
    pub piece: Piece,
    pub neighbor: Option<SiteIdx>,
}

/// A boundary cycle of the region of `site`, counterclockwise with the region
/// on the left. A site may own several cycles (holes, or multiple faces in the
/// farthest setting).
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub site: SiteIdx,
    pub cycle: Vec<Elem>,
}

/// A full nearest or farthest diagram of a site subset, clipped to the curve
/// at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub mode: Mode,
    pub faces: Vec<Face>,
}

impl Diagram {
    /// The diagram of a single site: one face bounded by all of Γ.
    pub fn single(mode: Mode, site: SiteIdx) -> Self {
        Diagram { mode, faces: vec![Face { site, cycle: vec![Elem { piece: Piece::gamma(0.0, TAU), neighbor: None }] }] }
    }

    pub fn faces_of(&self, site: SiteIdx) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.site == site)
    }

    /// Sites that own at least one face, ascending.
    pub fn sites(&self) -> Vec<SiteIdx> {
        let mut v: Vec<SiteIdx> = self.faces.iter().map(|f| f.site).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn edge_count(&self) -> usize {
        self.faces.iter().map(|f| f.cycle.iter().filter(|e| e.neighbor.is_some()).count()).sum()
    }

    /// Fuses consecutive elements on the same bisector or on Γ, then rotates
    /// each cycle to a canonical start and sorts faces.
    pub fn normalized(&self, sys: &SiteSystem) -> Diagram {
        let tol = sys.tol().abs() * 1e3;
        let atol = sys.tol().angle() * 1e3;
        let mut faces: Vec<Face> = self
            .faces
            .iter()
            .map(|f| Face { site: f.site, cycle: canonical_rotation(sys, &fuse_cycle(&f.cycle, tol, atol)) })
            .collect();
        faces.sort_by(|a, b| a.site.cmp(&b.site).then_with(|| cycle_key(sys, &a.cycle).total_cmp(&cycle_key(sys, &b.cycle))));
        Diagram { mode: self.mode, faces }
    }
}

pub(crate) fn fuse_cycle(cycle: &[Elem], tol: f64, atol: f64) -> Vec<Elem> {
    let mut out: Vec<Elem> = Vec::with_capacity(cycle.len());
    for e in cycle {
        if let Some(last) = out.last_mut() {
            if last.neighbor == e.neighbor && last.piece.joins(&e.piece, tol, atol) {
                last.piece = last.piece.fuse(&e.piece);
                continue;
            }
        }
        out.push(*e);
    }
    while out.len() > 1 {
        let (first, last) = (out[0], out[out.len() - 1]);
        if last.neighbor == first.neighbor && last.piece.joins(&first.piece, tol, atol) {
            out[0].piece = last.piece.fuse(&first.piece);
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// Lexicographic key of an element used for canonical rotation.
fn elem_key(sys: &SiteSystem, e: &Elem) -> (u8, u64, u64, f64) {
    match e.piece {
        Piece::Curve { a, b, .. } => {
            let start = match e.piece.start(sys) {
                Vertex::Finite(p) => p.x + p.y * 1e-3,
                Vertex::Gamma(d) => 1e300 + d.theta(),
            };
            (0, sys.site(a).id as u64, sys.site(b).id as u64, start)
        }
        Piece::Gamma { from, .. } => (1, 0, 0, from),
    }
}

fn key_less(x: &(u8, u64, u64, f64), y: &(u8, u64, u64, f64)) -> bool {
    (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)).then(x.3.total_cmp(&y.3)).is_lt()
}

pub(crate) fn canonical_rotation(sys: &SiteSystem, cycle: &[Elem]) -> Vec<Elem> {
    if cycle.is_empty() {
        return Vec::new();
    }
    let mut best = 0;
    let mut best_key = elem_key(sys, &cycle[0]);
    for (i, e) in cycle.iter().enumerate().skip(1) {
        let k = elem_key(sys, e);
        if key_less(&k, &best_key) {
            best = i;
            best_key = k;
        }
    }
    cycle[best..].iter().chain(cycle[..best].iter()).copied().collect()
}

fn cycle_key(sys: &SiteSystem, cycle: &[Elem]) -> f64 {
    cycle.first().map(|e| elem_key(sys, e).3).unwrap_or(0.0)
}

/// A Voronoi edge of `∂VR(s)` clipped to the curve at infinity: one atomic
/// arc of the incremental algorithm. In the farthest setting it is an
/// angular interval of Γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoreArc {
    pub id: usize,
    pub site: SiteIdx,
    pub piece: Piece,
}

/// The cyclic counterclockwise sequence of core arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreArcSequence {
    pub mode: Mode,
    /// The deleted site in the nearest setting.
    pub center: Option<SiteIdx>,
    pub arcs: Vec<CoreArc>,
}

impl CoreArcSequence {
    pub fn h(&self) -> usize {
        self.arcs.len()
    }

    pub fn labels(&self) -> Vec<SiteIdx> {
        self.arcs.iter().map(|a| a.site).collect()
    }
}

/// Whether the cyclic label sequence avoids `abab` and repeats no label
/// consecutively; the defining property of a Davenport-Schinzel sequence of
/// order 2 read around a circle.
pub fn is_ds2_cyclic(labels: &[usize]) -> bool {
    let n = labels.len();
    if n <= 1 {
        return true;
    }
    if (0..n).any(|i| labels[i] == labels[(i + 1) % n]) && n > 1 {
        return false;
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for (i, &a) in distinct.iter().enumerate() {
        for &b in &distinct[i + 1..] {
            // Length of the alternating compression of the {a, b} subsequence.
            let mut comp: Vec<usize> = Vec::new();
            for &l in labels {
                if (l == a || l == b) && comp.last() != Some(&l) {
                    comp.push(l);
                }
            }
            if comp.len() > 1 && comp.first() == comp.last() {
                comp.pop();
            }
            if comp.len() >= 4 {
                return false;
            }
        }
    }
    true
}

/// The Voronoi edges bounding the region of `s`, in counterclockwise order.
pub fn extract_core_sequence(sys: &SiteSystem, diagram: &Diagram, s: SiteIdx) -> Result<CoreArcSequence, DiagramError> {
    let faces: Vec<&Face> = diagram.faces_of(s).collect();
    if faces.is_empty() {
        return Err(DiagramError::EmptyRegion(sys.site(s).id));
    }
    if faces.len() > 1 {
        return Err(DiagramError::SplitRegion(sys.site(s).id, faces.len()));
    }
    let tol = sys.tol().abs() * 1e3;
    let atol = sys.tol().angle() * 1e3;
    let cycle = fuse_cycle(&faces[0].cycle, tol, atol);
    let arcs: Vec<CoreArc> = cycle
        .iter()
        .filter_map(|e| e.neighbor.map(|q| (q, e.piece)))
        .enumerate()
        .map(|(id, (site, piece))| CoreArc { id, site, piece })
        .collect();
    // Γ counts as a label of its own: an unbounded region may meet the same
    // neighbour on both sides of its piece of Γ.
    let boundary: Vec<usize> = cycle.iter().map(|e| e.neighbor.unwrap_or(usize::MAX)).collect();
    let seq = CoreArcSequence { mode: diagram.mode, center: Some(s), arcs };
    if !is_ds2_cyclic(&boundary) {
        return Err(DiagramError::NotDavenportSchinzel(sys.site(s).id));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ds2_detects_alternation() {
        assert!(is_ds2_cyclic(&[1, 2, 1, 3]));
        assert!(!is_ds2_cyclic(&[1, 2, 1, 2]));
        assert!(!is_ds2_cyclic(&[1, 2, 3, 1, 4, 2]));
        assert!(is_ds2_cyclic(&[1, 2, 3, 2]));
        assert!(!is_ds2_cyclic(&[1, 1, 2]));
        assert!(is_ds2_cyclic(&[5]));
        assert!(is_ds2_cyclic(&[1, 2, usize::MAX, 2]));
    }
}
