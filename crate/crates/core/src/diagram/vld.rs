use smallvec::SmallVec;

use super::full::{CoreArc, Diagram, Elem, Face};
use super::piece::{Mode, Piece, Vertex};
use crate::kernel::{SiteIdx, SiteSystem};

pub type ArcId = usize;
pub type HeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Original,
    Auxiliary,
    Gamma,
}

/// An arc of a boundary curve.
#[derive(Clone, Debug)]
pub struct Arc {
    pub kind: ArcKind,
    /// `s_α`; `None` for Γ-arcs.
    pub site: Option<SiteIdx>,
    pub piece: Piece,
    pub next: ArcId,
    pub prev: ArcId,
    pub alive: bool,
    /// Boundary half-edge of the region `R(α)`; `None` for Γ-arcs.
    pub he: Option<HeId>,
    /// Core arcs contained in this arc.
    pub cores: SmallVec<[usize; 1]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// The region's own boundary arc.
    Boundary,
    /// A diagram edge; the neighbor is the region of the twin.
    Edge,
    /// A fine piece of a Γ-arc of the boundary curve.
    Gamma,
}

#[derive(Clone, Debug)]
pub struct HalfEdge {
    pub piece: Piece,
    pub role: Role,
    pub region: ArcId,
    pub next: HeId,
    pub prev: HeId,
    pub twin: Option<HeId>,
    pub alive: bool,
}

/// A boundary curve `P` together with its Voronoi-like diagram `V_l(P)`.
///
/// Arcs of `P` form a cyclic doubly-linked list in an arena. Each boundary arc
/// owns one region, stored as a counterclockwise half-edge cycle that starts
/// at the arc's boundary half-edge.
#[derive(Clone, Debug)]
pub struct VoronoiLike {
    pub mode: Mode,
    /// The deleted site in the nearest setting.
    pub center: Option<SiteIdx>,
    pub arcs: Vec<Arc>,
    pub hes: Vec<HalfEdge>,
    /// Some live arc of `P`.
    pub head: ArcId,
    /// All core arcs of the instance, indexed by id.
    pub cores: Vec<CoreArc>,
    /// Arc currently containing each inserted core.
    pub core_arc: Vec<Option<ArcId>>,
    /// Number of live arcs, maintained by `push_arc` and `kill_arc`.
    live: usize,
}

impl VoronoiLike {
    /// `P_1` and the empty diagram over it, for the single core `first`.
    pub fn initial(mode: Mode, center: Option<SiteIdx>, sys: &SiteSystem, cores: Vec<CoreArc>, first: usize) -> Self {
        let core = cores[first];
        let mut v = VoronoiLike {
            mode,
            center,
            arcs: Vec::new(),
            hes: Vec::new(),
            head: 0,
            core_arc: vec![None; cores.len()],
            live: 0,
            cores,
        };
        match mode {
            Mode::Nearest => {
                let s = center.expect("nearest setting needs a center site");
                let j = sys.bisector(s, core.site);
                let (dm, dp) = j.gamma_crossings();
                let piece = Piece::curve(s, core.site, f64::NEG_INFINITY, f64::INFINITY);
                let a = v.push_arc(ArcKind::Original, Some(core.site), piece);
                let g = v.push_arc(ArcKind::Gamma, None, Piece::gamma_between(dp, dm));
                v.link_arcs(a, g);
                v.link_arcs(g, a);
                let b = v.push_he(piece, Role::Boundary, a);
                let gh = v.push_he(Piece::gamma_between(dp, dm), Role::Gamma, a);
                v.link_he(b, gh);
                v.link_he(gh, b);
                v.arcs[a].he = Some(b);
                v.arcs[a].cores.push(first);
                v.head = a;
                v.core_arc[first] = Some(a);
            }
            Mode::Farthest => {
                let piece = match core.piece {
                    Piece::Gamma { from, .. } => Piece::gamma(from, std::f64::consts::TAU),
                    Piece::Curve { .. } => panic!("farthest core arcs live on Γ"),
                };
                let a = v.push_arc(ArcKind::Original, Some(core.site), piece);
                v.link_arcs(a, a);
                let b = v.push_he(piece, Role::Boundary, a);
                v.link_he(b, b);
                v.arcs[a].he = Some(b);
                v.arcs[a].cores.push(first);
                v.head = a;
                v.core_arc[first] = Some(a);
            }
        }
        v
    }

    pub(crate) fn push_arc(&mut self, kind: ArcKind, site: Option<SiteIdx>, piece: Piece) -> ArcId {
        let id = self.arcs.len();
        self.arcs.push(Arc { kind, site, piece, next: id, prev: id, alive: true, he: None, cores: SmallVec::new() });
        self.live += 1;
        id
    }

    pub(crate) fn kill_arc(&mut self, a: ArcId) {
        if std::mem::replace(&mut self.arcs[a].alive, false) {
            self.live -= 1;
        }
    }

    /// Number of live arcs in the arena; equals [`len`](Self::len) between
    /// insertions, in constant time.
    pub fn live_arcs(&self) -> usize {
        self.live
    }

    pub(crate) fn link_arcs(&mut self, a: ArcId, b: ArcId) {
        self.arcs[a].next = b;
        self.arcs[b].prev = a;
    }

    pub(crate) fn push_he(&mut self, piece: Piece, role: Role, region: ArcId) -> HeId {
        let id = self.hes.len();
        self.hes.push(HalfEdge { piece, role, region, next: id, prev: id, twin: None, alive: true });
        id
    }

    pub(crate) fn link_he(&mut self, a: HeId, b: HeId) {
        self.hes[a].next = b;
        self.hes[b].prev = a;
    }

    pub(crate) fn set_twins(&mut self, a: HeId, b: HeId) {
        self.hes[a].twin = Some(b);
        self.hes[b].twin = Some(a);
    }

    /// Arcs of `P` in counterclockwise order starting at `head`.
    pub fn boundary(&self) -> Vec<ArcId> {
        let mut out = vec![self.head];
        let mut a = self.arcs[self.head].next;
        while a != self.head {
            out.push(a);
            a = self.arcs[a].next;
            if out.len() > self.arcs.len() {
                break;
            }
        }
        out
    }

    /// Number of arcs of `P`, Γ-arcs included.
    pub fn len(&self) -> usize {
        self.boundary().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Boundary arcs of `P` (the ones that own regions).
    pub fn region_arcs(&self) -> Vec<ArcId> {
        self.boundary().into_iter().filter(|&a| self.arcs[a].kind != ArcKind::Gamma).collect()
    }

    /// Half-edges of the region of arc `a`, starting at its boundary half-edge.
    pub fn cycle(&self, a: ArcId) -> Vec<HeId> {
        let start = match self.arcs[a].he {
            Some(h) => h,
            None => return Vec::new(),
        };
        let mut out = vec![start];
        let mut h = self.hes[start].next;
        while h != start {
            out.push(h);
            h = self.hes[h].next;
            if out.len() > self.hes.len() {
                break;
            }
        }
        out
    }

    pub fn region_site(&self, a: ArcId) -> SiteIdx {
        self.arcs[a].site.expect("region arcs carry a site")
    }

    /// Neighbor region across half-edge `h`.
    pub fn neighbor(&self, h: HeId) -> Option<ArcId> {
        self.hes[h].twin.map(|t| self.hes[t].region)
    }

    pub fn he_start(&self, sys: &SiteSystem, h: HeId) -> Vertex {
        self.hes[h].piece.start(sys)
    }

    pub fn he_end(&self, sys: &SiteSystem, h: HeId) -> Vertex {
        self.hes[h].piece.end(sys)
    }

    /// All inserted core ids.
    pub fn inserted(&self) -> Vec<usize> {
        (0..self.cores.len()).filter(|&c| self.core_arc[c].is_some()).collect()
    }

    /// Region cycles as plain element lists with neighbor sites.
    pub fn region_faces(&self) -> Vec<(ArcId, Face)> {
        self.region_arcs()
            .into_iter()
            .map(|a| {
                let cycle = self
                    .cycle(a)
                    .into_iter()
                    .map(|h| {
                        let he = &self.hes[h];
                        let neighbor = match he.role {
                            Role::Boundary => match self.mode {
                                Mode::Nearest => self.center,
                                Mode::Farthest => None,
                            },
                            Role::Edge => self.neighbor(h).map(|r| self.region_site(r)),
                            Role::Gamma => None,
                        };
                        Elem { piece: he.piece, neighbor }
                    })
                    .collect();
                (a, Face { site: self.region_site(a), cycle })
            })
            .collect()
    }

    /// The diagram as faces keyed by region site.
    pub fn to_diagram(&self) -> Diagram {
        Diagram { mode: self.mode, faces: self.region_faces().into_iter().map(|(_, f)| f).collect() }
    }

    /// Number of live half-edges reachable from the region cycles.
    pub fn complexity(&self) -> usize {
        self.region_arcs().into_iter().map(|a| self.cycle(a).len()).sum()
    }
}
