//! Insertion of one core arc into a boundary curve and its Voronoi-like
//! diagram: locating the new arc β, tracing the merge curve `J(β)` and
//! splicing the new region in.

use std::collections::HashMap;
use std::f64::consts::TAU;

use smallvec::SmallVec;
use thiserror::Error;

use crate::diagram::{param_tol, ArcId, ArcKind, HeId, Mode, Piece, Role, Vertex, VoronoiLike};
use crate::kernel::{angle_offset, ccw_delta, normalize_angle, End, KernelError, SiteIdx, SiteSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InsertError {
    #[error("core arc {0} does not lie in the current domain")]
    CoreNotInDomain(usize),
    #[error("inserting core arc {core} would delete original arc {arc}")]
    OriginalDeleted { core: usize, arc: ArcId },
    #[error("merge curve trace diverged after {steps} steps: {reason}")]
    TraceDiverged { reason: String, steps: usize },
    #[error("case {0:?} does not exist in the farthest setting")]
    FarthestCase(InsertionCase),
    #[error("scan rules disagree in region {0}")]
    ScanMismatch(ArcId),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// How the new arc sits against the current boundary curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InsertionCase {
    /// Straddles one vertex of `P`; nothing is deleted.
    A,
    /// Deletes auxiliary arcs.
    B,
    /// Both endpoints on one boundary arc, which splits.
    C,
    /// Both endpoints on one Γ-arc, which splits.
    D,
    /// An endpoint on Γ, or Γ-arcs deleted.
    E,
    /// `P` already has an arc containing the core.
    F,
}

/// Options for one insertion.
#[derive(Clone, Copy, Debug, Default)]
pub struct InsertOptions {
    /// Also run the full-boundary scan in every region and fail on
    /// disagreement with the counterclockwise scan.
    pub cross_check: bool,
    /// Collect merge-curve property violations.
    pub audit: bool,
}

/// A position on `P` where `J(s, s_β)` (or the Γ transition) meets it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    /// Index of the walked window segment.
    pub seg: usize,
    pub arc: ArcId,
    /// Position in the arc's piece coordinates.
    pub pos: f64,
    /// Ordering key: parameter on `J(s, s_β)`, or unrolled angle.
    pub order: f64,
    pub vertex: Vertex,
    /// Fine Γ piece holding the hit and the offset in it (nearest Γ-arcs).
    pub fine: Option<(HeId, f64)>,
}

/// The located arc β.
#[derive(Clone, Debug)]
pub struct Beta {
    pub core: usize,
    pub site: SiteIdx,
    pub piece: Piece,
    pub x: Hit,
    pub y: Hit,
    pub case: InsertionCase,
    /// Arcs of `P` strictly between `x` and `y`.
    pub removed: Vec<ArcId>,
    /// Fine arcs walked between the two hint arcs.
    pub d_beta: usize,
    /// Case (f): the arc of `P` that already contains the core.
    pub existing: Option<ArcId>,
    shape: Shape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    /// `x` and `y` on different arcs.
    Plain,
    /// `x` before `y` on the same arc: the arc splits.
    Split,
    /// `y` before `x` on the same arc, everything else is removed.
    Wrap,
    /// The arc is all of Γ.
    Circle,
}

/// A place on a region boundary: half-edge and position on its piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Loc {
    pub he: HeId,
    pub pos: f64,
}

/// An ordinary edge of the merge curve, crossing one region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Visit {
    pub region: ArcId,
    pub entry: Loc,
    pub exit: Loc,
    /// Stretch of `J(s_region, s_β)` (side-oriented) inside the region.
    pub piece: Piece,
}

/// A clockwise walk along Γ, from `start` back by `len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaRun {
    pub start: f64,
    pub len: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Edge(Visit),
    Gamma(GammaRun),
}

/// The traced path `J(β)` from `x` to `y`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MergeCurve {
    pub steps: Vec<Step>,
    pub vertices: Vec<Vertex>,
}

impl MergeCurve {
    pub fn visits(&self) -> impl Iterator<Item = &Visit> {
        self.steps.iter().filter_map(|s| match s {
            Step::Edge(v) => Some(v),
            Step::Gamma(_) => None,
        })
    }

    pub fn gamma_steps(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Gamma(_))).count()
    }
}

/// Where tracing starts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Start {
    /// Inside a region, leaving from a point of its boundary.
    Region { region: ArcId, entry: Loc, t: f64 },
    /// On a fine Γ piece; the trace walks clockwise.
    Gamma { he: HeId, off: f64 },
}

/// Counters of one insertion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InsertStats {
    pub case: Option<InsertionCase>,
    pub d_beta: usize,
    /// Half-edges examined while scanning region boundaries.
    pub scanned: usize,
    /// Fine Γ pieces walked by Γ steps.
    pub gamma_walked: usize,
    pub merge_steps: usize,
    pub p_len: usize,
    pub violations: Vec<String>,
}

impl InsertStats {
    /// Total tracing work.
    pub fn traced(&self) -> usize {
        self.scanned + self.gamma_walked + self.merge_steps
    }
}

pub(crate) struct Ctx<'a> {
    pub sys: &'a SiteSystem,
    pub tol: f64,
    pub atol: f64,
    /// Separation below which two crossings of the traced curve are taken to
    /// be the same point. Much tighter than `tol`: inner vertices of large
    /// regions can crowd to within `1e-7` of each other.
    pub sharp: f64,
}

impl<'a> Ctx<'a> {
    pub fn new(sys: &'a SiteSystem) -> Self {
        Ctx { sys, tol: sys.tol().abs() * 2.0, atol: sys.tol().angle() * 100.0, sharp: sys.tol().abs() * 1e-2 }
    }
}

/// Start and end positions of a piece.
fn piece_bounds(p: &Piece) -> (f64, f64) {
    p.range()
}

/// Position of a core arc's endpoints in its containing arc.
fn core_span(ctx: &Ctx, arc: &Piece, core: &Piece) -> (f64, f64) {
    match (*arc, *core) {
        (Piece::Curve { .. }, Piece::Curve { t0, t1, .. }) => (t0, t1),
        (Piece::Gamma { from, len }, Piece::Gamma { from: cf, len: cl }) => {
            let off = angle_offset(from, len, cf, ctx.atol).unwrap_or(0.0);
            (off, (off + cl).min(len))
        }
        _ => (0.0, 0.0),
    }
}

fn diverged(reason: &str, steps: usize) -> InsertError {
    InsertError::TraceDiverged { reason: reason.to_string(), steps }
}

/// Fine Γ pieces of Γ-arc `g`, counterclockwise.
pub(crate) fn fine_pieces(vl: &VoronoiLike, g: ArcId) -> Result<Vec<HeId>, InsertError> {
    let prev = vl.arcs[g].prev;
    let start = vl.arcs[prev].he.ok_or_else(|| diverged("Γ-arc not preceded by a boundary arc", 0))?;
    let mut out = Vec::new();
    let mut h = vl.hes[start].next;
    loop {
        if vl.hes[h].role != Role::Gamma {
            return Err(diverged("fine Γ walk left the curve at infinity", out.len()));
        }
        out.push(h);
        let n = vl.hes[h].next;
        match vl.hes[n].role {
            Role::Boundary => return Ok(out),
            Role::Edge => {
                let tw = vl.hes[n].twin.ok_or_else(|| diverged("edge without twin", out.len()))?;
                h = vl.hes[tw].next;
            }
            Role::Gamma => return Err(diverged("consecutive Γ pieces in one region", out.len())),
        }
        if out.len() > vl.hes.len() {
            return Err(diverged("fine Γ walk does not terminate", out.len()));
        }
    }
}

/// Whether Γ interval `outer` covers `inner`.
fn covers_gamma(atol: f64, outer: &Piece, inner: &Piece) -> bool {
    match (*outer, *inner) {
        (Piece::Gamma { from, len }, Piece::Gamma { from: f2, len: l2 }) => {
            len >= TAU - 1e-12 || angle_offset(from, len, f2, atol).is_some_and(|off| off + l2 <= len + atol)
        }
        _ => false,
    }
}

fn covers_curve(tol: f64, outer: &Piece, inner: &Piece) -> bool {
    match (*outer, *inner) {
        (Piece::Curve { t0, t1, .. }, Piece::Curve { t0: c0, t1: c1, .. }) => {
            t0 <= c0 + param_tol(tol, c0) && t1 >= c1 - param_tol(tol, c1)
        }
        _ => false,
    }
}

/// Window of `P` from the end of core `hint.0` to the start of core `hint.1`,
/// as `(arc, lo, hi)` segments.
fn window(ctx: &Ctx, vl: &VoronoiLike, hint: (usize, usize)) -> Result<Vec<(ArcId, f64, f64)>, InsertError> {
    let arc_a = vl.core_arc[hint.0].ok_or(InsertError::CoreNotInDomain(hint.0))?;
    let arc_g = vl.core_arc[hint.1].ok_or(InsertError::CoreNotInDomain(hint.1))?;
    let pos_a = core_span(ctx, &vl.arcs[arc_a].piece, &vl.cores[hint.0].piece).1;
    let pos_g = core_span(ctx, &vl.arcs[arc_g].piece, &vl.cores[hint.1].piece).0;
    let mut segs = Vec::new();
    if arc_a == arc_g && hint.0 != hint.1 && pos_a <= pos_g {
        segs.push((arc_a, pos_a, pos_g));
        return Ok(segs);
    }
    segs.push((arc_a, pos_a, piece_bounds(&vl.arcs[arc_a].piece).1));
    let mut a = vl.arcs[arc_a].next;
    while a != arc_g {
        let (lo, hi) = piece_bounds(&vl.arcs[a].piece);
        segs.push((a, lo, hi));
        a = vl.arcs[a].next;
        if segs.len() > vl.arcs.len() + 1 {
            return Err(InsertError::CoreNotInDomain(hint.1));
        }
    }
    segs.push((arc_g, piece_bounds(&vl.arcs[arc_g].piece).0, pos_g));
    Ok(segs)
}

/// Locates β for core `core`, whose inserted neighbors in the core sequence
/// are `hint = (α, γ)`.
pub fn compute_beta(sys: &SiteSystem, vl: &VoronoiLike, core: usize, hint: (usize, usize)) -> Result<Beta, InsertError> {
    let ctx = Ctx::new(sys);
    let c = vl.cores[core];
    let b = c.site;
    let segs = window(&ctx, vl, hint)?;
    let start_theta = match vl.arcs[segs[0].0].piece {
        Piece::Gamma { from, .. } => from + segs[0].1,
        Piece::Curve { .. } => 0.0,
    };
    let j_sb = vl.center.map(|s| sys.bisector(s, b));

    let mut hits: Vec<Hit> = Vec::new();
    let mut enters: Vec<Hit> = Vec::new();
    let mut leaves: Vec<Hit> = Vec::new();
    let mut d_beta = 0;
    // Window length before the current segment.
    let mut acc = 0.0;
    for (k, &(arc, lo, hi)) in segs.iter().enumerate() {
        if k > 0 {
            acc += segs[k - 1].2 - segs[k - 1].1;
        }
        let a = &vl.arcs[arc];
        if a.kind == ArcKind::Gamma {
            let fine = fine_pieces(vl, arc)?;
            d_beta += fine.len();
            let j = j_sb.expect("Γ-arcs only occur in the nearest setting");
            let Piece::Gamma { from, .. } = a.piece else { unreachable!() };
            for (end, order) in [(End::Minus, f64::NEG_INFINITY), (End::Plus, f64::INFINITY)] {
                let d = j.direction(end);
                if let Some(off) = angle_offset(from + lo, hi - lo, d.theta(), ctx.atol) {
                    let fine_at = fine.iter().find_map(|&h| match vl.hes[h].piece {
                        Piece::Gamma { from, len } => angle_offset(from, len, d.theta(), ctx.atol).map(|o| (h, o)),
                        Piece::Curve { .. } => None,
                    });
                    hits.push(Hit { seg: k, arc, pos: lo + off, order, vertex: Vertex::Gamma(d), fine: fine_at });
                }
            }
            continue;
        }
        d_beta += 1;
        let q = a.site.expect("boundary arcs carry a site");
        if q == b {
            if covers_curve(ctx.tol, &a.piece, &c.piece) || covers_gamma(ctx.atol, &a.piece, &c.piece) {
                let (al, ah) = piece_bounds(&a.piece);
                let at = |pos| Hit { seg: k, arc, pos, order: 0.0, vertex: a.piece.point_at(sys, pos), fine: None };
                return Ok(Beta {
                    core,
                    site: b,
                    piece: a.piece,
                    x: at(al),
                    y: at(ah),
                    case: InsertionCase::F,
                    removed: Vec::new(),
                    d_beta,
                    existing: Some(arc),
                    shape: Shape::Plain,
                });
            }
            continue;
        }
        match vl.mode {
            Mode::Nearest => {
                let s = vl.center.expect("nearest setting needs a center");
                let jq = sys.bisector(s, q);
                let j = j_sb.unwrap();
                for z in sys.triple(s, q, b)? {
                    let t = jq.param(z);
                    if t >= lo - param_tol(ctx.tol, lo) && t <= hi + param_tol(ctx.tol, hi) {
                        let pos = t.clamp(lo, hi);
                        hits.push(Hit { seg: k, arc, pos, order: j.param(z), vertex: Vertex::Finite(z), fine: None });
                    }
                }
            }
            Mode::Farthest => {
                let Piece::Gamma { from, .. } = a.piece else { unreachable!() };
                let j = sys.bisector(b, q);
                for (end, list) in [(End::Minus, &mut enters), (End::Plus, &mut leaves)] {
                    let d = j.direction(end);
                    if let Some(off) = angle_offset(from + lo, hi - lo, d.theta(), ctx.atol) {
                        let order = acc + off;
                        list.push(Hit { seg: k, arc, pos: lo + off, order, vertex: Vertex::Gamma(d), fine: None });
                    }
                }
            }
        }
    }

    let before = |p: &Hit, q: &Hit| p.seg < q.seg || (p.seg == q.seg && p.pos < q.pos);
    let (x, y) = match vl.mode {
        Mode::Nearest => {
            let Piece::Curve { t0: c0, t1: c1, .. } = c.piece else { unreachable!() };
            let x = hits.iter().filter(|h| h.order <= c0 + param_tol(ctx.tol, c0)).max_by(|p, q| p.order.total_cmp(&q.order));
            let y = hits.iter().filter(|h| h.order >= c1 - param_tol(ctx.tol, c1)).min_by(|p, q| p.order.total_cmp(&q.order));
            match (x, y) {
                (Some(&x), Some(&y)) if before(&x, &y) => (x, y),
                _ => return Err(InsertError::CoreNotInDomain(core)),
            }
        }
        Mode::Farthest => {
            let x = enters.iter().copied().reduce(|p, q| if before(&q, &p) { q } else { p });
            let y = leaves.iter().copied().reduce(|p, q| if before(&p, &q) { q } else { p });
            let Piece::Gamma { from: cf, len: cl } = c.piece else { unreachable!() };
            let span: f64 = segs.iter().map(|s| s.2 - s.1).sum();
            let u0 = angle_offset(start_theta, span, cf, ctx.atol).ok_or(InsertError::CoreNotInDomain(core))?;
            match (x, y) {
                (Some(x), Some(y)) if before(&x, &y) && x.order <= u0 + ctx.atol && y.order >= u0 + cl - ctx.atol => (x, y),
                _ => return Err(InsertError::CoreNotInDomain(core)),
            }
        }
    };

    let piece = match (x.vertex, y.vertex, vl.mode) {
        (Vertex::Gamma(dx), Vertex::Gamma(dy), Mode::Farthest) => Piece::gamma_between(dx, dy),
        _ => Piece::curve(vl.center.unwrap(), b, x.order, y.order),
    };
    let removed: Vec<ArcId> = segs[(x.seg + 1).min(y.seg)..y.seg].iter().map(|s| s.0).filter(|&a| a != x.arc).collect();
    for &r in &removed {
        if vl.arcs[r].kind == ArcKind::Original {
            return Err(InsertError::OriginalDeleted { core, arc: r });
        }
    }
    let xa = &vl.arcs[x.arc];
    let shape = if x.arc != y.arc {
        Shape::Plain
    } else if xa.kind != ArcKind::Gamma && matches!(xa.piece, Piece::Gamma { len, .. } if len >= TAU - 1e-12) {
        Shape::Circle
    } else if x.seg == y.seg {
        Shape::Split
    } else {
        Shape::Wrap
    };
    let on_gamma = |h: &Hit| vl.arcs[h.arc].kind == ArcKind::Gamma;
    let case = match shape {
        Shape::Split if on_gamma(&x) => InsertionCase::D,
        Shape::Split | Shape::Circle => InsertionCase::C,
        _ if on_gamma(&x) || on_gamma(&y) || removed.iter().any(|&r| vl.arcs[r].kind == ArcKind::Gamma) => InsertionCase::E,
        _ if !removed.is_empty() => InsertionCase::B,
        _ => InsertionCase::A,
    };
    if vl.mode == Mode::Farthest && matches!(case, InsertionCase::D | InsertionCase::E) {
        return Err(InsertError::FarthestCase(case));
    }
    Ok(Beta { core, site: b, piece, x, y, case, removed, d_beta, existing: None, shape })
}

/// The first tracing position for a located β.
pub fn find_start(sys: &SiteSystem, vl: &VoronoiLike, beta: &Beta) -> Result<Start, InsertError> {
    let x = beta.x;
    let arc = &vl.arcs[x.arc];
    if arc.kind == ArcKind::Gamma {
        let (he, off) = x.fine.ok_or_else(|| diverged("start point on Γ has no fine piece", 0))?;
        return Ok(Start::Gamma { he, off });
    }
    let he = arc.he.expect("boundary arcs own a region");
    let (ca, cb) = vl.mode.side_curve(arc.site.unwrap(), beta.site);
    let t = match x.vertex {
        Vertex::Finite(z) => sys.bisector(ca, cb).param(z),
        Vertex::Gamma(_) => f64::NEG_INFINITY,
    };
    Ok(Start::Region { region: x.arc, entry: Loc { he, pos: x.pos }, t })
}

/// A crossing of the traced curve with a region boundary.
#[derive(Clone, Copy, Debug)]
struct Crossing {
    he: HeId,
    pos: f64,
    t: f64,
    vertex: Vertex,
}

/// Crossings of `C = J(side_curve(q, b))` with half-edge `h` of a region of `q`.
fn crossings(ctx: &Ctx, vl: &VoronoiLike, h: HeId, q: SiteIdx, b: SiteIdx) -> Result<SmallVec<[Crossing; 2]>, InsertError> {
    let (ca, cb) = vl.mode.side_curve(q, b);
    let c = ctx.sys.bisector(ca, cb);
    let mut out = SmallVec::new();
    match vl.hes[h].piece {
        Piece::Curve { a, b: bb, t0, t1 } => {
            let r = if a == q { bb } else { a };
            if r == b || a == b || bb == b {
                return Ok(out);
            }
            let e = ctx.sys.bisector(a, bb);
            for z in ctx.sys.triple(q, r, b)? {
                let pos = e.param(z);
                if pos >= t0 - param_tol(ctx.tol, t0) && pos <= t1 + param_tol(ctx.tol, t1) {
                    out.push(Crossing { he: h, pos: pos.clamp(t0, t1), t: c.param(z), vertex: Vertex::Finite(z) });
                }
            }
            out.sort_by(|p: &Crossing, q: &Crossing| p.pos.total_cmp(&q.pos));
        }
        Piece::Gamma { from, len } => {
            let d = c.direction(End::Plus);
            if let Some(pos) = angle_offset(from, len, d.theta(), ctx.atol) {
                out.push(Crossing { he: h, pos, t: f64::INFINITY, vertex: Vertex::Gamma(d) });
            }
        }
    }
    Ok(out)
}

fn later(ctx: &Ctx, t: f64, t_cur: f64) -> bool {
    t > t_cur + param_tol(ctx.sharp, t_cur)
}

/// Crossings on the entry half-edge other than the entry point itself.
///
/// On a curve piece the entry point is one of the crossings, recomputed from
/// a different site triple; it is dropped structurally as the crossing
/// nearest to the entry position rather than by a tolerance, since far-away
/// vertices of nearly parallel bisectors carry large absolute rounding.
fn entry_crossings(ctx: &Ctx, vl: &VoronoiLike, entry: Loc, q: SiteIdx, b: SiteIdx) -> Result<SmallVec<[Crossing; 2]>, InsertError> {
    let mut first = crossings(ctx, vl, entry.he, q, b)?;
    if !vl.hes[entry.he].piece.is_gamma() && !first.is_empty() {
        let k = (0..first.len()).min_by(|&i, &j| (first[i].pos - entry.pos).abs().total_cmp(&(first[j].pos - entry.pos).abs())).unwrap();
        first.remove(k);
    }
    Ok(first)
}

/// The first crossing counterclockwise from the entry that lies further
/// along the curve, and the number of half-edges examined.
fn scan_ccw(ctx: &Ctx, vl: &VoronoiLike, region: ArcId, entry: Loc, t_cur: f64, b: SiteIdx) -> Result<(Option<Crossing>, usize), InsertError> {
    let q = vl.region_site(region);
    let ptol = if vl.hes[entry.he].piece.is_gamma() { ctx.atol } else { 0.0 };
    let mut examined = 1;
    let first = entry_crossings(ctx, vl, entry, q, b)?;
    if let Some(c) = first.iter().find(|c| c.pos > entry.pos + ptol && later(ctx, c.t, t_cur)) {
        return Ok((Some(*c), examined));
    }
    let mut h = vl.hes[entry.he].next;
    while h != entry.he {
        examined += 1;
        if let Some(c) = crossings(ctx, vl, h, q, b)?.into_iter().find(|c| later(ctx, c.t, t_cur)) {
            return Ok((Some(c), examined));
        }
        h = vl.hes[h].next;
        if examined > vl.hes.len() + 1 {
            return Err(diverged("region cycle does not close", examined));
        }
    }
    let wrapped = first.iter().find(|c| c.pos < entry.pos - ptol && later(ctx, c.t, t_cur)).copied();
    Ok((wrapped, examined))
}

/// The crossing of smallest parameter beyond `t_cur` over the whole cycle.
fn scan_full(ctx: &Ctx, vl: &VoronoiLike, region: ArcId, entry: Loc, t_cur: f64, b: SiteIdx) -> Result<(Option<Crossing>, usize), InsertError> {
    let q = vl.region_site(region);
    let mut best: Option<Crossing> = None;
    let mut examined = 0;
    let mut h = entry.he;
    loop {
        examined += 1;
        let found = if h == entry.he { entry_crossings(ctx, vl, entry, q, b)? } else { crossings(ctx, vl, h, q, b)? };
        for c in found {
            if later(ctx, c.t, t_cur) && best.is_none_or(|o| c.t < o.t) {
                best = Some(c);
            }
        }
        h = vl.hes[h].next;
        if h == entry.he {
            break;
        }
        if examined > vl.hes.len() + 1 {
            return Err(diverged("region cycle does not close", examined));
        }
    }
    Ok((best, examined))
}

enum Cursor {
    Region { region: ArcId, entry: Loc, t: f64 },
    /// Walking clockwise on fine piece `he` from offset `off`.
    Gamma { he: HeId, off: f64 },
}

/// Traces `J(β)` from `x` to `y`.
fn trace(ctx: &Ctx, vl: &VoronoiLike, beta: &Beta, start: Start, opts: InsertOptions, stats: &mut InsertStats) -> Result<MergeCurve, InsertError> {
    let b = beta.site;
    let split = match beta.shape {
        Shape::Split | Shape::Circle if vl.arcs[beta.x.arc].kind != ArcKind::Gamma => Some(beta.x.arc),
        _ => None,
    };
    let limit = 4 * vl.hes.len() + 16;
    let mut curve = MergeCurve { steps: Vec::new(), vertices: vec![beta.x.vertex] };
    let mut cur = match start {
        Start::Region { region, entry, t } => Cursor::Region { region, entry, t },
        Start::Gamma { he, off } => Cursor::Gamma { he, off },
    };
    let vtol = ctx.tol * 10.0;
    loop {
        if curve.steps.len() + stats.gamma_walked > limit {
            return Err(diverged("step limit exceeded", curve.steps.len()));
        }
        match cur {
            Cursor::Region { region, entry, t } => {
                let (hit, n) = if Some(region) == split {
                    scan_full(ctx, vl, region, entry, t, b)?
                } else {
                    scan_ccw(ctx, vl, region, entry, t, b)?
                };
                stats.scanned += n;
                if opts.cross_check {
                    let (other, _) = if Some(region) == split {
                        scan_ccw(ctx, vl, region, entry, t, b)?
                    } else {
                        scan_full(ctx, vl, region, entry, t, b)?
                    };
                    let agree = match (hit, other) {
                        (Some(p), Some(q)) => p.he == q.he && p.vertex.close_to(&q.vertex, vtol, ctx.atol),
                        (None, None) => true,
                        _ => false,
                    };
                    if !agree && Some(region) != split {
                        return Err(InsertError::ScanMismatch(region));
                    }
                }
                let hit = hit.ok_or_else(|| diverged("no exit from region", curve.steps.len()))?;
                let q = vl.region_site(region);
                let (ca, cb) = vl.mode.side_curve(q, b);
                curve.steps.push(Step::Edge(Visit {
                    region,
                    entry,
                    exit: Loc { he: hit.he, pos: hit.pos },
                    piece: Piece::curve(ca, cb, t, hit.t),
                }));
                curve.vertices.push(hit.vertex);
                stats.merge_steps += 1;
                let he = &vl.hes[hit.he];
                match he.role {
                    Role::Boundary => {
                        if region == beta.y.arc && hit.vertex.close_to(&beta.y.vertex, vtol, ctx.atol) {
                            return Ok(curve);
                        }
                        return Err(diverged("merge curve left the domain", curve.steps.len()));
                    }
                    Role::Edge => {
                        let tw = he.twin.ok_or_else(|| diverged("edge without twin", curve.steps.len()))?;
                        let Vertex::Finite(z) = hit.vertex else {
                            return Err(diverged("edge crossing at infinity", curve.steps.len()));
                        };
                        let r2 = vl.hes[tw].region;
                        let (ea, eb) = vl.hes[tw].piece.sites().expect("edges are curves");
                        let (ra, rb) = vl.mode.side_curve(vl.region_site(r2), b);
                        cur = Cursor::Region {
                            region: r2,
                            entry: Loc { he: tw, pos: ctx.sys.bisector(ea, eb).param(z) },
                            t: ctx.sys.bisector(ra, rb).param(z),
                        };
                    }
                    Role::Gamma => cur = Cursor::Gamma { he: hit.he, off: hit.pos },
                }
            }
            Cursor::Gamma { he, off } => match walk_gamma(ctx, vl, beta, he, off, &mut curve, stats)? {
                Some(next) => cur = next,
                None => return Ok(curve),
            },
        }
    }
}

/// One clockwise walk along Γ. Returns where tracing resumes, or `None` on
/// reaching `y`. The walk may re-enter the region it left.
fn walk_gamma(
    ctx: &Ctx,
    vl: &VoronoiLike,
    beta: &Beta,
    mut he: HeId,
    mut off: f64,
    curve: &mut MergeCurve,
    stats: &mut InsertStats,
) -> Result<Option<Cursor>, InsertError> {
    let Piece::Gamma { from, .. } = vl.hes[he].piece else {
        return Err(diverged("Γ walk started off Γ", curve.steps.len()));
    };
    let start = normalize_angle(from + off);
    let mut len = 0.0;
    let mut first = true;
    let y_dir = match (beta.y.vertex, vl.arcs[beta.y.arc].kind) {
        (Vertex::Gamma(d), ArcKind::Gamma) => Some(d),
        _ => None,
    };
    loop {
        stats.gamma_walked += 1;
        if stats.gamma_walked > 4 * vl.hes.len() + 16 {
            return Err(diverged("Γ walk does not terminate", curve.steps.len()));
        }
        let Piece::Gamma { from, .. } = vl.hes[he].piece else {
            return Err(diverged("Γ walk reached a curve piece", curve.steps.len()));
        };
        let region = vl.hes[he].region;
        let y_off = y_dir.and_then(|d| angle_offset(from, off, d.theta(), ctx.atol));
        let entry = {
            let (ca, cb) = vl.mode.side_curve(vl.region_site(region), beta.site);
            let d = ctx.sys.bisector(ca, cb).direction(End::Minus);
            angle_offset(from, off, d.theta(), ctx.atol).filter(|&o| !first || o < off - ctx.atol).map(|o| (o, d))
        };
        match (y_off, entry) {
            (Some(yo), e) if e.is_none_or(|(eo, _)| yo >= eo) => {
                curve.steps.push(Step::Gamma(GammaRun { start, len: len + off - yo }));
                curve.vertices.push(beta.y.vertex);
                return Ok(None);
            }
            (_, Some((eo, d))) => {
                curve.steps.push(Step::Gamma(GammaRun { start, len: len + off - eo }));
                curve.vertices.push(Vertex::Gamma(d));
                return Ok(Some(Cursor::Region { region, entry: Loc { he, pos: eo }, t: f64::NEG_INFINITY }));
            }
            _ => {}
        }
        len += off;
        let p = vl.hes[he].prev;
        if vl.hes[p].role != Role::Edge {
            return Err(diverged("Γ walk left the boundary curve", curve.steps.len()));
        }
        let tw = vl.hes[p].twin.ok_or_else(|| diverged("edge without twin", curve.steps.len()))?;
        he = vl.hes[tw].prev;
        off = match vl.hes[he].piece {
            Piece::Gamma { len, .. } => len,
            Piece::Curve { .. } => return Err(diverged("Γ walk reached a curve piece", curve.steps.len())),
        };
        first = false;
    }
}

/// Consistency checks of a traced merge curve.
fn audit(ctx: &Ctx, vl: &VoronoiLike, beta: &Beta, curve: &MergeCurve) -> Vec<String> {
    let mut out = Vec::new();
    let vtol = ctx.tol * 10.0;
    let mut seen: HashMap<ArcId, usize> = HashMap::new();
    for (i, step) in curve.steps.iter().enumerate() {
        let (p, q) = (curve.vertices[i], curve.vertices[i + 1]);
        match step {
            Step::Edge(v) => {
                let Piece::Curve { t0, t1, .. } = v.piece else { unreachable!() };
                if t0 >= t1 {
                    out.push(format!("step {i}: parameter does not increase in region {}", v.region));
                }
                if !v.piece.start(ctx.sys).close_to(&p, vtol, ctx.atol) || !v.piece.end(ctx.sys).close_to(&q, vtol, ctx.atol) {
                    out.push(format!("step {i}: edge does not join its neighbors"));
                }
                *seen.entry(v.region).or_default() += 1;
            }
            Step::Gamma(g) => {
                let (Vertex::Gamma(a), Vertex::Gamma(b)) = (p, q) else {
                    out.push(format!("step {i}: Γ step between finite vertices"));
                    continue;
                };
                if (ccw_delta(b.theta(), a.theta()) - g.len).abs() > ctx.atol * 10.0 && g.len < TAU - ctx.atol {
                    out.push(format!("step {i}: Γ step length mismatch"));
                }
            }
        }
    }
    let split = matches!(beta.shape, Shape::Split) && vl.arcs[beta.x.arc].kind != ArcKind::Gamma;
    for (r, n) in seen {
        let allowed = if split && r == beta.x.arc { 2 } else { 1 };
        if n > allowed {
            out.push(format!("region {r} visited {n} times"));
        }
    }
    let m = curve.vertices.len();
    for (i, v) in curve.vertices.iter().enumerate().take(m.saturating_sub(1)).skip(1) {
        for a in vl.region_arcs() {
            let p = &vl.arcs[a].piece;
            if p.locate(ctx.sys, v, vtol, ctx.atol).is_some_and(|t| v.close_to(&p.point_at(ctx.sys, t), vtol, ctx.atol)) {
                out.push(format!("intermediate vertex {i} lies on boundary arc {a}"));
            }
        }
    }
    if let (Some(s), Piece::Curve { t0: b0, t1: b1, .. }) = (vl.center, beta.piece) {
        let j = ctx.sys.bisector(s, beta.site);
        for v in curve.visits() {
            let Piece::Curve { a: q, t0, t1, .. } = v.piece else { continue };
            let jq = ctx.sys.bisector(q, beta.site);
            for z in ctx.sys.triple(s, q, beta.site).unwrap_or_default() {
                let (tb, tq) = (j.param(z), jq.param(z));
                let inside = |t: f64, lo: f64, hi: f64| t > lo + param_tol(ctx.tol, lo) && t < hi - param_tol(ctx.tol, hi);
                if inside(tb, b0, b1) && inside(tq, t0, t1) {
                    out.push(format!("merge curve crosses the interior of β in region {}", v.region));
                }
            }
        }
    }
    if !curve.vertices.last().is_some_and(|v| v.close_to(&beta.y.vertex, vtol, ctx.atol)) {
        out.push("merge curve does not end at y".to_string());
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= param_tol(tol, a)
}

/// Splits half-edge `h` at position `rel` of its piece; returns the new right part.
fn split_he(vl: &mut VoronoiLike, h: HeId, rel: f64) -> HeId {
    let p = vl.hes[h].piece;
    let (lo, hi) = p.range();
    let (role, region, next) = (vl.hes[h].role, vl.hes[h].region, vl.hes[h].next);
    vl.hes[h].piece = p.sub(lo, rel);
    let r = vl.push_he(p.sub(rel, hi), role, region);
    vl.link_he(r, next);
    vl.link_he(h, r);
    r
}

/// Fragments of half-edges after cutting, keyed by the original id, as
/// `(start position, fragment)` in order.
type Fragments = HashMap<HeId, Vec<(f64, HeId)>>;

fn cut_all(ctx: &Ctx, vl: &mut VoronoiLike, curve: &MergeCurve) -> Fragments {
    let mut cuts: HashMap<HeId, Vec<f64>> = HashMap::new();
    for v in curve.visits() {
        cuts.entry(v.entry.he).or_default().push(v.entry.pos);
        cuts.entry(v.exit.he).or_default().push(v.exit.pos);
    }
    let mut frags = Fragments::new();
    let mut ids: Vec<HeId> = cuts.keys().copied().collect();
    ids.sort_unstable();
    for h in ids {
        let mut cs = cuts.remove(&h).unwrap();
        cs.sort_by(f64::total_cmp);
        cs.dedup_by(|a, b| close(*a, *b, ctx.tol));
        let gamma = vl.hes[h].piece.is_gamma();
        let mut list = vec![(vl.hes[h].piece.range().0, h)];
        let (mut cur, mut base) = (h, 0.0);
        for c in cs {
            let r = split_he(vl, cur, if gamma { c - base } else { c });
            list.push((c, r));
            cur = r;
            if gamma {
                base = c;
            }
        }
        frags.insert(h, list);
    }
    // Re-pair twins of split edges.
    let split: Vec<HeId> = frags.keys().copied().collect();
    for h in split {
        let Some(tw) = vl.hes[h].twin else { continue };
        let mine: Vec<HeId> = frags[&h].iter().map(|f| f.1).collect();
        let theirs: Vec<HeId> = frags.get(&tw).map(|l| l.iter().map(|f| f.1).collect()).unwrap_or_else(|| vec![tw]);
        for &f in &mine {
            let (t0, t1) = vl.hes[f].piece.range();
            if let Some(&g) = theirs.iter().find(|&&g| {
                let (u0, u1) = vl.hes[g].piece.range();
                close(u0, -t1, ctx.tol) && close(u1, -t0, ctx.tol)
            }) {
                vl.set_twins(f, g);
            }
        }
    }
    frags
}

/// Fragments left and right of a cut location.
fn around(frags: &Fragments, at: Loc) -> (HeId, HeId) {
    let list = &frags[&at.he];
    let i = list
        .iter()
        .enumerate()
        .skip(1)
        .min_by(|a, b| (a.1 .0 - at.pos).abs().total_cmp(&(b.1 .0 - at.pos).abs()))
        .map(|(i, _)| i)
        .unwrap_or(1);
    (list[i - 1].1, list[i].1)
}

/// Marks the whole region cycle of arc `a` dead.
fn kill_region(vl: &mut VoronoiLike, a: ArcId) {
    for h in vl.cycle(a) {
        vl.hes[h].alive = false;
    }
}

/// Fuses Boundary fragments adjacent to the boundary half-edge of `a`.
fn merge_seam(ctx: &Ctx, vl: &mut VoronoiLike, a: ArcId) {
    let Some(h) = vl.arcs[a].he else { return };
    loop {
        let p = vl.hes[h].prev;
        if p == h || vl.hes[p].role != Role::Boundary || !vl.hes[p].piece.joins(&vl.hes[h].piece, ctx.tol, ctx.atol) {
            break;
        }
        vl.hes[h].piece = vl.hes[p].piece.fuse(&vl.hes[h].piece);
        let pp = vl.hes[p].prev;
        vl.hes[p].alive = false;
        if pp == p {
            vl.link_he(h, h);
        } else {
            vl.link_he(pp, h);
        }
    }
    loop {
        let n = vl.hes[h].next;
        if n == h || vl.hes[n].role != Role::Boundary || !vl.hes[h].piece.joins(&vl.hes[n].piece, ctx.tol, ctx.atol) {
            break;
        }
        vl.hes[h].piece = vl.hes[h].piece.fuse(&vl.hes[n].piece);
        let nn = vl.hes[n].next;
        vl.hes[n].alive = false;
        vl.link_he(h, nn);
    }
}

/// Moves cores of `a` into `w` when `w` contains them; arcs left without a
/// core become auxiliary.
fn redistribute(ctx: &Ctx, vl: &mut VoronoiLike, a: ArcId, w: ArcId) {
    let cores = std::mem::take(&mut vl.arcs[a].cores);
    for c in cores {
        let piece = vl.cores[c].piece;
        let wp = vl.arcs[w].piece;
        if covers_curve(ctx.tol, &wp, &piece) || covers_gamma(ctx.atol, &wp, &piece) {
            vl.arcs[w].cores.push(c);
            vl.core_arc[c] = Some(w);
        } else {
            vl.arcs[a].cores.push(c);
        }
    }
    for x in [a, w] {
        if vl.arcs[x].kind != ArcKind::Gamma {
            vl.arcs[x].kind = if vl.arcs[x].cores.is_empty() { ArcKind::Auxiliary } else { ArcKind::Original };
        }
    }
}

/// Splices `R(β)` into the diagram along the traced merge curve and updates `P`.
fn splice(ctx: &Ctx, vl: &mut VoronoiLike, beta: &Beta, curve: &MergeCurve) -> Result<ArcId, InsertError> {
    for &r in &beta.removed {
        kill_region(vl, r);
    }
    let frags = cut_all(ctx, vl, curve);
    let visits: Vec<Visit> = curve.visits().copied().collect();
    let ends: Vec<((HeId, HeId), (HeId, HeId))> = visits.iter().map(|v| (around(&frags, v.entry), around(&frags, v.exit))).collect();

    // Removed boundary parts run counterclockwise from each entry to the
    // nearest exit of the same region.
    for (i, v) in visits.iter().enumerate() {
        let stops: Vec<HeId> = visits
            .iter()
            .zip(&ends)
            .filter(|(w, _)| w.region == v.region)
            .map(|(_, e)| e.1 .0)
            .collect();
        let mut h = ends[i].0 .1;
        let mut n = 0;
        loop {
            vl.hes[h].alive = false;
            if stops.contains(&h) {
                break;
            }
            h = vl.hes[h].next;
            n += 1;
            if n > vl.hes.len() {
                return Err(diverged("removed boundary part does not reach an exit", i));
            }
        }
    }

    // The new arc and its region.
    let arc = vl.push_arc(ArcKind::Original, Some(beta.site), beta.piece);
    vl.arcs[arc].cores.push(beta.core);
    let bhe = vl.push_he(beta.piece, Role::Boundary, arc);
    vl.arcs[arc].he = Some(bhe);
    let mut last = bhe;
    let mut k = visits.len();
    for step in curve.steps.iter().rev() {
        let h = match *step {
            Step::Edge(v) => {
                k -= 1;
                let ((le, _), (_, rx)) = ends[k];
                let n = vl.push_he(v.piece, Role::Edge, v.region);
                vl.hes[le].alive = true;
                vl.hes[rx].alive = true;
                vl.link_he(le, n);
                vl.link_he(n, rx);
                let m = vl.push_he(v.piece.reversed(), Role::Edge, arc);
                vl.set_twins(n, m);
                m
            }
            Step::Gamma(g) => vl.push_he(Piece::gamma(g.start - g.len, g.len), Role::Gamma, arc),
        };
        vl.link_he(last, h);
        last = h;
    }
    vl.link_he(last, bhe);

    // Update P.
    let (x, y) = (beta.x, beta.y);
    let first_left = ends.first().map(|e| e.0 .0);
    let last_right = ends.last().map(|e| e.1 .1);
    for &r in &beta.removed {
        vl.kill_arc(r);
    }
    let xa = x.arc;
    let (lo, hi) = piece_bounds(&vl.arcs[xa].piece);
    match beta.shape {
        Shape::Plain => {
            let ya = y.arc;
            let (_, yhi) = piece_bounds(&vl.arcs[ya].piece);
            vl.arcs[xa].piece = vl.arcs[xa].piece.sub(lo, x.pos);
            vl.arcs[ya].piece = vl.arcs[ya].piece.sub(y.pos, yhi);
            if vl.arcs[xa].kind != ArcKind::Gamma {
                vl.arcs[xa].he = first_left;
            }
            if vl.arcs[ya].kind != ArcKind::Gamma {
                vl.arcs[ya].he = last_right;
            }
            vl.link_arcs(xa, arc);
            vl.link_arcs(arc, ya);
        }
        Shape::Split => {
            let old = vl.arcs[xa].clone();
            vl.arcs[xa].piece = old.piece.sub(lo, x.pos);
            let w = vl.push_arc(old.kind, old.site, old.piece.sub(y.pos, hi));
            if old.kind != ArcKind::Gamma {
                vl.arcs[xa].he = first_left;
                vl.arcs[w].he = last_right;
                for h in vl.cycle(w) {
                    vl.hes[h].region = w;
                }
                redistribute(ctx, vl, xa, w);
            }
            vl.link_arcs(w, old.next);
            vl.link_arcs(xa, arc);
            vl.link_arcs(arc, w);
        }
        Shape::Wrap => {
            vl.arcs[xa].piece = vl.arcs[xa].piece.sub(y.pos, x.pos);
            if vl.arcs[xa].kind != ArcKind::Gamma {
                vl.arcs[xa].he = last_right;
            }
            vl.link_arcs(xa, arc);
            vl.link_arcs(arc, xa);
        }
        Shape::Circle => {
            let (Vertex::Gamma(dx), Vertex::Gamma(dy)) = (x.vertex, y.vertex) else { unreachable!() };
            vl.arcs[xa].piece = Piece::gamma_between(dy, dx);
            vl.arcs[xa].he = first_left;
            vl.link_arcs(xa, arc);
            vl.link_arcs(arc, xa);
        }
    }
    let mut touched: Vec<ArcId> = visits.iter().map(|v| v.region).collect();
    touched.push(xa);
    touched.sort_unstable();
    touched.dedup();
    for a in touched {
        if vl.arcs[a].alive {
            merge_seam(ctx, vl, a);
        }
    }
    vl.head = arc;
    vl.core_arc[beta.core] = Some(arc);
    Ok(arc)
}

/// Inserts core `core` into `vl`, using its inserted neighbors `hint` to
/// locate the new arc.
pub fn insert(sys: &SiteSystem, vl: &mut VoronoiLike, core: usize, hint: (usize, usize), opts: InsertOptions) -> Result<(InsertStats, MergeCurve), InsertError> {
    let ctx = Ctx::new(sys);
    let beta = compute_beta(sys, vl, core, hint)?;
    let mut stats = InsertStats { case: Some(beta.case), d_beta: beta.d_beta, ..Default::default() };
    if let Some(a) = beta.existing {
        vl.arcs[a].cores.push(core);
        vl.arcs[a].kind = ArcKind::Original;
        vl.core_arc[core] = Some(a);
        stats.p_len = vl.live_arcs();
        return Ok((stats, MergeCurve::default()));
    }
    let start = find_start(sys, vl, &beta)?;
    let curve = trace(&ctx, vl, &beta, start, opts, &mut stats)?;
    if opts.audit {
        stats.violations = audit(&ctx, vl, &beta, &curve);
    }
    splice(&ctx, vl, &beta, &curve)?;
    stats.p_len = vl.live_arcs();
    Ok((stats, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{extract_core_sequence, Diagram};
    use crate::kernel::{Point, SiteKind, SiteRecord};
    use crate::oracle::{brute_clipped, brute_voronoi, compare_diagrams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sys(kind: SiteKind, pts: &[(f64, f64, f64)]) -> SiteSystem {
        let recs = pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, kind, p.0, p.1, p.2)).collect();
        SiteSystem::ingest(recs).unwrap()
    }

    /// Inserts all cores of `s` in sequence order and checks against the
    /// clipped brute-force diagram.
    fn sequential(sys: &SiteSystem, s: SiteIdx) -> Vec<InsertionCase> {
        let all: Vec<SiteIdx> = (0..sys.len()).collect();
        let full = brute_voronoi(sys, &all, Mode::Nearest).unwrap();
        let seq = extract_core_sequence(sys, &full, s).unwrap();
        let h = seq.h();
        let mut vl = VoronoiLike::initial(Mode::Nearest, Some(s), sys, seq.arcs.clone(), 0);
        let opts = InsertOptions { cross_check: true, audit: true };
        let mut cases = Vec::new();
        for i in 1..h {
            let (st, _) = insert(sys, &mut vl, i, (i - 1, 0), opts).unwrap_or_else(|e| panic!("core {i}: {e}"));
            assert!(st.violations.is_empty(), "{:?}", st.violations);
            cases.push(st.case.unwrap());
        }
        let want = Diagram { mode: Mode::Nearest, faces: brute_clipped(sys, s).unwrap() };
        let v = compare_diagrams(sys, &vl.to_diagram(), &want, 1e-6);
        assert!(v.isomorphic, "{:#?}", v.mismatches);
        cases
    }

    /// Inserts the cores of `s` in the order `perm`, with neighbors found by
    /// scanning the cyclic sequence.
    fn permuted(sys: &SiteSystem, s: SiteIdx, seed: u64) -> Result<Vec<InsertionCase>, String> {
        use rand::seq::SliceRandom;
        let all: Vec<SiteIdx> = (0..sys.len()).collect();
        let full = brute_voronoi(sys, &all, Mode::Nearest).unwrap();
        let Ok(seq) = extract_core_sequence(sys, &full, s) else { return Ok(Vec::new()) };
        let h = seq.h();
        let mut perm: Vec<usize> = (0..h).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut vl = VoronoiLike::initial(Mode::Nearest, Some(s), sys, seq.arcs.clone(), perm[0]);
        let mut done = vec![false; h];
        done[perm[0]] = true;
        let opts = InsertOptions { cross_check: true, audit: true };
        let mut cases = Vec::new();
        for &c in &perm[1..] {
            let prev = (1..h).map(|k| (c + h - k) % h).find(|&k| done[k]).unwrap();
            let next = (1..h).map(|k| (c + k) % h).find(|&k| done[k]).unwrap();
            let (st, _) = insert(sys, &mut vl, c, (prev, next), opts).map_err(|e| format!("core {c} of {h}: {e}"))?;
            if !st.violations.is_empty() {
                return Err(format!("{:?}", st.violations));
            }
            done[c] = true;
            cases.push(st.case.unwrap());
        }
        let want = Diagram { mode: Mode::Nearest, faces: brute_clipped(sys, s).unwrap() };
        let v = compare_diagrams(sys, &vl.to_diagram(), &want, 1e-6);
        if !v.isomorphic {
            return Err(format!("{:#?}", v.mismatches));
        }
        Ok(cases)
    }

    #[test]
    fn random_orders_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut ran, mut seen, mut failed) = (0, HashMap::new(), Vec::new());
        for kind in [SiteKind::EuclideanPoint, SiteKind::PowerCircle, SiteKind::ApolloniusPoint] {
            for trial in 0..40 {
                let n = rng.gen_range(6..40);
                let pts: Vec<(f64, f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>() * 0.03)).collect();
                let Ok(sy) = SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, kind, p.0, p.1, p.2)).collect()) else {
                    continue;
                };
                ran += 1;
                let center = if trial % 2 == 0 { 0 } else { (0..n).min_by(|&a, &b| (sy.pos(a) - Point::new(0.5, 0.5)).norm().total_cmp(&(sy.pos(b) - Point::new(0.5, 0.5)).norm())).unwrap() };
                match permuted(&sy, center, trial) {
                    Ok(cs) => cs.into_iter().for_each(|c| *seen.entry(c).or_insert(0usize) += 1),
                    Err(e) => failed.push(format!("{kind} trial {trial}: {e}")),
                }
            }
        }
        eprintln!("{ran} sets, cases {seen:?}");
        assert!(failed.is_empty(), "{} failures: {:#?}", failed.len(), &failed[..failed.len().min(5)]);
    }

    #[test]
    fn apollonius_orders_reach_every_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut ran, mut seen, mut failed) = (0, HashMap::new(), Vec::new());
        for trial in 0..400 {
            let n = rng.gen_range(5..30);
            let w = [0.05, 0.2, 0.4][trial % 3];
            let pts: Vec<(f64, f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>() * w)).collect();
            let Ok(sy) = SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, SiteKind::ApolloniusPoint, p.0, p.1, p.2)).collect()) else {
                continue;
            };
            for center in 0..n.min(4) {
                ran += 1;
                match permuted(&sy, center, trial as u64) {
                    Ok(cs) => cs.into_iter().for_each(|c| *seen.entry(c).or_insert(0usize) += 1),
                    Err(e) => failed.push(format!("trial {trial} center {center}: {e}")),
                }
            }
        }
        eprintln!("{ran} runs, cases {seen:?}");
        assert!(failed.is_empty(), "{} failures: {:#?}", failed.len(), &failed[..failed.len().min(5)]);
        for c in [InsertionCase::A, InsertionCase::B, InsertionCase::C, InsertionCase::D, InsertionCase::E, InsertionCase::F] {
            assert!(seen.contains_key(&c), "case {c:?} never occurred");
        }
    }

    #[test]
    fn square_around_center() {
        let s = sys(SiteKind::EuclideanPoint, &[(0.0, 0.0, 0.0), (1.0, 0.1, 0.0), (-0.1, 1.0, 0.0), (-1.0, -0.13, 0.0), (0.12, -1.05, 0.0)]);
        sequential(&s, 0);
    }

    #[test]
    fn unbounded_region_uses_gamma_arcs() {
        let s = sys(SiteKind::EuclideanPoint, &[(0.0, 0.0, 0.0), (1.0, 0.2, 0.0), (0.1, 1.0, 0.0), (2.0, 2.3, 0.0), (-0.7, 0.9, 0.0)]);
        sequential(&s, 0);
    }

    #[test]
    fn random_sets_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut ran, mut seen) = (0, HashMap::new());
        for kind in [SiteKind::EuclideanPoint, SiteKind::PowerCircle, SiteKind::ApolloniusPoint] {
            for _ in 0..20 {
                let n = rng.gen_range(5..12);
                let pts: Vec<(f64, f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>() * 0.03)).collect();
                let Ok(sy) = SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, kind, p.0, p.1, p.2)).collect()) else {
                    continue;
                };
                ran += 1;
                for c in sequential(&sy, 0) {
                    *seen.entry(c).or_insert(0usize) += 1;
                }
            }
        }
        eprintln!("{ran} sets, cases {seen:?}");
        assert!(ran > 30);
    }
}
