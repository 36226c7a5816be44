//! Diagnostic checks for boundary curves and Voronoi-like diagrams.
//!
//! Every check appends human-readable violations to a [`Report`] instead of
//! failing early, so one run lists everything that is wrong.

use std::f64::consts::TAU;

use super::full::{CoreArc, Elem};
use super::piece::{param_tol, Mode, Piece, Vertex};
use super::vld::{ArcKind, Role, VoronoiLike};
use crate::kernel::{angle_offset, Direction, End, Point, Side, SiteIdx, SiteSystem};
use crate::oracle::{brute_face, stratified_points, OracleError};
use crate::realize::{cycle_polygon, Frame, Polygon};

/// One arc of a boundary curve, detached from any diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveArc {
    pub kind: ArcKind,
    pub site: Option<SiteIdx>,
    pub piece: Piece,
    /// Ids of the core arcs this arc contains.
    pub cores: Vec<usize>,
}

/// A boundary curve in counterclockwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub mode: Mode,
    pub center: Option<SiteIdx>,
    pub arcs: Vec<CurveArc>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub violations: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }

    pub fn merge(&mut self, other: Report) {
        self.violations.extend(other.violations);
    }
}

/// The boundary curve `P` of a Voronoi-like diagram.
pub fn curve_of(vl: &VoronoiLike) -> Curve {
    let arcs = vl
        .boundary()
        .into_iter()
        .map(|a| {
            let arc = &vl.arcs[a];
            CurveArc { kind: arc.kind, site: arc.site, piece: arc.piece, cores: arc.cores.to_vec() }
        })
        .collect();
    Curve { mode: vl.mode, center: vl.center, arcs }
}

/// The nearest envelope of the bisectors between `s` and `others`: the
/// boundary of the region of `s` among `others` plus `s`. Arcs come out as
/// auxiliary; callers attach cores if they need them.
pub fn envelope(sys: &SiteSystem, s: SiteIdx, others: &[SiteIdx]) -> Result<Curve, OracleError> {
    let mut active: Vec<SiteIdx> = others.iter().copied().filter(|&q| q != s).collect();
    active.push(s);
    active.sort_unstable();
    let faces = brute_face(sys, &active, Mode::Nearest, s)?;
    let face = match faces.as_slice() {
        [f] => f,
        _ => return Err(OracleError::Linking(sys.site(s).id)),
    };
    let arcs = face
        .cycle
        .iter()
        .map(|e| match e.piece {
            Piece::Gamma { .. } => CurveArc { kind: ArcKind::Gamma, site: None, piece: e.piece, cores: Vec::new() },
            Piece::Curve { .. } => CurveArc { kind: ArcKind::Auxiliary, site: e.neighbor, piece: e.piece, cores: Vec::new() },
        })
        .collect();
    Ok(Curve { mode: Mode::Nearest, center: Some(s), arcs })
}

fn tols(sys: &SiteSystem) -> (f64, f64) {
    (sys.tol().abs() * 1e3, sys.tol().angle() * 1e3)
}

/// `z` lies in the closure of the side of `p` against `q`.
fn keeps(sys: &SiteSystem, mode: Mode, p: SiteIdx, q: SiteIdx, z: Point) -> bool {
    match mode {
        Mode::Nearest => sys.dominance(p, q, z) != Side::Second,
        Mode::Farthest => sys.dominance(p, q, z) != Side::First,
    }
}

fn keeps_at_infinity(sys: &SiteSystem, mode: Mode, p: SiteIdx, q: SiteIdx, w: Direction) -> bool {
    match mode {
        Mode::Nearest => sys.dominance_at_infinity(p, q, w) != Side::Second,
        Mode::Farthest => sys.dominance_at_infinity(p, q, w) != Side::First,
    }
}

/// A parameter a short way inside `[t0, t1]` from the end `at_end`.
fn nudge(sys: &SiteSystem, t0: f64, t1: f64, at_end: bool) -> f64 {
    let (v, toward) = if at_end { (t1, t0) } else { (t0, t1) };
    let mut h = 1e-4 * (sys.tol().scale + v.abs());
    if toward.is_finite() {
        h = h.min(0.25 * (t1 - t0));
    }
    if at_end {
        v - h
    } else {
        v + h
    }
}

/// Whether `alpha` (ending at a vertex) followed by `beta` (starting there)
/// traces the boundary of the region of `p` in the three-site diagram of `p`
/// and the two sites across the arcs.
///
/// Both pieces must be curves with `p` on their left, or, in the farthest
/// setting, Γ pieces owned by two sites. Returns `false` for pieces of the
/// same bisector.
pub fn validate_monotone_pair(sys: &SiteSystem, mode: Mode, p: SiteIdx, alpha: (&Piece, SiteIdx), beta: (&Piece, SiteIdx)) -> bool {
    let ((pa, qa), (pb, qb)) = (alpha, beta);
    if qa == qb {
        return false;
    }
    match (*pa, *pb) {
        (Piece::Curve { a: a1, b: b1, t0: s0, t1: s1 }, Piece::Curve { a: a2, b: b2, t0: u0, t1: u1 }) => {
            if !s1.is_finite() || !u0.is_finite() {
                return true;
            }
            let before = sys.bisector(a1, b1).point(nudge(sys, s0, s1, true));
            let after = sys.bisector(a2, b2).point(nudge(sys, u0, u1, false));
            keeps(sys, mode, p, qb, before) && keeps(sys, mode, p, qa, after)
        }
        (Piece::Gamma { from: f1, len: l1 }, Piece::Gamma { from: f2, len: l2 }) => {
            // Sites own the Γ pieces here; `p` is unused.
            let h1 = (0.25 * l1).min(1e-4);
            let h2 = (0.25 * l2).min(1e-4);
            let before = Direction::new(f1 + l1 - h1);
            let after = Direction::new(f2 + h2);
            keeps_at_infinity(sys, mode, qa, qb, before) && keeps_at_infinity(sys, mode, qb, qa, after)
        }
        _ => true,
    }
}

fn core_within(core: &Piece, arc: &Piece, tol: f64, atol: f64) -> bool {
    match (*core, *arc) {
        (Piece::Curve { a, b, t0, t1 }, Piece::Curve { a: a2, b: b2, t0: u0, t1: u1 }) => {
            a == a2 && b == b2 && t0 >= u0 - param_tol(tol, u0) && t1 <= u1 + param_tol(tol, u1)
        }
        (Piece::Gamma { from, len }, Piece::Gamma { from: f2, len: l2 }) => {
            if l2 >= TAU - atol {
                return true;
            }
            matches!(angle_offset(f2, l2, from, atol), Some(o) if o + len <= l2 + atol)
        }
        _ => false,
    }
}

/// Checks that `curve` is a boundary curve covering `covered`: consecutive
/// arcs join, belong to different bisectors and form monotone pairs; every
/// covered core sits inside exactly one original arc; arc kinds agree with
/// their contents.
pub fn validate_boundary_curve(sys: &SiteSystem, curve: &Curve, cores: &[CoreArc], covered: &[usize]) -> Report {
    let (tol, atol) = tols(sys);
    let mut rep = Report::default();
    let arcs = &curve.arcs;
    let n = arcs.len();
    if n == 0 {
        rep.push("empty boundary curve".into());
        return rep;
    }
    for (i, a) in arcs.iter().enumerate() {
        match (a.kind, a.site, a.piece.is_gamma()) {
            (ArcKind::Gamma, None, true) => {}
            (ArcKind::Gamma, _, _) => rep.push(format!("arc {i}: Γ-arc with a site or a curve piece")),
            (_, None, _) => rep.push(format!("arc {i}: boundary arc without a site")),
            (_, Some(_), g) if g != (curve.mode == Mode::Farthest) => rep.push(format!("arc {i}: piece type does not fit the mode")),
            _ => {}
        }
        if (a.kind == ArcKind::Original) != !a.cores.is_empty() {
            rep.push(format!("arc {i}: kind {:?} with {} cores", a.kind, a.cores.len()));
        }
        if let (Some(sa), Piece::Curve { a: pa, b: pb, .. }) = (a.site, a.piece) {
            if curve.center != Some(pa) || pb != sa {
                rep.push(format!("arc {i}: piece does not lie on the bisector of its site"));
            }
        }
        for &c in &a.cores {
            match cores.iter().find(|k| k.id == c) {
                Some(k) if Some(k.site) == a.site && core_within(&k.piece, &a.piece, tol, atol) => {}
                _ => rep.push(format!("arc {i}: does not contain core {c}")),
            }
        }
    }
    for &c in covered {
        let owners = arcs.iter().filter(|a| a.cores.contains(&c)).count();
        if owners != 1 {
            rep.push(format!("core {c}: contained in {owners} arcs"));
        }
    }
    if n == 1 {
        let full = matches!(arcs[0].piece, Piece::Gamma { len, .. } if len >= TAU - atol);
        if !full {
            rep.push("single arc that is not all of Γ".into());
        }
        return rep;
    }
    for i in 0..n {
        let (a, b) = (&arcs[i], &arcs[(i + 1) % n]);
        if !a.piece.end(sys).close_to(&b.piece.start(sys), tol, atol) {
            rep.push(format!("arcs {i}/{}: not joined", (i + 1) % n));
        }
        match (a.site, b.site) {
            (Some(x), Some(y)) if x == y => rep.push(format!("arcs {i}/{}: same bisector", (i + 1) % n)),
            (None, None) => rep.push(format!("arcs {i}/{}: consecutive Γ-arcs", (i + 1) % n)),
            (Some(x), Some(y)) => {
                let p = curve.center.unwrap_or(x);
                if !validate_monotone_pair(sys, curve.mode, p, (&a.piece, x), (&b.piece, y)) {
                    rep.push(format!("arcs {i}/{}: not a monotone pair", (i + 1) % n));
                }
            }
            _ => {}
        }
    }
    rep
}

/// Validator settings.
#[derive(Clone, Copy, Debug)]
pub struct VldOptions {
    /// Sample points for the coverage and containment checks; 0 skips them.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VldOptions {
    fn default() -> Self {
        VldOptions { samples: 2048, seed: 0 }
    }
}

/// Checks that `vl` is a Voronoi-like diagram of its boundary curve.
pub fn validate_vld(sys: &SiteSystem, vl: &VoronoiLike, opts: VldOptions) -> Report {
    let (tol, atol) = tols(sys);
    let mut rep = Report::default();
    let regions = vl.region_arcs();
    let mut seen = vec![false; vl.hes.len()];
    if vl.live_arcs() != vl.len() {
        rep.push(format!("{} live arcs but {} on the boundary", vl.live_arcs(), vl.len()));
    }

    for &a in &regions {
        let p = vl.region_site(a);
        let Some(bh) = vl.arcs[a].he else {
            rep.push(format!("arc {a}: no region"));
            continue;
        };
        if vl.hes[bh].role != Role::Boundary || !pieces_match(&vl.hes[bh].piece, &vl.arcs[a].piece, tol) {
            rep.push(format!("arc {a}: region does not start at the arc"));
        }
        let cyc = vl.cycle(a);
        let boundary = cyc.iter().filter(|&&h| vl.hes[h].role == Role::Boundary).count();
        if boundary != 1 {
            rep.push(format!("arc {a}: region has {boundary} boundary pieces"));
        }
        for (k, &h) in cyc.iter().enumerate() {
            let he = &vl.hes[h];
            if seen[h] {
                rep.push(format!("arc {a}: half-edge {h} in two cycles"));
            }
            seen[h] = true;
            if !he.alive || he.region != a {
                rep.push(format!("arc {a}: half-edge {h} is dead or owned by region {}", he.region));
            }
            let nx = &vl.hes[cyc[(k + 1) % cyc.len()]];
            if cyc.len() > 1 && !he.piece.end(sys).close_to(&nx.piece.start(sys), tol, atol) {
                rep.push(format!("arc {a}: half-edges {h} and {} do not join", cyc[(k + 1) % cyc.len()]));
            }
            if he.role == Role::Edge {
                check_edge(vl, a, p, h, tol, &mut rep);
            }
        }
        // The part of the boundary off the arc must be p-monotone.
        for k in 0..cyc.len() {
            let (h1, h2) = (cyc[k], cyc[(k + 1) % cyc.len()]);
            let (e1, e2) = (&vl.hes[h1], &vl.hes[h2]);
            if e1.role != Role::Edge || e2.role != Role::Edge || h1 == h2 {
                continue;
            }
            let (Some(r1), Some(r2)) = (vl.neighbor(h1), vl.neighbor(h2)) else { continue };
            let (q1, q2) = (vl.region_site(r1), vl.region_site(r2));
            if !validate_monotone_pair(sys, vl.mode, p, (&e1.piece, q1), (&e2.piece, q2)) {
                rep.push(format!("arc {a}: edges {h1}/{h2} break monotonicity"));
            }
        }
    }
    let stray = vl.hes.iter().enumerate().filter(|(h, he)| he.alive && !seen[*h] && regions.contains(&he.region)).count();
    if stray > 0 {
        rep.push(format!("{stray} live half-edges outside every region cycle"));
    }
    check_degrees(sys, vl, tol, &mut rep);
    if opts.samples > 0 {
        check_coverage(sys, vl, opts, &mut rep);
    }
    rep
}

fn check_edge(vl: &VoronoiLike, a: usize, p: SiteIdx, h: usize, tol: f64, rep: &mut Report) {
    let he = &vl.hes[h];
    let Some(t) = he.twin else {
        rep.push(format!("arc {a}: edge {h} has no twin"));
        return;
    };
    let tw = &vl.hes[t];
    if tw.twin != Some(h) || !tw.alive || tw.role != Role::Edge {
        rep.push(format!("arc {a}: edge {h} and {t} are not twins"));
        return;
    }
    let q = vl.region_site(tw.region);
    if q == p {
        rep.push(format!("arc {a}: edge {h} separates two regions of one site"));
    }
    if he.piece.sites() != Some(vl.mode.side_curve(p, q)) {
        rep.push(format!("arc {a}: edge {h} is not on the bisector with its neighbor"));
    }
    if !pieces_match(&he.piece, &tw.piece.reversed(), tol) {
        rep.push(format!("arc {a}: edge {h} and its twin cover different stretches"));
    }
}

fn pieces_match(a: &Piece, b: &Piece, tol: f64) -> bool {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= param_tol(tol, x);
    match (*a, *b) {
        (Piece::Curve { a: a1, b: b1, t0, t1 }, Piece::Curve { a: a2, b: b2, t0: u0, t1: u1 }) => {
            a1 == a2 && b1 == b2 && close(t0, u0) && close(t1, u1)
        }
        (Piece::Gamma { from, len }, Piece::Gamma { from: f2, len: l2 }) => {
            Direction::new(from).separation(Direction::new(f2)) <= tol && (len - l2).abs() <= tol
        }
        _ => false,
    }
}

/// Interior diagram vertices have degree three, vertices of `P` degree one.
fn check_degrees(sys: &SiteSystem, vl: &VoronoiLike, tol: f64, rep: &mut Report) {
    let mut verts: Vec<(Point, usize, bool)> = Vec::new();
    let bump = |z: Point, edge: bool, verts: &mut Vec<(Point, usize, bool)>| {
        let idx = match verts.iter().position(|v| v.0.dist(z) <= tol) {
            Some(i) => i,
            None => {
                verts.push((z, 0, false));
                verts.len() - 1
            }
        };
        if edge {
            verts[idx].1 += 1;
        } else {
            verts[idx].2 = true;
        }
    };
    for a in vl.region_arcs() {
        if let Vertex::Finite(z) = vl.arcs[a].piece.start(sys) {
            bump(z, false, &mut verts);
        }
        if let Vertex::Finite(z) = vl.arcs[a].piece.end(sys) {
            bump(z, false, &mut verts);
        }
        for h in vl.cycle(a) {
            if vl.hes[h].role == Role::Edge {
                if let Vertex::Finite(z) = vl.hes[h].piece.start(sys) {
                    bump(z, true, &mut verts);
                }
            }
        }
    }
    for (z, deg, on_p) in verts {
        let want = if on_p { 1 } else { 3 };
        // A vertex of P with no edge is allowed where P has a single region.
        if deg != want && !(on_p && deg == 0 && vl.region_arcs().len() == 1) {
            rep.push(format!("vertex ({:.6}, {:.6}) has degree {deg}, expected {want}", z.x, z.y));
        }
    }
}

/// Every sampled point of the domain lies in exactly one region, and in the
/// nearest setting inside the dominance region of the center against the
/// region's site.
fn check_coverage(sys: &SiteSystem, vl: &VoronoiLike, opts: VldOptions, rep: &mut Report) {
    let faces = vl.region_faces();
    let frame = Frame::enclosing(sys, faces.iter().map(|(_, f)| f), 4.0);
    let domain: Vec<Elem> = vl.boundary().into_iter().map(|a| Elem { piece: vl.arcs[a].piece, neighbor: vl.arcs[a].site }).collect();
    let dpoly = Polygon::new(cycle_polygon(sys, &domain, &frame));
    let polys: Vec<(SiteIdx, Polygon)> = faces.iter().map(|(_, f)| (f.site, Polygon::new(cycle_polygon(sys, &f.cycle, &frame)))).collect();
    let skip = 1e-6 * sys.tol().scale;
    let mut bad = 0usize;
    let mut outside_d = 0usize;
    for z in stratified_points(sys, opts.samples, opts.seed) {
        if z.dist(frame.center) >= frame.radius * 0.98 || dpoly.near(z, skip) {
            continue;
        }
        if polys.iter().any(|(_, poly)| poly.near(z, skip)) {
            continue;
        }
        let in_domain = dpoly.winding(z) > 0;
        let hits: Vec<SiteIdx> = polys.iter().filter(|(_, poly)| poly.winding(z) > 0).map(|(s, _)| *s).collect();
        if hits.len() != usize::from(in_domain) {
            bad += 1;
        }
        if let (Mode::Nearest, Some(s), [q]) = (vl.mode, vl.center, hits.as_slice()) {
            if sys.dominance(s, *q, z) == Side::Second {
                outside_d += 1;
            }
        }
    }
    if bad > 0 {
        rep.push(format!("{bad} sample points covered by the wrong number of regions"));
    }
    if outside_d > 0 {
        rep.push(format!("{outside_d} sample points of a region lie outside the center's dominance region"));
    }
}

/// Whether every diagram edge reaching Γ does so at a direction of its own
/// bisector; a cheap sanity check used by the farthest variant.
pub fn edges_leave_at_own_directions(sys: &SiteSystem, vl: &VoronoiLike) -> bool {
    let atol = sys.tol().angle() * 1e3;
    vl.region_arcs().into_iter().flat_map(|a| vl.cycle(a)).all(|h| {
        let he = &vl.hes[h];
        match (he.role, he.piece) {
            (Role::Edge, Piece::Curve { a, b, t0, t1 }) => {
                let j = sys.bisector(a, b);
                let ok0 = t0.is_finite() || matches!(he.piece.start(sys), Vertex::Gamma(d) if d.separation(j.direction(End::Minus)) <= atol);
                let ok1 = t1.is_finite() || matches!(he.piece.end(sys), Vertex::Gamma(d) if d.separation(j.direction(End::Plus)) <= atol);
                ok0 && ok1
            }
            _ => true,
        }
    })
}
