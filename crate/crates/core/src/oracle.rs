//! Brute-force reference constructions and structural checks.
//!
//! Nothing here calls into the incremental algorithm; only kernel predicates
//! and the plain diagram types are shared with it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{CoreArcSequence, Diagram, Elem, Face, Mode, Piece, Vertex};
use crate::kernel::{Direction, End, KernelError, Point, SiteIdx, SiteSystem};
use crate::realize::{containing_sites, locate_faces, Frame};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("degenerate input: {0}")]
    DegenerateInput(#[from] KernelError),
    #[error("empty site subset")]
    Empty,
    #[error("could not link the edges of site {0} into cycles")]
    Linking(u32),
}

/// Pointwise nearest or farthest label.
#[derive(Clone, Debug)]
pub struct LabelField<'a> {
    pub sys: &'a SiteSystem,
    pub mode: Mode,
    pub active: Vec<SiteIdx>,
}

impl<'a> LabelField<'a> {
    pub fn new(sys: &'a SiteSystem, mode: Mode, active: &[SiteIdx]) -> Self {
        LabelField { sys, mode, active: active.to_vec() }
    }

    /// The winning site at `z` and its margin over the runner-up.
    pub fn label(&self, z: Point) -> (SiteIdx, f64) {
        let sign = match self.mode {
            Mode::Nearest => 1.0,
            Mode::Farthest => -1.0,
        };
        let mut best = (usize::MAX, f64::INFINITY);
        let mut second = f64::INFINITY;
        for &p in &self.active {
            let d = sign * self.sys.dist(p, z);
            if d < best.1 {
                second = best.1;
                best = (p, d);
            } else if d < second {
                second = d;
            }
        }
        (best.0, second - best.1)
    }
}

/// The diagram of `active` computed from scratch: for every bisector pair the
/// parameter axis is cut at all triple points, and each resulting interval is
/// kept when its midpoint is equidistant-and-winning against all other sites.
pub fn brute_voronoi(sys: &SiteSystem, active: &[SiteIdx], mode: Mode) -> Result<Diagram, OracleError> {
    match active.len() {
        0 => return Err(OracleError::Empty),
        1 => return Ok(Diagram::single(mode, active[0])),
        _ => {}
    }
    let mut faces = Vec::new();
    for &p in active {
        let edges = brute_edges(sys, active, mode, p)?;
        faces.extend(link_cycles(sys, p, edges)?);
    }
    Ok(Diagram { mode, faces })
}

/// The boundary of the region of `p` among `active`.
pub fn brute_face(sys: &SiteSystem, active: &[SiteIdx], mode: Mode, p: SiteIdx) -> Result<Vec<Face>, OracleError> {
    if active.len() == 1 {
        return Ok(Diagram::single(mode, p).faces);
    }
    let edges = brute_edges(sys, active, mode, p)?;
    link_cycles(sys, p, edges)
}

fn brute_edges(sys: &SiteSystem, active: &[SiteIdx], mode: Mode, p: SiteIdx) -> Result<Vec<Elem>, OracleError> {
    let sign = match mode {
        Mode::Nearest => 1.0,
        Mode::Farthest => -1.0,
    };
    let scale = sys.tol().scale;
    let mut out = Vec::new();
    for &q in active {
        if q == p {
            continue;
        }
        let (a, b) = mode.side_curve(p, q);
        let j = sys.bisector(a, b);
        let mut cuts: Vec<f64> = Vec::new();
        for &r in active {
            if r == p || r == q {
                continue;
            }
            for z in sys.triple(p, q, r)? {
                cuts.push(j.param(z));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + x.abs()));
        let mut bounds = vec![f64::NEG_INFINITY];
        bounds.extend_from_slice(&cuts);
        bounds.push(f64::INFINITY);
        let mut open: Option<f64> = None;
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let t = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (false, true) => hi - scale,
                (true, false) => lo + scale,
                (false, false) => 0.0,
            };
            let z = j.point(t);
            let d = sign * sys.dist(p, z);
            let wins = active.iter().all(|&r| r == p || r == q || sign * sys.dist(r, z) > d);
            match (wins, open) {
                (true, None) => open = Some(lo),
                (false, Some(start)) => {
                    out.push(Elem { piece: Piece::curve(a, b, start, lo), neighbor: Some(q) });
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            out.push(Elem { piece: Piece::curve(a, b, start, f64::INFINITY), neighbor: Some(q) });
        }
    }
    Ok(out)
}

fn link_cycles(sys: &SiteSystem, p: SiteIdx, edges: Vec<Elem>) -> Result<Vec<Face>, OracleError> {
    let n = edges.len();
    let starts: Vec<Vertex> = edges.iter().map(|e| e.piece.start(sys)).collect();
    let ends: Vec<Vertex> = edges.iter().map(|e| e.piece.end(sys)).collect();
    // Successor of each edge, with the Γ piece in between when unbounded.
    let mut succ: Vec<(usize, Option<Piece>)> = Vec::with_capacity(n);
    for end in &ends {
        let next = match *end {
            Vertex::Finite(v) => (0..n)
                .filter_map(|k| match starts[k] {
                    Vertex::Finite(w) => Some((k, w.dist(v))),
                    Vertex::Gamma(_) => None,
                })
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(k, _)| (k, None)),
            Vertex::Gamma(d) => (0..n)
                .filter_map(|k| match starts[k] {
                    Vertex::Gamma(e) => Some((k, e)),
                    Vertex::Finite(_) => None,
                })
                .min_by(|x, y| d.ccw_to(x.1).total_cmp(&d.ccw_to(y.1)))
                .map(|(k, e)| (k, Some(Piece::gamma_between(d, e)))),
        };
        succ.push(next.ok_or(OracleError::Linking(sys.site(p).id))?);
    }
    let mut seen = vec![false; n];
    let mut faces = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            cycle.push(edges[i]);
            let (k, g) = succ[i];
            if let Some(g) = g {
                cycle.push(Elem { piece: g, neighbor: None });
            }
            i = k;
        }
        if i != s {
            return Err(OracleError::Linking(sys.site(p).id));
        }
        faces.push(Face { site: p, cycle });
    }
    Ok(faces)
}

/// The nearest diagram of all sites but `s`, restricted to the region of `s`.
///
/// Faces carry the boundary of `VR(s)` as `J(s, q)` with neighbor `s`, the
/// same convention as a Voronoi-like diagram over `∂VR(s)`.
pub fn brute_clipped(sys: &SiteSystem, s: SiteIdx) -> Result<Vec<Face>, OracleError> {
    let all: Vec<SiteIdx> = (0..sys.len()).collect();
    let scale = sys.tol().scale;
    let mut faces = Vec::new();
    for q in (0..sys.len()).filter(|&q| q != s) {
        let mut edges = Vec::new();
        for r in (0..sys.len()).filter(|&r| r != q) {
            let (a, b) = if r == s { (s, q) } else { (q, r) };
            let j = sys.bisector(a, b);
            let mut cuts: Vec<f64> = Vec::new();
            for &k in &all {
                if k != q && k != r {
                    for z in sys.triple(q, r, k)? {
                        cuts.push(j.param(z));
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + x.abs()));
            let mut bounds = vec![f64::NEG_INFINITY];
            bounds.extend_from_slice(&cuts);
            bounds.push(f64::INFINITY);
            let mut open: Option<f64> = None;
            for w in bounds.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let t = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (false, true) => hi - scale,
                    (true, false) => lo + scale,
                    (false, false) => 0.0,
                };
                let z = j.point(t);
                let d = sys.dist(q, z);
                let wins = all.iter().all(|&k| k == q || k == r || k == s || sys.dist(k, z) > d) && (r == s || sys.dist(s, z) < d);
                match (wins, open) {
                    (true, None) => open = Some(lo),
                    (false, Some(start)) => {
                        edges.push(Elem { piece: Piece::curve(a, b, start, lo), neighbor: Some(r) });
                        open = None;
                    }
                    _ => {}
                }
            }
            if let Some(start) = open {
                edges.push(Elem { piece: Piece::curve(a, b, start, f64::INFINITY), neighbor: Some(r) });
            }
        }
        if !edges.is_empty() {
            faces.extend(link_cycles(sys, q, edges)?);
        }
    }
    Ok(faces)
}

/// Outcome of a diagram comparison.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verdict {
    pub isomorphic: bool,
    pub mismatches: Vec<String>,
}

fn elem_matches(sys: &SiteSystem, x: &Elem, y: &Elem, tol: f64, atol: f64) -> bool {
    if x.neighbor != y.neighbor {
        return false;
    }
    match (x.piece, y.piece) {
        (Piece::Curve { a, b, .. }, Piece::Curve { a: a2, b: b2, .. }) => {
            a == a2 && b == b2 && x.piece.start(sys).close_to(&y.piece.start(sys), tol, atol) && x.piece.end(sys).close_to(&y.piece.end(sys), tol, atol)
        }
        (Piece::Gamma { from, len }, Piece::Gamma { from: f2, len: l2 }) => {
            (len - l2).abs() <= atol && (len >= std::f64::consts::TAU - atol || Direction::new(from).separation(Direction::new(f2)) <= atol)
        }
        _ => false,
    }
}

fn cycles_match(sys: &SiteSystem, x: &[Elem], y: &[Elem], tol: f64, atol: f64) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let n = x.len();
    (0..n).any(|r| (0..n).all(|i| elem_matches(sys, &x[i], &y[(i + r) % n], tol, atol)))
}

fn describe(sys: &SiteSystem, e: &Elem) -> String {
    match e.piece {
        Piece::Curve { a, b, t0, t1 } => format!("J({},{})[{:.6}, {:.6}]", sys.site(a).id, sys.site(b).id, t0, t1),
        Piece::Gamma { from, len } => format!("Γ[{:.6} +{:.6}]", from, len),
    }
}

/// Label-respecting isomorphism test with vertex tolerance `tol` and angular
/// tolerance `tol` on Γ.
pub fn compare_diagrams(sys: &SiteSystem, a: &Diagram, b: &Diagram, tol: f64) -> Verdict {
    let (a, b) = (a.normalized(sys), b.normalized(sys));
    let mut v = Verdict { isomorphic: true, mismatches: Vec::new() };
    if a.mode != b.mode {
        v.isomorphic = false;
        v.mismatches.push("modes differ".into());
        return v;
    }
    let mut sites = a.sites();
    sites.extend(b.sites());
    sites.sort_unstable();
    sites.dedup();
    for s in sites {
        let fa: Vec<&Face> = a.faces_of(s).collect();
        let mut fb: Vec<Option<&Face>> = b.faces_of(s).map(Some).collect();
        if fa.len() != fb.len() {
            v.isomorphic = false;
            v.mismatches.push(format!("site {}: {} vs {} faces", sys.site(s).id, fa.len(), fb.len()));
            continue;
        }
        for f in fa {
            let hit = fb.iter().position(|g| g.map(|g| cycles_match(sys, &f.cycle, &g.cycle, tol, tol)).unwrap_or(false));
            match hit {
                Some(k) => fb[k] = None,
                None => {
                    v.isomorphic = false;
                    let other = b.faces_of(s).map(|g| g.cycle.iter().map(|e| describe(sys, e)).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>();
                    v.mismatches.push(format!(
                        "site {}: face [{}] has no counterpart among [{}]",
                        sys.site(s).id,
                        f.cycle.iter().map(|e| describe(sys, e)).collect::<Vec<_>>().join(" "),
                        other.join(" | ")
                    ));
                }
            }
        }
    }
    v
}

/// Result of pointwise label sampling.
#[derive(Clone, Debug, Default)]
pub struct SampleReport {
    pub total: usize,
    pub agree: usize,
    pub skipped: usize,
    pub witnesses: Vec<Point>,
}

impl SampleReport {
    pub fn ratio(&self) -> f64 {
        let checked = self.total - self.skipped;
        if checked == 0 {
            1.0
        } else {
            self.agree as f64 / checked as f64
        }
    }
}

/// Stratified points over a box around the sites, padded by half its size.
pub fn stratified_points(sys: &SiteSystem, k: usize, seed: u64) -> Vec<Point> {
    let recs = sys.records();
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for r in recs {
        lo = Point::new(lo.x.min(r.position.x), lo.y.min(r.position.y));
        hi = Point::new(hi.x.max(r.position.x), hi.y.max(r.position.y));
    }
    let pad = (hi - lo) * 0.5 + Point::new(sys.tol().scale * 0.1, sys.tol().scale * 0.1);
    let (lo, hi) = (lo - pad, hi + pad);
    let side = (k as f64).sqrt().ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    'outer: for i in 0..side {
        for j in 0..side {
            if out.len() == k {
                break 'outer;
            }
            let u = (i as f64 + rng.gen::<f64>()) / side as f64;
            let v = (j as f64 + rng.gen::<f64>()) / side as f64;
            out.push(Point::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y)));
        }
    }
    out
}

/// Fraction of `k` stratified points whose containing face carries the
/// direct nearest (or farthest) label. Near-ties and points close to a face
/// boundary are skipped.
pub fn sample_check(sys: &SiteSystem, diagram: &Diagram, field: &LabelField, k: usize, seed: u64) -> SampleReport {
    let frame = Frame::enclosing(sys, &diagram.faces, 8.0);
    let located = locate_faces(sys, &diagram.faces, &frame);
    let skip = 1e-6 * sys.tol().scale;
    let mut rep = SampleReport::default();
    for z in stratified_points(sys, k, seed) {
        rep.total += 1;
        let (label, margin) = field.label(z);
        let inside = match containing_sites(&located, z, skip) {
            Some(inside) if margin > skip => inside,
            _ => {
                rep.skipped += 1;
                continue;
            }
        };
        if inside.len() == 1 && inside[0] == label {
            rep.agree += 1;
        } else if rep.witnesses.len() < 8 {
            rep.witnesses.push(z);
        }
    }
    rep
}

/// Violations of the forest structure of the diagram restricted to the
/// deleted region.
#[derive(Clone, Debug, Default)]
pub struct StructureReport {
    pub violations: Vec<String>,
    pub components: usize,
    pub leaves: usize,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
}

/// Checks the subdivision of the deleted region `s`: its edges form a forest,
/// each face owns exactly one core arc, every leaf lies on `∂VR(s)` or on Γ,
/// and the forest is a tree when the region is bounded.
pub fn check_structure(sys: &SiteSystem, tree: &Diagram, s: SiteIdx, cores: &CoreArcSequence, bounded: bool) -> StructureReport {
    let tol = 1e-6 * sys.tol().scale.max(1.0);
    let atol = 1e-6;
    let mut rep = StructureReport::default();
    // Vertex clustering; Γ vertices get their own entries keyed by direction.
    let mut verts: Vec<Vertex> = Vec::new();
    let vid = |v: Vertex, verts: &mut Vec<Vertex>| -> usize {
        if let Some(i) = verts.iter().position(|w| w.close_to(&v, tol, atol)) {
            i
        } else {
            verts.push(v);
            verts.len() - 1
        }
    };
    let mut edges: Vec<(usize, usize, SiteIdx, SiteIdx)> = Vec::new();
    let mut boundary_verts: Vec<usize> = Vec::new();
    let mut owned = vec![0usize; cores.h()];
    for f in &tree.faces {
        let mut boundary_count = 0;
        for e in &f.cycle {
            if e.neighbor == Some(s) {
                boundary_count += 1;
                let (u, w) = (vid(e.piece.start(sys), &mut verts), vid(e.piece.end(sys), &mut verts));
                boundary_verts.extend([u, w]);
                for c in &cores.arcs {
                    if c.site == f.site && piece_within(sys, &c.piece, &e.piece, tol) {
                        owned[c.id] += 1;
                    }
                }
            } else if let Some(q) = e.neighbor {
                let (u, w) = (vid(e.piece.start(sys), &mut verts), vid(e.piece.end(sys), &mut verts));
                let key = (u.min(w), u.max(w), f.site.min(q), f.site.max(q));
                if !edges.contains(&key) {
                    edges.push(key);
                }
            }
        }
        if boundary_count != 1 {
            rep.violations.push(format!("face of site {} has {} core arcs", sys.site(f.site).id, boundary_count));
        }
    }
    for (c, &k) in owned.iter().enumerate() {
        if k != 1 {
            rep.violations.push(format!("core arc {c} lies in {k} faces"));
        }
    }
    let mut dsu = Dsu((0..verts.len()).collect());
    let mut degree = vec![0usize; verts.len()];
    for &(u, w, _, _) in &edges {
        degree[u] += 1;
        degree[w] += 1;
        let (ru, rw) = (dsu.find(u), dsu.find(w));
        if ru == rw {
            rep.violations.push(format!("edge set contains a cycle through vertex {u}"));
        } else {
            dsu.0[ru] = rw;
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    for (v, &d) in degree.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let r = dsu.find(v);
        if !roots.contains(&r) {
            roots.push(r);
        }
        if d == 1 {
            rep.leaves += 1;
            if !verts[v].is_gamma() && !boundary_verts.contains(&v) {
                rep.violations.push(format!("leaf {:?} is neither on the region boundary nor at infinity", verts[v]));
            }
        }
    }
    rep.components = roots.len();
    if bounded && rep.components > 1 {
        rep.violations.push(format!("bounded region but {} components", rep.components));
    }
    rep
}

fn piece_within(sys: &SiteSystem, inner: &Piece, outer: &Piece, tol: f64) -> bool {
    match (*inner, *outer) {
        (Piece::Curve { a, b, t0, t1 }, Piece::Curve { a: a2, b: b2, t0: s0, t1: s1 }) => {
            let slack = |t: f64| if t.is_finite() { tol * (1.0 + t.abs()) } else { 0.0 };
            a == a2 && b == b2 && t0 >= s0 - slack(t0) && t1 <= s1 + slack(t1)
        }
        (Piece::Gamma { from, len }, Piece::Gamma { from: f2, len: l2 }) => {
            let off = crate::kernel::ccw_delta(f2, from);
            let off = if off > std::f64::consts::TAU - 1e-9 { 0.0 } else { off };
            off + len <= l2 + 1e-9 || l2 >= std::f64::consts::TAU - 1e-12
        }
        _ => {
            let _ = sys;
            false
        }
    }
}

/// Whether region `s` is bounded, judged from its face in a full diagram.
pub fn region_bounded(diagram: &Diagram, s: SiteIdx) -> bool {
    diagram.faces_of(s).all(|f| f.cycle.iter().all(|e| !e.piece.is_gamma()))
}

/// Farthest site along each direction, as a cyclic sequence of Γ intervals.
/// Brute force over all pairwise Γ crossings.
pub fn farthest_at_infinity(sys: &SiteSystem, active: &[SiteIdx]) -> Vec<(SiteIdx, Piece)> {
    let mut cuts: Vec<f64> = Vec::new();
    for (i, &p) in active.iter().enumerate() {
        for &q in &active[i + 1..] {
            let j = sys.bisector(p, q);
            cuts.push(j.direction(End::Minus).theta());
            cuts.push(j.direction(End::Plus).theta());
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-13);
    if cuts.is_empty() {
        return vec![(active[0], Piece::gamma(0.0, std::f64::consts::TAU))];
    }
    let m = cuts.len();
    let mut runs: Vec<(SiteIdx, f64, f64)> = Vec::new();
    for k in 0..m {
        let from = cuts[k];
        let len = crate::kernel::ccw_delta(from, cuts[(k + 1) % m]);
        let len = if m == 1 { std::f64::consts::TAU } else { len };
        let w = Direction::new(from + 0.5 * len);
        let far = active
            .iter()
            .copied()
            .max_by(|&x, &y| sys.key_at_infinity(x, w).total_cmp(&sys.key_at_infinity(y, w)))
            .unwrap();
        match runs.last_mut() {
            Some(last) if last.0 == far => last.2 += len,
            _ => runs.push((far, from, len)),
        }
    }
    if runs.len() > 1 && runs[0].0 == runs.last().unwrap().0 {
        let last = runs.pop().unwrap();
        runs[0].1 = last.1;
        runs[0].2 += last.2;
    }
    runs.into_iter().map(|(s, from, len)| (s, Piece::gamma(from, len))).collect()
}
