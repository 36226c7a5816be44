use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::bisector::Bisector;
use super::error::KernelError;
use super::geom::{Direction, Point};
use super::site::{check_records, SiteKind, SiteRecord};
use super::SiteIdx;

/// Relative tolerance policy: an absolute tolerance is `eps * scale`, with
/// `scale` the diagonal of the input bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub eps: f64,
    pub scale: f64,
}

impl Tol {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(scale: f64) -> Self {
        Tol { eps: Self::DEFAULT_EPS, scale: scale.max(f64::MIN_POSITIVE) }
    }

    pub fn abs(&self) -> f64 {
        self.eps * self.scale
    }

    /// Angular tolerance for directions on the curve at infinity.
    pub fn angle(&self) -> f64 {
        self.eps * 10.0
    }
}

/// Outcome of a tolerance-aware dominance test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The first site is strictly closer.
    First,
    /// The second site is strictly closer.
    Second,
    On,
}

/// A common point of two related bisectors `J(p, q)` and `J(p, r)` with its
/// parameter on each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelatedPoint {
    pub point: Point,
    pub t_first: f64,
    pub t_second: f64,
}

/// A validated site set of a single backend.
#[derive(Clone, Debug)]
pub struct SiteSystem {
    kind: SiteKind,
    sites: Vec<SiteRecord>,
    tol: Tol,
}

impl SiteSystem {
    /// Builds a system after structural checks only.
    pub fn new(sites: Vec<SiteRecord>) -> Result<Self, KernelError> {
        let kind = check_records(&sites)?;
        let tol = Tol::new(bbox_diagonal(&sites));
        Ok(SiteSystem { kind, sites, tol })
    }

    /// Builds a system and rejects inputs that violate general position.
    pub fn ingest(sites: Vec<SiteRecord>) -> Result<Self, KernelError> {
        let sys = Self::new(sites)?;
        if let Some(msg) = sys.general_position_violation() {
            return Err(KernelError::GeneralPosition(msg));
        }
        Ok(sys)
    }

    /// Like [`SiteSystem::ingest`], but perturbs positions by a seeded jitter of
    /// relative size `1e-6` until general position holds.
    pub fn ingest_with_jitter(sites: Vec<SiteRecord>, seed: u64) -> Result<Self, KernelError> {
        let sys = Self::new(sites)?;
        if sys.general_position_violation().is_none() {
            return Ok(sys);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mag = 1e-6 * sys.tol.scale;
        let mut last = String::new();
        for _ in 0..16 {
            let moved: Vec<SiteRecord> = sys
                .sites
                .iter()
                .map(|s| {
                    let mut s = *s;
                    s.position.x += rng.gen_range(-mag..mag);
                    s.position.y += rng.gen_range(-mag..mag);
                    s
                })
                .collect();
            let cand = Self::new(moved)?;
            match cand.general_position_violation() {
                None => return Ok(cand),
                Some(m) => last = m,
            }
        }
        Err(KernelError::GeneralPosition(last))
    }

    pub fn kind(&self) -> SiteKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn tol(&self) -> Tol {
        self.tol
    }

    /// The same system with relative tolerance `eps` in place of the default.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.tol.eps = eps;
        self
    }

    pub fn records(&self) -> &[SiteRecord] {
        &self.sites
    }

    pub fn site(&self, i: SiteIdx) -> &SiteRecord {
        &self.sites[i]
    }

    pub fn pos(&self, i: SiteIdx) -> Point {
        self.sites[i].position
    }

    pub fn index_of(&self, id: u32) -> Option<SiteIdx> {
        self.sites.iter().position(|s| s.id == id)
    }

    /// The system without site `i`, together with the map from new to old
    /// indices.
    pub fn without(&self, i: SiteIdx) -> (SiteSystem, Vec<SiteIdx>) {
        let keep: Vec<SiteIdx> = (0..self.len()).filter(|&j| j != i).collect();
        let sites = keep.iter().map(|&j| self.sites[j]).collect();
        (SiteSystem { kind: self.kind, sites, tol: self.tol }, keep)
    }

    pub fn dist(&self, i: SiteIdx, z: Point) -> f64 {
        let s = &self.sites[i];
        match self.kind {
            SiteKind::EuclideanPoint => z.dist(s.position),
            SiteKind::PowerCircle => (z - s.position).norm2() - s.weight,
            SiteKind::ApolloniusPoint => z.dist(s.position) - s.weight,
        }
    }

    fn dist_slack(&self, z: Point) -> f64 {
        let r = self.tol.scale + z.norm();
        match self.kind {
            SiteKind::PowerCircle => self.tol.eps * r * r,
            _ => self.tol.eps * r,
        }
    }

    /// Which of `i`, `j` is closer to `z`.
    pub fn dominance(&self, i: SiteIdx, j: SiteIdx, z: Point) -> Side {
        let d = self.dist(i, z) - self.dist(j, z);
        if d.abs() <= self.dist_slack(z) {
            Side::On
        } else if d < 0.0 {
            Side::First
        } else {
            Side::Second
        }
    }

    /// Ordering key at infinity: along direction `w`, smaller keys are closer.
    pub fn key_at_infinity(&self, i: SiteIdx, w: Direction) -> f64 {
        let s = &self.sites[i];
        let k = -s.position.dot(w.unit());
        match self.kind {
            SiteKind::ApolloniusPoint => k - s.weight,
            _ => k,
        }
    }

    /// Which of `i`, `j` dominates far away along direction `w`.
    pub fn dominance_at_infinity(&self, i: SiteIdx, j: SiteIdx, w: Direction) -> Side {
        let d = self.key_at_infinity(i, w) - self.key_at_infinity(j, w);
        if d.abs() <= self.tol.abs() {
            Side::On
        } else if d < 0.0 {
            Side::First
        } else {
            Side::Second
        }
    }

    /// The oriented bisector `J(a, b)` with `D(a, b)` on its left.
    pub fn bisector(&self, a: SiteIdx, b: SiteIdx) -> Bisector {
        let (pa, pb) = (self.pos(a), self.pos(b));
        let (wa, wb) = (self.sites[a].weight, self.sites[b].weight);
        match self.kind {
            SiteKind::EuclideanPoint => Bisector::line(a, b, pa, pb, pa.dist(pb) / 2.0),
            SiteKind::PowerCircle => {
                let d = pa.dist(pb);
                Bisector::line(a, b, pa, pb, (d * d + wa - wb) / (2.0 * d))
            }
            SiteKind::ApolloniusPoint => Bisector::branch(a, b, pa, pb, wb - wa),
        }
    }

    /// Checked variant of [`SiteSystem::bisector`].
    pub fn try_bisector(&self, a: SiteIdx, b: SiteIdx) -> Result<Bisector, KernelError> {
        if a == b || self.pos(a) == self.pos(b) {
            return Err(KernelError::IdenticalSites(self.sites[a].id, self.sites[b].id));
        }
        Ok(self.bisector(a, b))
    }

    /// Points equidistant from the three sites.
    pub fn triple(&self, i: SiteIdx, j: SiteIdx, k: SiteIdx) -> Result<SmallVec<[Point; 2]>, KernelError> {
        let o = self.pos(i);
        let qj = self.pos(j) - o;
        let qk = self.pos(k) - o;
        let (wi, wj, wk) = (self.sites[i].weight, self.sites[j].weight, self.sites[k].weight);
        let det = 4.0 * qj.cross(qk);
        let lin_tol = 1e-14 * qj.norm2().max(qk.norm2()).max(f64::MIN_POSITIVE) * 4.0;
        let mut out = SmallVec::new();
        // Solve [2qj; 2qk] z = r by Cramer's rule.
        let solve = |rj: f64, rk: f64| Point::new((rj * 2.0 * qk.y - rk * 2.0 * qj.y) / det, (2.0 * qj.x * rk - 2.0 * qk.x * rj) / det);
        match self.kind {
            SiteKind::EuclideanPoint | SiteKind::PowerCircle => {
                if det.abs() <= lin_tol {
                    return Ok(out);
                }
                let (pw_j, pw_k) = match self.kind {
                    SiteKind::PowerCircle => (wi - wj, wi - wk),
                    _ => (0.0, 0.0),
                };
                out.push(o + solve(qj.norm2() + pw_j, qk.norm2() + pw_k));
            }
            SiteKind::ApolloniusPoint => {
                if det.abs() <= lin_tol {
                    return Err(KernelError::DegenerateContact(i, j, k));
                }
                let z0 = solve(qj.norm2() - wj * wj + wi * wi, qk.norm2() - wk * wk + wi * wi);
                let z1 = solve(-2.0 * (wj - wi), -2.0 * (wk - wi));
                let a = z1.norm2() - 1.0;
                let b = 2.0 * (z0.dot(z1) - wi);
                let c = z0.norm2() - wi * wi;
                let mut roots: SmallVec<[f64; 2]> = SmallVec::new();
                if a.abs() <= 1e-12 {
                    if b.abs() > 1e-300 {
                        roots.push(-c / b);
                    }
                } else {
                    let disc = b * b - 4.0 * a * c;
                    let mag = (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
                    if disc.abs() <= 1e-12 * mag {
                        return Err(KernelError::DegenerateContact(i, j, k));
                    }
                    if disc > 0.0 {
                        let sq = disc.sqrt();
                        // Numerically stable pair of roots.
                        let qq = -0.5 * (b + b.signum() * sq);
                        roots.push(qq / a);
                        if qq != 0.0 {
                            roots.push(c / qq);
                        }
                    }
                }
                let floor = -wi.min(wj).min(wk) - self.tol.abs();
                for rho in roots {
                    if rho >= floor {
                        out.push(o + z0 + z1 * rho);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Intersections of the related bisectors `J(p, q)` and `J(p, r)`, sorted
    /// by parameter on the first.
    pub fn related_intersections(&self, first: &Bisector, second: &Bisector) -> Result<SmallVec<[RelatedPoint; 2]>, KernelError> {
        let ids = [first.a, first.b];
        let (shared, third) = if ids.contains(&second.a) {
            (second.a, second.b)
        } else if ids.contains(&second.b) {
            (second.b, second.a)
        } else {
            return Err(KernelError::NotRelated);
        };
        let other = if first.a == shared { first.b } else { first.a };
        if third == shared || third == other {
            return Err(KernelError::NotRelated);
        }
        let mut out: SmallVec<[RelatedPoint; 2]> = self
            .triple(shared, other, third)?
            .into_iter()
            .map(|z| RelatedPoint { point: z, t_first: first.param(z), t_second: second.param(z) })
            .collect();
        out.sort_by(|x, y| x.t_first.total_cmp(&y.t_first));
        Ok(out)
    }

    /// A description of the first general-position violation found, if any.
    ///
    /// Checks that no three bisectors of the same site triple touch
    /// tangentially, that no four sites share an equidistant point, and that
    /// no two related bisectors leave towards the same direction.
    pub fn general_position_violation(&self) -> Option<String> {
        let n = self.len();
        let atol = self.tol.angle() * GP_MARGIN;
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let bij = self.bisector(i, j);
                let (m1, p1) = bij.gamma_crossings();
                for k in (j + 1)..n {
                    if k == i {
                        continue;
                    }
                    let bik = self.bisector(i, k);
                    let (m2, p2) = bik.gamma_crossings();
                    for (x, y) in [(m1, m2), (m1, p2), (p1, m2), (p1, p2)] {
                        if x.separation(y) <= atol {
                            return Some(format!("bisectors of sites {}, {}, {} share a direction at infinity", self.sites[i].id, self.sites[j].id, self.sites[k].id));
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let pts = match self.triple(i, j, k) {
                        Ok(p) => p,
                        Err(_) => return Some(format!("sites {}, {}, {} are degenerate", self.sites[i].id, self.sites[j].id, self.sites[k].id)),
                    };
                    for z in pts {
                        let d0 = self.dist(i, z);
                        for l in 0..n {
                            if l == i || l == j || l == k {
                                continue;
                            }
                            if (self.dist(l, z) - d0).abs() <= GP_MARGIN * self.dist_slack(z) {
                                return Some(format!(
                                    "sites {}, {}, {}, {} share an equidistant point",
                                    self.sites[i].id, self.sites[j].id, self.sites[k].id, self.sites[l].id
                                ));
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

/// How far above the comparator's resolution a near-degeneracy must stay.
/// An order of magnitude is told apart reliably; a much wider margin rejects
/// most weighted inputs of a few dozen sites by chance alone.
const GP_MARGIN: f64 = 10.0;

fn bbox_diagonal(sites: &[SiteRecord]) -> f64 {
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for s in sites {
        lo.x = lo.x.min(s.position.x);
        lo.y = lo.y.min(s.position.y);
        hi.x = hi.x.max(s.position.x);
        hi.y = hi.y.max(s.position.y);
    }
    let d = (hi - lo).norm();
    if d.is_finite() && d > 0.0 {
        d
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::End;
    use proptest::prelude::*;

    fn sys3(kind: SiteKind, v: &[(f64, f64, f64)]) -> SiteSystem {
        let recs = v.iter().enumerate().map(|(i, &(x, y, w))| SiteRecord::new(i as u32, kind, x, y, w)).collect();
        SiteSystem::new(recs).unwrap()
    }

    fn backend() -> impl Strategy<Value = SiteKind> {
        prop_oneof![Just(SiteKind::EuclideanPoint), Just(SiteKind::PowerCircle), Just(SiteKind::ApolloniusPoint)]
    }

    fn site() -> impl Strategy<Value = (f64, f64, f64)> {
        (-1.0..1.0f64, -1.0..1.0f64, 0.0..0.05f64)
    }

    proptest! {
        #[test]
        fn bisector_points_are_equidistant(kind in backend(), a in site(), b in site(), t in -50.0..50.0f64) {
            prop_assume!(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 0.2);
            let s = sys3(kind, &[a, b]);
            let j = s.bisector(0, 1);
            let z = j.point(t);
            prop_assert!((j.param(z) - t).abs() < 1e-9 * (1.0 + t.abs()));
            let scale = if kind == SiteKind::PowerCircle { 1.0 + z.norm2() } else { 1.0 + z.norm() };
            prop_assert!((s.dist(0, z) - s.dist(1, z)).abs() < 1e-9 * scale);
            // The left side belongs to the first site.
            let left = z + j.tangent(t).perp() * 1e-3;
            prop_assert_eq!(s.dominance(0, 1, left), Side::First);
            let rev = s.bisector(1, 0);
            prop_assert!((rev.param(z) + t).abs() < 1e-9 * (1.0 + t.abs()));
        }

        #[test]
        fn far_ends_follow_gamma_directions(kind in backend(), a in site(), b in site()) {
            prop_assume!(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 0.2);
            let s = sys3(kind, &[a, b]);
            let j = s.bisector(0, 1);
            for (end, t) in [(End::Plus, 1e7), (End::Minus, -1e7)] {
                let far = j.point(t).angle();
                prop_assert!(far.separation(j.direction(end)) < 1e-5);
            }
        }

        #[test]
        fn dominance_at_infinity_matches_far_points(kind in backend(), a in site(), b in site(), th in 0.0..std::f64::consts::TAU) {
            prop_assume!(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 0.2);
            let s = sys3(kind, &[a, b]);
            let w = Direction::new(th);
            let j = s.bisector(0, 1);
            let (m, p) = j.gamma_crossings();
            prop_assume!(w.separation(m) > 1e-3 && w.separation(p) > 1e-3);
            prop_assume!((s.key_at_infinity(0, w) - s.key_at_infinity(1, w)).abs() > 1e-3);
            let far = w.unit() * 1e5;
            prop_assert_eq!(s.dominance_at_infinity(0, 1, w), s.dominance(0, 1, far));
        }

        #[test]
        fn triple_points_are_equidistant(kind in backend(), a in site(), b in site(), c in site()) {
            let recs: Vec<_> = [a, b, c].iter().enumerate().map(|(i, &(x, y, w))| SiteRecord::new(i as u32, kind, x, y, w)).collect();
            let s = SiteSystem::new(recs);
            prop_assume!(s.is_ok());
            let s = s.unwrap();
            prop_assume!(s.general_position_violation().is_none());
            for z in s.triple(0, 1, 2).unwrap() {
                let scale = if kind == SiteKind::PowerCircle { 1.0 + z.norm2() } else { 1.0 + z.norm() };
                prop_assert!((s.dist(0, z) - s.dist(1, z)).abs() < 1e-7 * scale);
                prop_assert!((s.dist(0, z) - s.dist(2, z)).abs() < 1e-7 * scale);
            }
        }
    }

    #[test]
    fn circumcenter_of_right_triangle() {
        let s = sys3(SiteKind::EuclideanPoint, &[(0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (0.0, 2.0, 0.0)]);
        let z = s.triple(0, 1, 2).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].dist(Point::new(1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn apollonius_triple_can_have_two_vertices() {
        // A small-weight site between two heavy ones along a line shifted up
        // produces two equidistant points.
        let s = sys3(SiteKind::ApolloniusPoint, &[(-1.0, 0.0, 0.6), (1.0, 0.0, 0.6), (0.0, 0.3, 0.0)]);
        let z = s.triple(0, 1, 2).unwrap();
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn related_intersections_sorted_and_param_consistent() {
        let s = sys3(SiteKind::ApolloniusPoint, &[(-1.0, 0.0, 0.6), (1.0, 0.0, 0.6), (0.0, 0.3, 0.0)]);
        let b1 = s.bisector(2, 0);
        let b2 = s.bisector(1, 2);
        let pts = s.related_intersections(&b1, &b2).unwrap();
        assert!(pts.len() == 2 && pts[0].t_first <= pts[1].t_first);
        for p in &pts {
            assert!(b1.point(p.t_first).dist(p.point) < 1e-9);
            assert!(b2.point(p.t_second).dist(p.point) < 1e-9);
        }
    }

    #[test]
    fn cocircular_sites_violate_general_position() {
        let s = sys3(SiteKind::EuclideanPoint, &[(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)]);
        assert!(s.general_position_violation().is_some());
        let j = SiteSystem::ingest_with_jitter(s.records().to_vec(), 7).unwrap();
        assert!(j.general_position_violation().is_none());
    }
}
