//! Farthest diagrams: the same randomized construction over boundary curves
//! that partition Γ.

use std::f64::consts::TAU;

use crate::deletion::{permutation, phase1, phase2, DeletionError, Observer, RunStats};
use crate::diagram::{is_ds2_cyclic, CoreArc, CoreArcSequence, Diagram, Mode, Piece, VoronoiLike};
use crate::insert::InsertOptions;
use crate::kernel::{End, SiteIdx, SiteSystem};

/// Directions at infinity where each site of `active` is farthest, as the
/// cyclic counterclockwise sequence of maximal Γ intervals.
///
/// Brute force over all pairwise Γ crossings, `O(n^3)`.
pub fn compute_faces_at_infinity(sys: &SiteSystem, active: &[SiteIdx]) -> CoreArcSequence {
    let mode = Mode::Farthest;
    if active.len() == 1 {
        let arcs = vec![CoreArc { id: 0, site: active[0], piece: Piece::gamma(0.0, TAU) }];
        return CoreArcSequence { mode, center: None, arcs };
    }
    let mut cuts: Vec<f64> = Vec::new();
    for (i, &p) in active.iter().enumerate() {
        for &q in &active[i + 1..] {
            let j = sys.bisector(p, q);
            cuts.push(j.direction(End::Minus).theta());
            cuts.push(j.direction(End::Plus).theta());
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let n = cuts.len();
    let farthest = |theta: f64| {
        let w = crate::kernel::Direction::new(theta);
        *active.iter().max_by(|&&a, &&b| sys.key_at_infinity(a, w).total_cmp(&sys.key_at_infinity(b, w))).unwrap()
    };
    // Label of each interval between consecutive cuts.
    let mut spans: Vec<(f64, f64, SiteIdx)> = (0..n)
        .map(|k| {
            let from = cuts[k];
            let len = if k + 1 < n { cuts[k + 1] - from } else { cuts[0] + TAU - from };
            (from, len, farthest(from + 0.5 * len))
        })
        .collect();
    // Merge equal neighbors, including across the wrap.
    let mut merged: Vec<(f64, f64, SiteIdx)> = Vec::new();
    for sp in spans.drain(..) {
        match merged.last_mut() {
            Some(last) if last.2 == sp.2 => last.1 += sp.1,
            _ => merged.push(sp),
        }
    }
    if merged.len() > 1 && merged[0].2 == merged.last().unwrap().2 {
        let last = merged.pop().unwrap();
        merged[0].0 = last.0;
        merged[0].1 += last.1;
    }
    let arcs = merged
        .into_iter()
        .enumerate()
        .map(|(id, (from, len, site))| CoreArc { id, site, piece: Piece::gamma(from, len) })
        .collect();
    CoreArcSequence { mode, center: None, arcs }
}

/// Output of [`fvd_build`].
#[derive(Clone, Debug)]
pub struct FarthestBuild {
    pub diagram: Diagram,
    pub inner: VoronoiLike,
    pub cores: CoreArcSequence,
    pub stats: RunStats,
}

/// The farthest diagram of `active` by randomized insertion of its faces at
/// infinity.
pub fn fvd_build(sys: &SiteSystem, active: &[SiteIdx], seed: u64, opts: InsertOptions) -> Result<FarthestBuild, DeletionError> {
    fvd_build_observed(sys, active, seed, opts, None)
}

pub fn fvd_build_observed(
    sys: &SiteSystem,
    active: &[SiteIdx],
    seed: u64,
    opts: InsertOptions,
    observer: Option<&mut Observer>,
) -> Result<FarthestBuild, DeletionError> {
    let cores = compute_faces_at_infinity(sys, active);
    debug_assert!(is_ds2_cyclic(&cores.labels()));
    let order = permutation(cores.h(), seed);
    let records = phase1(cores.h(), &order);
    let (inner, stats) = phase2(sys, &cores, &order, &records, opts, observer)?;
    let diagram = inner.to_diagram();
    Ok(FarthestBuild { diagram, inner, cores, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{SiteKind, SiteRecord};
    use crate::oracle::{brute_voronoi, compare_diagrams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points(pts: &[(f64, f64)]) -> SiteSystem {
        SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, SiteKind::EuclideanPoint, p.0, p.1, 0.0)).collect()).unwrap()
    }

    #[test]
    fn two_points_split_gamma_in_two() {
        let sys = points(&[(0.0, 0.0), (1.0, 0.2)]);
        let seq = compute_faces_at_infinity(&sys, &[0, 1]);
        assert_eq!(seq.h(), 2);
        let total: f64 = seq.arcs.iter().map(|a| a.piece.range().1).sum();
        assert!((total - TAU).abs() < 1e-9);
    }

    #[test]
    fn interior_point_has_no_face_at_infinity() {
        let sys = points(&[(0.0, 0.0), (1.0, 0.1), (0.4, 1.0), (0.45, 0.35)]);
        let seq = compute_faces_at_infinity(&sys, &[0, 1, 2, 3]);
        assert_eq!(seq.h(), 3);
        assert!(!seq.labels().contains(&3));
    }

    #[test]
    fn random_farthest_diagrams_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ran = 0;
        while ran < 40 {
            let n = rng.gen_range(3..12);
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
            let Ok(sys) = SiteSystem::ingest(pts.iter().enumerate().map(|(i, p)| SiteRecord::new(i as u32, SiteKind::EuclideanPoint, p.0, p.1, 0.0)).collect()) else {
                continue;
            };
            let all: Vec<SiteIdx> = (0..n).collect();
            let got = fvd_build(&sys, &all, ran, InsertOptions { cross_check: true, audit: true }).unwrap_or_else(|e| panic!("set {ran}: {e}"));
            for st in &got.stats.steps {
                assert!(st.violations.is_empty(), "{:?}", st.violations);
            }
            let want = brute_voronoi(&sys, &all, Mode::Farthest).unwrap();
            let v = compare_diagrams(&sys, &got.diagram, &want, 1e-6);
            assert!(v.isomorphic, "set {ran}: {:#?}", v.mismatches);
            ran += 1;
        }
    }
}
