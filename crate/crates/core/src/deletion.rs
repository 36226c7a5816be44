//! Site deletion: the two-phase randomized construction of the diagram inside
//! the deleted region, and stitching it back into the host diagram.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{extract_core_sequence, fuse_cycle, CoreArcSequence, Diagram, DiagramError, Elem, Face, Mode, Piece, VoronoiLike};
use crate::insert::{insert, InsertError, InsertOptions, InsertStats, MergeCurve};
use crate::kernel::{SiteIdx, SiteSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeletionError {
    #[error("cannot delete the only site")]
    LastSite,
    #[error("site {0} is not in the diagram")]
    UnknownSite(u32),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("inserting core arc {core}: {source}")]
    Insert { core: usize, source: InsertError },
    #[error("no arc of the computed diagram matches core arc {0}")]
    Stitch(usize),
}

/// Phase-1 record: a core arc and its neighbors just before its removal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeletionRecord {
    pub arc: usize,
    pub left: usize,
    pub right: usize,
}

/// A uniformly random order of `0..h`.
pub fn permutation(h: usize, seed: u64) -> Vec<usize> {
    let mut o: Vec<usize> = (0..h).collect();
    o.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    o
}

/// Deletes `order[h-1], …, order[1]` from the cyclic sequence `0..h`,
/// recording the current neighbors of each.
pub fn phase1(h: usize, order: &[usize]) -> Vec<DeletionRecord> {
    let mut prev: Vec<usize> = (0..h).map(|i| (i + h - 1) % h).collect();
    let mut next: Vec<usize> = (0..h).map(|i| (i + 1) % h).collect();
    let mut out = Vec::with_capacity(h.saturating_sub(1));
    for &a in order.iter().skip(1).rev() {
        let (l, r) = (prev[a], next[a]);
        out.push(DeletionRecord { arc: a, left: l, right: r });
        next[l] = r;
        prev[r] = l;
    }
    out
}

/// Summary of a phase-2 run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: Vec<InsertStats>,
}

impl RunStats {
    pub fn total_traced(&self) -> usize {
        self.steps.iter().map(|s| s.traced()).sum()
    }

    pub fn mean_d_beta(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.d_beta as f64).sum::<f64>() / self.steps.len() as f64
    }

    /// Largest `|P_i| / i`, with `i` counting the initial arc.
    pub fn max_p_over_i(&self) -> f64 {
        self.steps.iter().enumerate().map(|(k, s)| s.p_len as f64 / (k + 2) as f64).fold(0.0, f64::max)
    }
}

/// Called after each phase-2 insertion with the step index, the inserted
/// core, the diagram and the step record.
pub type Observer<'a> = dyn FnMut(usize, usize, &VoronoiLike, &InsertStats, &MergeCurve) + 'a;

/// Re-inserts the arcs of `seq` in the order `order`, using the phase-1
/// records as neighbor hints.
pub fn phase2(
    sys: &SiteSystem,
    seq: &CoreArcSequence,
    order: &[usize],
    records: &[DeletionRecord],
    opts: InsertOptions,
    observer: Option<&mut Observer>,
) -> Result<(VoronoiLike, RunStats), DeletionError> {
    let mut vl = VoronoiLike::initial(seq.mode, seq.center, sys, seq.arcs.clone(), order[0]);
    let mut stats = RunStats::default();
    let mut observer = observer;
    for (k, r) in records.iter().rev().enumerate() {
        let (st, curve) = insert(sys, &mut vl, r.arc, (r.left, r.right), opts).map_err(|source| DeletionError::Insert { core: r.arc, source })?;
        if let Some(f) = observer.as_deref_mut() {
            f(k, r.arc, &vl, &st, &curve);
        }
        stats.steps.push(st);
    }
    Ok((vl, stats))
}

/// Output of [`delete_site`].
#[derive(Clone, Debug)]
pub struct Deletion {
    pub diagram: Diagram,
    /// The diagram inside the deleted region.
    pub inner: VoronoiLike,
    pub cores: CoreArcSequence,
    pub stats: RunStats,
}

/// Deletes `s` from the nearest diagram `host` of all sites of `sys`.
pub fn delete_site(sys: &SiteSystem, host: &Diagram, s: SiteIdx, seed: u64, opts: InsertOptions) -> Result<Deletion, DeletionError> {
    delete_site_observed(sys, host, s, seed, opts, None)
}

pub fn delete_site_observed(
    sys: &SiteSystem,
    host: &Diagram,
    s: SiteIdx,
    seed: u64,
    opts: InsertOptions,
    observer: Option<&mut Observer>,
) -> Result<Deletion, DeletionError> {
    let sites = host.sites();
    if !sites.contains(&s) {
        return Err(DeletionError::UnknownSite(sys.site(s).id));
    }
    if sites.len() == 1 {
        return Err(DeletionError::LastSite);
    }
    let cores = extract_core_sequence(sys, host, s)?;
    let order = permutation(cores.h(), seed);
    let records = phase1(cores.h(), &order);
    let (inner, stats) = phase2(sys, &cores, &order, &records, opts, observer)?;
    let diagram = stitch(sys, host, s, &cores, &inner)?;
    Ok(Deletion { diagram, inner, cores, stats })
}

/// Glues the diagram inside `VR(s)` into the host: every host edge bounding
/// `VR(s)` is replaced by the rest of the corresponding region boundary.
pub fn stitch(sys: &SiteSystem, host: &Diagram, s: SiteIdx, cores: &CoreArcSequence, inner: &VoronoiLike) -> Result<Diagram, DeletionError> {
    let tol = sys.tol().abs() * 1e3;
    let atol = sys.tol().angle() * 1e3;
    let mut faces = Vec::new();
    for f in host.faces.iter().filter(|f| f.site != s) {
        let mut cycle: Vec<Elem> = Vec::with_capacity(f.cycle.len());
        for e in &f.cycle {
            if e.neighbor != Some(s) {
                cycle.push(*e);
                continue;
            }
            let core = cores
                .arcs
                .iter()
                .find(|c| c.site == f.site && same_stretch(&c.piece, &e.piece.reversed(), tol))
                .ok_or(DeletionError::Stitch(usize::MAX))?;
            let arc = inner.core_arc[core.id].ok_or(DeletionError::Stitch(core.id))?;
            let region = inner.region_faces().into_iter().find(|(a, _)| *a == arc).ok_or(DeletionError::Stitch(core.id))?.1;
            cycle.extend(region.cycle.into_iter().skip(1));
        }
        let cycle = fuse_cycle(&cycle, tol, atol);
        faces.push(Face { site: f.site, cycle });
    }
    Ok(Diagram { mode: Mode::Nearest, faces })
}

fn same_stretch(a: &Piece, b: &Piece, tol: f64) -> bool {
    match (*a, *b) {
        (Piece::Curve { a: a1, b: b1, t0, t1 }, Piece::Curve { a: a2, b: b2, t0: u0, t1: u1 }) => {
            let close = |x: f64, y: f64| x == y || (x - y).abs() <= tol * (1.0 + x.abs());
            a1 == a2 && b1 == b2 && close(t0, u0) && close(t1, u1)
        }
        _ => false,
    }
}
