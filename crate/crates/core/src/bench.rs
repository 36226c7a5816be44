//! Scaling measurements on synthetic deleted regions.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deletion::{permutation, phase1, phase2, DeletionError, RunStats};
use crate::diagram::{CoreArc, CoreArcSequence, Mode, Piece};
use crate::insert::InsertOptions;
use crate::kernel::{KernelError, Point, SiteKind, SiteRecord, SiteSystem};

/// A deleted site at the origin whose region is an unbounded convex polygon
/// with `h` edges, one neighbor per edge.
///
/// The edges are tangents to the parabola `y = x²/2 − 1` at stratified
/// random abscissae in `[0.2, 2.2]`, a stretch of strictly decreasing
/// curvature. Closed smooth shapes are a poor choice here: near-cocircular
/// neighbors, or curvature extrema, crowd the inner diagram vertices to
/// within rounding distance of each other.
///
/// Weights are zero, so all backends share the same straight bisectors.
pub fn synthetic_boundary(kind: SiteKind, h: usize, seed: u64) -> Result<(SiteSystem, CoreArcSequence), KernelError> {
    assert!(h >= 2, "synthetic boundaries need at least two arcs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u_lo, u_span) = (0.2, 2.0);
    // Tangent at u: u x − y = u²/2 + 1, with the origin on the inner side.
    let lines: Vec<(Point, f64)> = (0..h)
        .map(|i| {
            let u = u_lo + u_span * (i as f64 + rng.gen_range(0.1..0.9)) / h as f64;
            let len = (u * u + 1.0).sqrt();
            (Point::new(u / len, -1.0 / len), (0.5 * u * u + 1.0) / len)
        })
        .collect();
    let mut recs = vec![SiteRecord::new(0, kind, 0.0, 0.0, 0.0)];
    // The neighbor is the mirror image of the origin in its line.
    recs.extend(lines.iter().enumerate().map(|(i, (n, c))| {
        let q = *n * (2.0 * c);
        SiteRecord::new(i as u32 + 1, kind, q.x, q.y, 0.0)
    }));
    let sys = SiteSystem::new(recs)?;
    let meet = |i: usize, j: usize| {
        let ((n1, c1), (n2, c2)) = (lines[i], lines[j]);
        let det = n1.x * n2.y - n1.y * n2.x;
        Point::new((c1 * n2.y - c2 * n1.y) / det, (n1.x * c2 - n2.x * c1) / det)
    };
    let arcs = (0..h)
        .map(|i| {
            let j = sys.bisector(0, i + 1);
            let t0 = if i == 0 { f64::NEG_INFINITY } else { j.param(meet(i - 1, i)) };
            let t1 = if i + 1 == h { f64::INFINITY } else { j.param(meet(i, i + 1)) };
            CoreArc { id: i, site: i + 1, piece: Piece::curve(0, i + 1, t0, t1) }
        })
        .collect();
    Ok((sys, CoreArcSequence { mode: Mode::Nearest, center: Some(0), arcs }))
}

/// One CSV row of the scaling report.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub backend: String,
    pub h: usize,
    pub trial: usize,
    pub seed: u64,
    pub total_traced: usize,
    pub mean_d_beta: f64,
    #[serde(rename = "max_Pi_over_i")]
    pub max_p_over_i: f64,
    pub wall_ns: u128,
}

/// Phase 1 and phase 2 on one synthetic boundary.
pub fn run_trial(kind: SiteKind, h: usize, trial: usize, seed: u64) -> Result<(BenchRow, RunStats), DeletionError> {
    let trial_seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(((h as u64) << 20) ^ trial as u64);
    let (sys, cores) = synthetic_boundary(kind, h, trial_seed).expect("synthetic sites are distinct");
    let start = Instant::now();
    let order = permutation(h, trial_seed);
    let records = phase1(h, &order);
    let (_, stats) = phase2(&sys, &cores, &order, &records, InsertOptions::default(), None)?;
    let wall_ns = start.elapsed().as_nanos();
    let row = BenchRow {
        backend: kind.name().to_string(),
        h,
        trial,
        seed: trial_seed,
        total_traced: stats.total_traced(),
        mean_d_beta: stats.mean_d_beta(),
        max_p_over_i: stats.max_p_over_i(),
        wall_ns,
    };
    Ok((row, stats))
}

/// All trials for all sizes, in order.
pub fn bench_linear(kind: SiteKind, sizes: &[usize], trials: usize, seed: u64) -> Result<Vec<BenchRow>, DeletionError> {
    let mut rows = Vec::with_capacity(sizes.len() * trials);
    for &h in sizes {
        for trial in 0..trials {
            rows.push(run_trial(kind, h, trial, seed)?.0);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(w: W, rows: &[BenchRow]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-size means of total work and of `d(β)`.
pub fn summarize(rows: &[BenchRow]) -> Vec<(usize, f64, f64)> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.h).collect();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|h| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.h == h).collect();
            let n = mine.len() as f64;
            let work = mine.iter().map(|r| r.total_traced as f64).sum::<f64>() / n;
            let d = mine.iter().map(|r| r.mean_d_beta).sum::<f64>() / n;
            (h, work, d)
        })
        .collect()
}
