//! Acceptance suite: eight criteria, one PASS/FAIL line each. Runs as a plain
//! binary (`harness = false`) and exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use avd::bench::{bench_linear, summarize};
use avd::deletion::{delete_site_observed, Deletion};
use avd::diagram::json::{to_json, DiagramJson};
use avd::diagram::validate::{curve_of, validate_boundary_curve, validate_vld, VldOptions};
use avd::diagram::{extract_core_sequence, Diagram, Face, Mode, VoronoiLike};
use avd::fvd::fvd_build_observed;
use avd::gen::generate;
use avd::insert::{InsertOptions, InsertStats, MergeCurve};
use avd::kernel::{Direction, Point, Side, SiteIdx, SiteKind, SiteRecord, SiteSystem};
use avd::oracle::{brute_face, brute_voronoi, check_structure, compare_diagrams, region_bounded, sample_check, LabelField};

/// Vertex tolerance for diagram comparison.
const VERTEX_TOL: f64 = 1e-6;
/// Minimum sampled agreement with the brute-force label field.
const SAMPLE_AGREEMENT: f64 = 0.999;
const SAMPLES: usize = 1000;
/// Sampling density of the per-step diagram validator.
const VLD_SAMPLES: usize = 256;
/// Allowed range for the ratio of mean work at `2h` and at `h`.
const WORK_RATIO: (f64, f64) = (1.6, 2.6);
/// Largest allowed spread (max / min) of mean `d(β)` across sizes.
const D_BETA_SPREAD: f64 = 2.0;
const KERNEL_PROBES: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(violations: &[String], summary: String) -> Outcome {
    let mut detail = summary;
    if !violations.is_empty() {
        detail.push_str(&format!("; {} violations, first: {}", violations.len(), violations[0]));
    }
    Outcome { pass: violations.is_empty(), detail }
}

/// `count` seeded instances of `kind` with `n` drawn from `ns`, skipping
/// draws that are not in general position.
fn corpus(kind: SiteKind, count: usize, ns: std::ops::RangeInclusive<usize>, seed: u64) -> Vec<SiteSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(ns.clone());
        let Ok(recs) = generate(kind, n, rng.gen(), None) else { continue };
        if let Ok(sys) = SiteSystem::ingest(recs) {
            out.push(sys);
        }
    }
    out
}

fn all(sys: &SiteSystem) -> Vec<SiteIdx> {
    (0..sys.len()).collect()
}

/// Results of deleting every site of every nearest instance once.
#[derive(Default)]
struct NearestRun {
    deletions: usize,
    oracle: Vec<String>,
    structure: Vec<String>,
    invariants: Vec<String>,
    steps_validated: usize,
    audit: Vec<String>,
    audited_steps: usize,
    min_agreement: f64,
}

fn nearest_corpus_run() -> NearestRun {
    let mut run = NearestRun { min_agreement: 1.0, ..Default::default() };
    for (b, kind) in SiteKind::all().into_iter().enumerate() {
        for (k, sys) in corpus(kind, 100, 4..=16, 1000 + b as u64).iter().enumerate() {
            let host = brute_voronoi(sys, &all(sys), Mode::Nearest).expect("reference diagram");
            let validate_steps = sys.len() <= 12;
            for s in 0..sys.len() {
                let tag = format!("{kind} #{k} site {}", sys.site(s).id);
                let seed = (k * 31 + s) as u64;
                let mut step_bad = Vec::new();
                let mut validated = 0;
                let mut obs = |i: usize, _: usize, vl: &VoronoiLike, st: &InsertStats, _: &MergeCurve| {
                    if !validate_steps {
                        return;
                    }
                    validated += 1;
                    let mut rep = validate_vld(sys, vl, VldOptions { samples: VLD_SAMPLES, seed });
                    rep.merge(validate_boundary_curve(sys, &curve_of(vl), &vl.cores, &vl.inserted()));
                    // Step i yields P_{i+2}.
                    if st.p_len > 2 * (i + 2) {
                        rep.violations.push(format!("|P_{}| = {}", i + 2, st.p_len));
                    }
                    step_bad.extend(rep.violations.into_iter().map(|v| format!("{tag} step {i}: {v}")));
                };
                let res = delete_site_observed(sys, &host, s, seed, InsertOptions { cross_check: false, audit: true }, Some(&mut obs));
                run.invariants.extend(step_bad);
                run.steps_validated += validated;
                let d: Deletion = match res {
                    Ok(d) => d,
                    Err(e) => {
                        run.oracle.push(format!("{tag}: {e}"));
                        continue;
                    }
                };
                run.deletions += 1;
                for st in &d.stats.steps {
                    run.audited_steps += 1;
                    run.audit.extend(st.violations.iter().map(|v| format!("{tag}: {v}")));
                }
                let rest: Vec<SiteIdx> = all(sys).into_iter().filter(|&i| i != s).collect();
                let want = brute_voronoi(sys, &rest, Mode::Nearest).expect("reference diagram");
                let v = compare_diagrams(sys, &d.diagram, &want, VERTEX_TOL);
                if !v.isomorphic {
                    run.oracle.push(format!("{tag}: {}", v.mismatches.first().cloned().unwrap_or_default()));
                }
                let field = LabelField::new(sys, Mode::Nearest, &rest);
                let r = sample_check(sys, &d.diagram, &field, SAMPLES, seed).ratio();
                run.min_agreement = run.min_agreement.min(r);
                if r < SAMPLE_AGREEMENT {
                    run.oracle.push(format!("{tag}: sample agreement {r:.4}"));
                }
                let st = check_structure(sys, &d.inner.to_diagram(), s, &d.cores, region_bounded(&host, s));
                run.structure.extend(st.violations.into_iter().map(|v| format!("{tag}: {v}")));
            }
        }
    }
    run
}

/// Combinatorially identical, with coordinates and parameters within `tol`.
fn same_json(a: &DiagramJson, b: &DiagramJson, tol: f64) -> Result<(), String> {
    let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => (x - y).abs() <= tol * (1.0 + x.abs()),
        (None, None) => true,
        _ => false,
    };
    if a.mode != b.mode || a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() || a.faces != b.faces {
        return Err(format!("structure differs: {} vs {} vertices, {} vs {} edges", a.vertices.len(), b.vertices.len(), a.edges.len(), b.edges.len()));
    }
    for (u, v) in a.vertices.iter().zip(&b.vertices) {
        if !(close(u.x, v.x) && close(u.y, v.y) && close(u.theta, v.theta)) {
            return Err(format!("vertex {} moved", u.id));
        }
    }
    for (e, f) in a.edges.iter().zip(&b.edges) {
        if e.bisector != f.bisector || e.endpoints != f.endpoints || !close(e.interval[0], f.interval[0]) || !close(e.interval[1], f.interval[1]) {
            return Err(format!("edge {} differs", e.id));
        }
    }
    Ok(())
}

fn uniqueness() -> Outcome {
    let mut bad = Vec::new();
    let mut compared = 0;
    for (b, kind) in SiteKind::all().into_iter().enumerate() {
        let count = if b == 0 { 9 } else { 8 };
        for (k, sys) in corpus(kind, count, 6..=14, 2000 + b as u64).iter().enumerate() {
            let host = brute_voronoi(sys, &all(sys), Mode::Nearest).expect("reference diagram");
            let s = k % sys.len();
            let mut first: Option<(DiagramJson, DiagramJson)> = None;
            for perm in 0..10u64 {
                let d = match delete_site_observed(sys, &host, s, 7919 * perm + 1, InsertOptions::default(), None) {
                    Ok(d) => d,
                    Err(e) => {
                        bad.push(format!("{kind} #{k} permutation {perm}: {e}"));
                        continue;
                    }
                };
                let got = (to_json(sys, &d.diagram), to_json(sys, &d.inner.to_diagram()));
                match &first {
                    None => first = Some(got),
                    Some(f) => {
                        compared += 1;
                        for (what, x, y) in [("diagram", &f.0, &got.0), ("inner", &f.1, &got.1)] {
                            if let Err(e) = same_json(x, y, VERTEX_TOL) {
                                bad.push(format!("{kind} #{k} permutation {perm} {what}: {e}"));
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(&bad, format!("25 instances x 10 permutations, {compared} comparisons"))
}

fn linearity() -> Outcome {
    let sizes: Vec<usize> = (7..=13).map(|k| 1 << k).collect();
    let mut bad = Vec::new();
    let mut parts = Vec::new();
    for kind in SiteKind::all() {
        let rows = match bench_linear(kind, &sizes, 50, 42) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("{kind}: {e}"));
                continue;
            }
        };
        let sum = summarize(&rows);
        let ratios: Vec<f64> = sum.windows(2).map(|w| w[1].1 / w[0].1).collect();
        for (w, r) in sum.windows(2).zip(&ratios) {
            if !(WORK_RATIO.0..=WORK_RATIO.1).contains(r) {
                bad.push(format!("{kind}: work ratio {r:.3} from h={} to h={}", w[0].0, w[1].0));
            }
        }
        let d: Vec<f64> = sum.iter().map(|s| s.2).collect();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        if hi > D_BETA_SPREAD * lo {
            bad.push(format!("{kind}: mean d(beta) spans {lo:.3}..{hi:.3}"));
        }
        if let Some(r) = rows.iter().find(|r| r.max_p_over_i > 2.0) {
            bad.push(format!("{kind}: |P_i|/i reached {:.3} at h={}", r.max_p_over_i, r.h));
        }
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
        parts.push(format!("{}: ratios [{}], d(beta) {lo:.2}..{hi:.2}", kind.name(), shown.join(", ")));
    }
    outcome(&bad, parts.join("; "))
}

fn touches_gamma(f: &Face) -> bool {
    f.cycle.iter().any(|e| e.piece.is_gamma())
}

fn farthest() -> Outcome {
    let mut bad = Vec::new();
    let mut gamma_steps = 0;
    for (k, sys) in corpus(SiteKind::EuclideanPoint, 100, 3..=12, 3000).iter().enumerate() {
        let active = all(sys);
        let mut steps_with_gamma = 0;
        let mut obs = |_: usize, _: usize, _: &VoronoiLike, _: &InsertStats, c: &MergeCurve| {
            if c.gamma_steps() > 0 {
                steps_with_gamma += 1;
            }
        };
        let got = fvd_build_observed(sys, &active, k as u64, InsertOptions { cross_check: false, audit: true }, Some(&mut obs));
        gamma_steps += steps_with_gamma;
        if steps_with_gamma > 0 {
            bad.push(format!("#{k}: {steps_with_gamma} merge curves walk along Γ"));
        }
        let got = match got {
            Ok(g) => g,
            Err(e) => {
                bad.push(format!("#{k}: {e}"));
                continue;
            }
        };
        for st in &got.stats.steps {
            bad.extend(st.violations.iter().map(|v| format!("#{k}: {v}")));
        }
        let want = brute_voronoi(sys, &active, Mode::Farthest).expect("reference diagram");
        let v = compare_diagrams(sys, &got.diagram, &want, VERTEX_TOL);
        if !v.isomorphic {
            bad.push(format!("#{k}: {}", v.mismatches.first().cloned().unwrap_or_default()));
        }
        if let Some(f) = got.diagram.faces.iter().find(|f| !touches_gamma(f)) {
            bad.push(format!("#{k}: face of site {} is bounded", sys.site(f.site).id));
        }
    }
    outcome(&bad, format!("100 instances, {gamma_steps} Γ steps in merge curves"))
}

fn random_system(rng: &mut ChaCha8Rng, kind: SiteKind, n: usize) -> Option<SiteSystem> {
    let recs = (0..n)
        .map(|i| {
            let w = match kind {
                SiteKind::EuclideanPoint => 0.0,
                SiteKind::PowerCircle => rng.gen_range(0.0..0.01),
                SiteKind::ApolloniusPoint => rng.gen_range(0.0..0.1),
            };
            SiteRecord::new(i as u32, kind, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), w)
        })
        .collect();
    SiteSystem::new(recs).ok()
}

/// Cyclic boundary labels, runs merged, without an `a…b…a…b` subsequence.
fn ds2_cyclic(raw: &[usize]) -> bool {
    let mut seq: Vec<usize> = raw.to_vec();
    seq.dedup();
    while seq.len() > 1 && seq.first() == seq.last() {
        seq.pop();
    }
    let mut labels = seq.clone();
    labels.sort_unstable();
    labels.dedup();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            let mut alt: Vec<usize> = seq.iter().copied().filter(|&x| x == a || x == b).collect();
            alt.dedup();
            if alt.len() > 1 && alt.first() == alt.last() {
                alt.pop();
            }
            if alt.len() >= 4 {
                return false;
            }
        }
    }
    true
}

fn kernel_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4000);
    let mut bad = Vec::new();
    let kinds = SiteKind::all();

    // Transitivity of dominance, in the plane and at infinity.
    let mut probes = 0;
    while probes < KERNEL_PROBES {
        let kind = kinds[probes % 3];
        let Some(sys) = random_system(&mut rng, kind, 3) else { continue };
        probes += 1;
        let z = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let w = Direction::new(rng.gen_range(0.0..std::f64::consts::TAU));
        for perm in [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]] {
            let [p, q, r] = perm;
            if sys.dominance(p, q, z) == Side::First && sys.dominance(q, r, z) == Side::First && sys.dominance(p, r, z) != Side::First {
                bad.push(format!("transitivity fails at {z:?} for {kind}"));
            }
            let inf = |a, b| sys.dominance_at_infinity(a, b, w);
            if inf(p, q) == Side::First && inf(q, r) == Side::First && inf(p, r) != Side::First {
                bad.push(format!("transitivity at infinity fails at {} for {kind}", w.theta()));
            }
        }
    }

    // Related bisectors meet at most twice; the kernel's count is checked
    // against sign changes sampled along the first bisector.
    let mut probes = 0;
    let mut sampled_over = 0;
    while probes < KERNEL_PROBES {
        let kind = kinds[probes % 3];
        let Some(sys) = random_system(&mut rng, kind, 3) else { continue };
        if sys.general_position_violation().is_some() {
            continue;
        }
        probes += 1;
        let (j1, j2) = (sys.bisector(0, 1), sys.bisector(0, 2));
        let pts = match sys.related_intersections(&j1, &j2) {
            Ok(p) => p,
            Err(e) => {
                bad.push(format!("related intersections of {kind}: {e}"));
                continue;
            }
        };
        if pts.len() > 2 {
            bad.push(format!("{kind}: {} related intersections", pts.len()));
        }
        let mut changes = 0;
        let mut last: Option<bool> = None;
        for k in 0..=400 {
            let u = -12.0 + 24.0 * k as f64 / 400.0;
            let z = j1.point(u.sinh());
            let d = sys.dist(1, z) - sys.dist(2, z);
            if d.abs() < 1e-9 {
                continue;
            }
            if last.is_some_and(|l| l != (d > 0.0)) {
                changes += 1;
            }
            last = Some(d > 0.0);
        }
        if changes > 2 {
            sampled_over += 1;
            bad.push(format!("{kind}: the sampled bisector changes side {changes} times"));
        }
    }

    // Boundary sequences of Voronoi regions are Davenport-Schinzel of order 2.
    let mut probes = 0;
    while probes < KERNEL_PROBES {
        let kind = kinds[probes % 3];
        let n = rng.gen_range(4..=9);
        let Some(sys) = random_system(&mut rng, kind, n) else { continue };
        if sys.general_position_violation().is_some() {
            continue;
        }
        let active = all(&sys);
        for s in 0..n {
            if probes >= KERNEL_PROBES {
                break;
            }
            probes += 1;
            let faces = match brute_face(&sys, &active, Mode::Nearest, s) {
                Ok(f) => f,
                Err(e) => {
                    bad.push(format!("{kind} face of {s}: {e}"));
                    continue;
                }
            };
            let raw: Vec<usize> = faces.iter().flat_map(|f| f.cycle.iter()).map(|e| e.neighbor.unwrap_or(usize::MAX)).collect();
            if faces.len() != 1 || !ds2_cyclic(&raw) {
                bad.push(format!("{kind}: boundary of {s} {raw:?} is not DS2"));
                continue;
            }
            let d = Diagram { mode: Mode::Nearest, faces };
            if let Err(e) = extract_core_sequence(&sys, &d, s) {
                bad.push(format!("{kind}: {e}"));
            }
        }
    }
    outcome(&bad, format!("{KERNEL_PROBES} probes per suite, {sampled_over} sampled overshoots"))
}

fn main() -> ExitCode {
    let t = Instant::now();
    let mut lines: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut record = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        let secs = t0.elapsed().as_secs_f64();
        println!("{} criterion {id}: {name} ({}) [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        lines.push((id, name, o, secs));
    };

    let t0 = Instant::now();
    let run = nearest_corpus_run();
    let corpus_secs = t0.elapsed().as_secs_f64();
    eprintln!("nearest corpus: {} deletions in {corpus_secs:.1}s", run.deletions);
    record(1, "oracle equivalence, nearest", &mut || {
        outcome(&run.oracle, format!("{} deletions over 300 instances, min sample agreement {:.4}", run.deletions, run.min_agreement))
    });
    record(2, "forest structure", &mut || outcome(&run.structure, format!("{} deletions", run.deletions)));
    record(3, "boundary-curve and diagram invariants", &mut || {
        outcome(&run.invariants, format!("{} phase-2 steps validated", run.steps_validated))
    });
    record(4, "merge-curve properties", &mut || outcome(&run.audit, format!("{} merge curves audited", run.audited_steps)));
    record(5, "uniqueness across permutations", &mut uniqueness);
    record(6, "expected linearity", &mut linearity);
    record(7, "farthest variant", &mut farthest);
    record(8, "kernel axioms", &mut kernel_axioms);

    let failed = lines.iter().filter(|l| !l.2.pass).count();
    println!("{} of {} criteria pass in {:.1}s", lines.len() - failed, lines.len(), t.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
