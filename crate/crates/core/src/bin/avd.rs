//! Command-line front end.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use avd::bench::{bench_linear, summarize, write_csv};
use avd::deletion::{delete_site_observed, permutation, DeletionError};
use avd::diagram::json::{read_diagram, write_diagram, DiagramJson};
use avd::diagram::{extract_core_sequence, Diagram, Mode, VoronoiLike};
use avd::fvd::fvd_build;
use avd::gen::generate_general;
use avd::insert::{InsertError, InsertOptions, InsertStats, MergeCurve, Step};
use avd::kernel::{read_sites, write_sites_csv, write_sites_json, KernelError, SiteIdx, SiteKind, SiteRecord, SiteSystem};
use avd::oracle::{brute_voronoi, check_structure, compare_diagrams, region_bounded, sample_check, LabelField};
use avd::svg::{diagram_svg, step_svg};

#[derive(Parser)]
#[command(name = "avd", version, about = "Site deletion in abstract Voronoi diagrams")]
struct Cli {
    /// Relative tolerance (times the bounding-box diagonal).
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Seeded random sites in the unit box.
    Gen(GenArgs),
    /// Nearest (or farthest) diagram of a site file by the reference construction.
    Build(BuildArgs),
    /// Delete one site with the randomized construction.
    Delete(DeleteArgs),
    /// Check deletions against the reference diagrams.
    Verify(VerifyArgs),
    /// Scaling report on synthetic boundaries, as CSV.
    Bench(BenchArgs),
    /// Farthest diagram by randomized insertion of the faces at infinity.
    Fvd(FvdArgs),
    /// Render a diagram file.
    Svg(SvgArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "euclidean")]
    backend: String,
    #[arg(short)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Weight range `lo,hi`.
    #[arg(long, value_parser = parse_pair)]
    weights: Option<(f64, f64)>,
    /// Output file; `.json` writes JSON, anything else CSV. Defaults to CSV on stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    sites: PathBuf,
    #[arg(long, default_value = "nearest")]
    mode: String,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct DeleteArgs {
    #[arg(long)]
    sites: PathBuf,
    /// Id of the site to delete.
    #[arg(long)]
    site: u32,
    #[arg(long)]
    seed: u64,
    /// Host diagram; built by the reference construction when omitted.
    #[arg(long)]
    host: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Directory for one SVG per phase-2 step.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON-lines file with every merge-curve vertex.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Re-run a recorded trace and check it reproduces.
    #[arg(long, conflicts_with = "trace")]
    replay: Option<PathBuf>,
    /// Compare both scan rules and audit every merge curve.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Site file; when omitted, each trial generates `-n` sites of `--backend`.
    #[arg(long)]
    sites: Option<PathBuf>,
    /// Site to delete; every site when omitted.
    #[arg(long)]
    site: Option<u32>,
    #[arg(long, default_value = "euclidean")]
    backend: String,
    #[arg(short, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Sample points per check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "euclidean")]
    backend: String,
    /// Ascending sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024,2048,4096,8192")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FvdArgs {
    #[arg(long)]
    sites: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SvgArgs {
    #[arg(long)]
    sites: PathBuf,
    #[arg(long)]
    diagram: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// A failed check, as opposed to bad input or a broken run.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct VerifyFailed(String);

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "nearest" => Ok(Mode::Nearest),
        "farthest" => Ok(Mode::Farthest),
        _ => bail!("unknown mode {s:?}; expected nearest or farthest"),
    }
}

fn load(path: &Path, eps: Option<f64>) -> Result<SiteSystem> {
    let recs = read_sites(path)?;
    system(recs, eps)
}

/// Ingests `recs`, checking general position under the requested tolerance.
fn system(recs: Vec<SiteRecord>, eps: Option<f64>) -> Result<SiteSystem> {
    let sys = SiteSystem::new(recs)?;
    let sys = match eps {
        Some(e) => sys.with_eps(e),
        None => sys,
    };
    if let Some(msg) = sys.general_position_violation() {
        return Err(KernelError::GeneralPosition(msg).into());
    }
    Ok(sys)
}

fn all(sys: &SiteSystem) -> Vec<SiteIdx> {
    (0..sys.len()).collect()
}

fn site_index(sys: &SiteSystem, id: u32) -> Result<SiteIdx> {
    sys.index_of(id).ok_or(DeletionError::UnknownSite(id)).with_context(|| format!("site {id}"))
}

/// Stdout when `path` is `None`.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_diagram(sys: &SiteSystem, d: &Diagram, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    write_diagram(&mut w, sys, d)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_backend(s: &str) -> Result<SiteKind> {
    Ok(SiteKind::parse(s)?)
}

fn cmd_gen(a: GenArgs, eps: Option<f64>) -> Result<()> {
    let kind = parse_backend(&a.backend)?;
    let (sys, used) = generate_general(kind, a.n, a.seed, a.weights, eps)?;
    if used != a.seed {
        eprintln!("note: draw for seed {} is not in general position; wrote the draw for derived seed {used}", a.seed);
    }
    let sites = sys.records();
    let mut w = sink(a.out.as_deref())?;
    if a.out.as_deref().and_then(Path::extension).is_some_and(|e| e == "json") {
        write_sites_json(&mut w, sites)?;
    } else {
        write_sites_csv(&mut w, sites)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_build(a: BuildArgs, eps: Option<f64>) -> Result<()> {
    let sys = load(&a.sites, eps)?;
    let d = brute_voronoi(&sys, &all(&sys), parse_mode(&a.mode)?)?;
    if let Some(p) = &a.svg {
        fs::write(p, diagram_svg(&sys, &d))?;
    }
    emit_diagram(&sys, &d, a.out.as_deref())
}

/// One line of a `--trace` file.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TraceLine {
    Header { site: u32, seed: u64, order: Vec<usize> },
    Vertex {
        step: usize,
        core: usize,
        index: usize,
        /// Arc of `P` whose region the curve runs through after this vertex.
        region: Option<usize>,
        /// Site ids of the bisector followed after this vertex; `None` on Γ.
        bisector: Option<[u32; 2]>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        point: Option<[f64; 2]>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        direction: Option<f64>,
    },
}

fn trace_lines(sys: &SiteSystem, step: usize, core: usize, vl: &VoronoiLike, curve: &MergeCurve) -> Vec<TraceLine> {
    let b = sys.site(vl.cores[core].site).id;
    curve
        .vertices
        .iter()
        .enumerate()
        .map(|(index, v)| {
            let (region, bisector) = match curve.steps.get(index) {
                Some(Step::Edge(vis)) => (Some(vis.region), Some([sys.site(vl.region_site(vis.region)).id, b])),
                _ => (None, None),
            };
            let (point, direction) = match v {
                avd::diagram::Vertex::Finite(p) => (Some([p.x, p.y]), None),
                avd::diagram::Vertex::Gamma(w) => (None, Some(w.theta())),
            };
            TraceLine::Vertex { step, core, index, region, bisector, point, direction }
        })
        .collect()
}

fn cmd_delete(a: DeleteArgs, eps: Option<f64>) -> Result<()> {
    let sys = load(&a.sites, eps)?;
    let s = site_index(&sys, a.site)?;
    let host = match &a.host {
        Some(p) => read_diagram(File::open(p).with_context(|| format!("opening {}", p.display()))?, &sys)?,
        None => brute_voronoi(&sys, &all(&sys), Mode::Nearest)?,
    };
    if host.sites() == [s] {
        // Nothing is left once the only site goes.
        let empty = DiagramJson { mode: "nearest".into(), vertices: vec![], edges: vec![], faces: vec![] };
        let mut w = sink(a.out.as_deref())?;
        serde_json::to_writer_pretty(&mut w, &empty)?;
        writeln!(w)?;
        return Ok(());
    }
    let seed = match &a.replay {
        Some(p) => match read_trace(p)?.first() {
            Some(TraceLine::Header { seed, site, .. }) if *site == a.site => *seed,
            _ => bail!("{} does not start with a header for site {}", p.display(), a.site),
        },
        None => a.seed,
    };
    let cores = extract_core_sequence(&sys, &host, s)?;
    let order = permutation(cores.h(), seed);
    if let Some(dir) = &a.svg {
        fs::create_dir_all(dir)?;
        let first = VoronoiLike::initial(Mode::Nearest, Some(s), &sys, cores.arcs.clone(), order[0]);
        fs::write(dir.join("step-000.svg"), step_svg(&sys, Some(&host), &first, &MergeCurve::default()))?;
    }
    let mut lines = vec![TraceLine::Header { site: a.site, seed, order: order.clone() }];
    let mut io_err: Option<io::Error> = None;
    let mut obs = |k: usize, core: usize, vl: &VoronoiLike, _: &InsertStats, curve: &MergeCurve| {
        if a.trace.is_some() || a.replay.is_some() {
            lines.extend(trace_lines(&sys, k, core, vl, curve));
        }
        if let Some(dir) = &a.svg {
            if let Err(e) = fs::write(dir.join(format!("step-{:03}.svg", k + 1)), step_svg(&sys, Some(&host), vl, curve)) {
                io_err.get_or_insert(e);
            }
        }
    };
    let opts = InsertOptions { cross_check: a.check, audit: a.check };
    let del = delete_site_observed(&sys, &host, s, seed, opts, Some(&mut obs))?;
    if let Some(e) = io_err {
        return Err(e).context("writing step pictures");
    }
    if a.check {
        let bad: Vec<String> = del.stats.steps.iter().flat_map(|st| st.violations.iter().cloned()).collect();
        if !bad.is_empty() {
            return Err(VerifyFailed(format!("merge-curve audit: {}", bad.join("; "))).into());
        }
    }
    if let Some(p) = &a.trace {
        let mut w = BufWriter::new(File::create(p)?);
        for l in &lines {
            serde_json::to_writer(&mut w, l)?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    if let Some(p) = &a.replay {
        let recorded = read_trace(p)?;
        if recorded != lines {
            return Err(VerifyFailed(format!("replay of {} diverges from the recorded trace", p.display())).into());
        }
        eprintln!("replay matches {} trace lines", lines.len());
    }
    emit_diagram(&sys, &del.diagram, a.out.as_deref())
}

fn read_trace(p: &Path) -> Result<Vec<TraceLine>> {
    let f = BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?);
    f.lines()
        .filter(|l| !l.as_ref().is_ok_and(|l| l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// Deletes `s` and checks the result against the reference diagram; the
/// returned strings are failures.
fn check_one(sys: &SiteSystem, host: &Diagram, s: SiteIdx, seed: u64, samples: usize) -> Result<Vec<String>> {
    let id = sys.site(s).id;
    let del = match delete_site_observed(sys, host, s, seed, InsertOptions::default(), None) {
        Ok(d) => d,
        Err(DeletionError::LastSite) => return Ok(vec![]),
        Err(e) => return Err(e.into()),
    };
    let rest: Vec<SiteIdx> = all(sys).into_iter().filter(|&i| i != s).collect();
    let want = brute_voronoi(sys, &rest, Mode::Nearest)?;
    let mut out = Vec::new();
    let v = compare_diagrams(sys, &del.diagram, &want, 1e-6);
    if !v.isomorphic {
        out.push(format!("site {id}: not isomorphic to the reference: {}", v.mismatches.join("; ")));
    }
    let field = LabelField::new(sys, Mode::Nearest, &rest);
    let r = sample_check(sys, &del.diagram, &field, samples, seed).ratio();
    if r < 0.999 {
        out.push(format!("site {id}: sample agreement {r:.4}"));
    }
    let st = check_structure(sys, &del.inner.to_diagram(), s, &del.cores, region_bounded(host, s));
    if !st.ok() {
        out.push(format!("site {id}: structure: {}", st.violations.join("; ")));
    }
    Ok(out)
}

fn cmd_verify(a: VerifyArgs, eps: Option<f64>) -> Result<()> {
    let fixed = a.sites.as_deref().map(|p| load(p, eps)).transpose()?;
    let kind = parse_backend(&a.backend)?;
    let (mut passed, mut failures) = (0, Vec::new());
    for trial in 0..a.trials {
        let (sys, seed) = match &fixed {
            Some(s) => (s.clone(), a.seed.wrapping_add(trial as u64)),
            None => generate_general(kind, a.n, a.seed.wrapping_add(trial as u64), None, eps)?,
        };
        let host = brute_voronoi(&sys, &all(&sys), Mode::Nearest)?;
        let targets = match a.site {
            Some(id) => vec![site_index(&sys, id)?],
            None => all(&sys),
        };
        let mut bad = Vec::new();
        for s in targets {
            bad.extend(check_one(&sys, &host, s, seed, a.samples)?);
        }
        if bad.is_empty() {
            passed += 1;
        } else {
            failures.push(format!("trial {trial} (seed {seed}): {}", bad.join(" | ")));
        }
    }
    for f in &failures {
        eprintln!("{f}");
    }
    println!("{passed}/{} pass", a.trials);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(VerifyFailed(format!("{} of {} trials failed", failures.len(), a.trials)).into())
    }
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let kind = parse_backend(&a.backend)?;
    if a.sizes.windows(2).any(|w| w[0] >= w[1]) || a.sizes.iter().any(|&h| h < 2) {
        bail!("sizes must be ascending and at least 2");
    }
    let rows = bench_linear(kind, &a.sizes, a.trials, a.seed)?;
    let w = sink(a.out.as_deref())?;
    write_csv(w, &rows)?;
    let sum = summarize(&rows);
    for (i, (h, work, d)) in sum.iter().enumerate() {
        let ratio = if i > 0 { format!("{:.3}", work / sum[i - 1].1) } else { "-".into() };
        eprintln!("h {h:>6}  mean work {work:>10.1}  ratio {ratio:>6}  mean d(beta) {d:.3}");
    }
    Ok(())
}

fn cmd_fvd(a: FvdArgs, eps: Option<f64>) -> Result<()> {
    let sys = load(&a.sites, eps)?;
    let b = fvd_build(&sys, &all(&sys), a.seed, InsertOptions::default())?;
    if let Some(p) = &a.svg {
        fs::write(p, diagram_svg(&sys, &b.diagram))?;
    }
    emit_diagram(&sys, &b.diagram, a.out.as_deref())
}

fn cmd_svg(a: SvgArgs, eps: Option<f64>) -> Result<()> {
    let sys = load(&a.sites, eps)?;
    let d = read_diagram(File::open(&a.diagram).with_context(|| format!("opening {}", a.diagram.display()))?, &sys)?;
    let mut w = sink(a.out.as_deref())?;
    w.write_all(diagram_svg(&sys, &d).as_bytes())?;
    w.flush()?;
    Ok(())
}

/// 1 for failed checks, 3 for a broken construction, 2 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<VerifyFailed>() {
            return 1;
        }
        if let Some(d) = cause.downcast_ref::<DeletionError>() {
            return match d {
                DeletionError::Insert { source: InsertError::Kernel(_), .. } => 2,
                DeletionError::Insert { .. } | DeletionError::Stitch(_) => 3,
                _ => 2,
            };
        }
        if cause.is::<InsertError>() {
            return 3;
        }
        if cause.is::<KernelError>() {
            return 2;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let eps = cli.eps;
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a, cli.eps),
        Cmd::Build(a) => cmd_build(a, eps),
        Cmd::Delete(a) => cmd_delete(a, eps),
        Cmd::Verify(a) => cmd_verify(a, eps),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Fvd(a) => cmd_fvd(a, eps),
        Cmd::Svg(a) => cmd_svg(a, eps),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
