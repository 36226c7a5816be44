use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn avd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avd")).args(args).current_dir(dir).output().expect("binary runs")
}

fn square_and_center(dir: &Path) {
    fs::write(
        dir.join("sq.csv"),
        "id,kind,x,y,weight\n0,euclidean-point,0,0,0\n1,euclidean-point,1,0.05,0\n2,euclidean-point,1.05,1,0\n3,euclidean-point,-0.05,0.95,0\n4,euclidean-point,0.52,0.48,0\n",
    )
    .unwrap();
}

#[test]
fn gen_is_deterministic_and_rejects_zero_sites() {
    let dir = tempfile::tempdir().unwrap();
    let a = avd(&["gen", "--backend", "euclidean", "-n", "5", "--seed", "7"], dir.path());
    let b = avd(&["gen", "--backend", "euclidean", "-n", "5", "--seed", "7"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 6);
    let zero = avd(&["gen", "-n", "0", "--seed", "1"], dir.path());
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn power_generation_yields_loadable_sites() {
    let dir = tempfile::tempdir().unwrap();
    let g = avd(&["gen", "--backend", "power", "-n", "10", "--seed", "3", "--weights", "0,0.04", "-o", "p.json"], dir.path());
    assert!(g.status.success());
    let b = avd(&["build", "--sites", "p.json", "-o", "host.json"], dir.path());
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
}

#[test]
fn deleting_the_center_writes_steps_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    square_and_center(dir.path());
    let run = |out: &str| avd(&["delete", "--sites", "sq.csv", "--site", "4", "--seed", "3", "-o", out, "--svg", "steps", "--trace", "t.jsonl", "--check"], dir.path());
    assert!(run("a.json").status.success());
    assert!(run("b.json").status.success());
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
    let steps = fs::read_dir(dir.path().join("steps")).unwrap().count();
    assert_eq!(steps, 4);
    let replay = avd(&["delete", "--sites", "sq.csv", "--site", "4", "--seed", "3", "--replay", "t.jsonl", "-o", "c.json"], dir.path());
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stderr));

    // The deletion result renders through the svg verb.
    let svg = avd(&["svg", "--sites", "sq.csv", "--diagram", "a.json", "-o", "a.svg"], dir.path());
    assert!(svg.status.success());
    assert!(fs::read_to_string(dir.path().join("a.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn tampered_trace_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    square_and_center(dir.path());
    assert!(avd(&["delete", "--sites", "sq.csv", "--site", "4", "--seed", "3", "--trace", "t.jsonl", "-o", "a.json"], dir.path()).status.success());
    let t = fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let mut lines: Vec<&str> = t.lines().collect();
    lines.pop();
    fs::write(dir.path().join("t.jsonl"), lines.join("\n")).unwrap();
    let r = avd(&["delete", "--sites", "sq.csv", "--site", "4", "--seed", "3", "--replay", "t.jsonl", "-o", "b.json"], dir.path());
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    square_and_center(dir.path());
    let unknown = avd(&["delete", "--sites", "sq.csv", "--site", "9", "--seed", "1"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
    let missing = avd(&["build", "--sites", "nope.csv"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    let no_seed = avd(&["delete", "--sites", "sq.csv", "--site", "4"], dir.path());
    assert_eq!(no_seed.status.code(), Some(2));
}

#[test]
fn last_site_deletes_to_an_empty_diagram() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("one.csv"), "id,kind,x,y,weight\n0,euclidean-point,0.5,0.5,0\n").unwrap();
    let o = avd(&["delete", "--sites", "one.csv", "--site", "0", "--seed", "1"], dir.path());
    assert!(o.status.success());
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["faces"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_passes_on_generated_instances() {
    let dir = tempfile::tempdir().unwrap();
    for backend in ["euclidean", "power", "apollonius"] {
        let o = avd(&["verify", "--backend", backend, "-n", "8", "--trials", "4", "--seed", "11", "--samples", "300"], dir.path());
        assert!(o.status.success(), "{backend}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "4/4 pass");
    }
}

#[test]
fn fvd_drops_the_interior_point() {
    let dir = tempfile::tempdir().unwrap();
    square_and_center(dir.path());
    let o = avd(&["fvd", "--sites", "sq.csv", "--seed", "2"], dir.path());
    assert!(o.status.success());
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sites: Vec<u64> = j["faces"].as_array().unwrap().iter().map(|f| f["site"].as_u64().unwrap()).collect();
    assert_eq!(sites.len(), 4);
    assert!(!sites.contains(&4));
}

#[test]
fn bench_writes_the_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = avd(&["bench", "--sizes", "16,32", "--trials", "2", "--seed", "5", "-o", "b.csv"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "backend,h,trial,seed,total_traced,mean_d_beta,max_Pi_over_i,wall_ns");
    assert_eq!(csv.lines().count(), 5);
    let bad = avd(&["bench", "--sizes", "32,16", "--seed", "5"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
