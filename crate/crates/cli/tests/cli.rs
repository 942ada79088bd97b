use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hyperflock::output::{FinalState, RunManifest, RunStatus};
use serde_json::json;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperflock")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, value: serde_json::Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn small() -> serde_json::Value {
    json!({ "n": 5, "dim": 2, "kappa": 1.0, "dt": 0.01, "t_end": 1.0, "sample_every": 10, "seed": 9 })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", small());
    let out = tmp.path().join("run");
    let o = bin(&["simulate", "--config", &cfg, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("run.csv")).unwrap();
    assert!(csv.starts_with("t,energy,log10_energy,max_misalign,max_dist,constraint_drift,det_123,lemma41_max,"));
    assert_eq!(csv.lines().count(), 1 + 11);

    let m: RunManifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.status, RunStatus::Completed);
    assert_eq!((m.seed, m.config.n, m.rng_algorithm.as_str(), m.records), (9, 5, "splitmix64", 11));

    let f: FinalState = serde_json::from_str(&fs::read_to_string(out.join("final_state.json")).unwrap()).unwrap();
    assert_eq!((f.x.len(), f.v.len(), f.x[0].len()), (5, 5, 3));
    assert!((f.t - 1.0).abs() < 1e-12);
}

#[test]
fn zero_duration_gives_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small();
    c["t_end"] = json!(0.0);
    let cfg = write(tmp.path(), "c.json", c);
    let out = tmp.path().join("run");
    assert!(bin(&["simulate", "--config", &cfg, "--out", s(&out)]).status.success());
    assert_eq!(fs::read_to_string(out.join("run.csv")).unwrap().lines().count(), 2);
}

#[test]
fn manifest_reruns_bit_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small();
    c["weight"] = json!({ "kind": "cs_kernel", "beta": 0.5 });
    let cfg = write(tmp.path(), "c.json", c);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(bin(&["simulate", "--config", &cfg, "--out", s(&a)]).status.success());
    let manifest = a.join("manifest.json");
    assert!(bin(&["simulate", "--config", s(&manifest), "--out", s(&b)]).status.success());
    assert_eq!(fs::read(a.join("run.csv")).unwrap(), fs::read(b.join("run.csv")).unwrap());
    assert_eq!(fs::read(a.join("final_state.json")).unwrap(), fs::read(b.join("final_state.json")).unwrap());
}

#[test]
fn preset_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", json!({ "t_end": 0.01, "dt": 0.001 }));
    let out = tmp.path().join("run");
    let o = bin(&["simulate", "--preset", "geodesic-hk", "--config", &cfg, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!((m.config.n, m.config.weight.name(), m.config.t_end), (5, "cosh_distance", 0.01));
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small();
    c["dt"] = json!("fast");
    let cfg = write(tmp.path(), "c.json", c);
    let o = bin(&["simulate", "--config", &cfg, "--out", s(&tmp.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`dt`") && err.contains("c.json"), "{err}");

    fs::write(tmp.path().join("broken.json"), "{ \"n\": ").unwrap();
    let o = bin(&["simulate", "--config", s(&tmp.path().join("broken.json")), "--out", s(&tmp.path().join("y"))]);
    assert_eq!(o.status.code(), Some(2));

    let o = bin(&["simulate", "--config", s(&tmp.path().join("missing.json")), "--out", s(&tmp.path().join("z"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn blow_up_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let c = json!({
        "n": 1, "dim": 1, "kappa": 1.0, "dt": 1.0, "t_end": 5.0,
        "initializer": { "kind": "explicit", "x": [[1.0, 0.0]], "v": [[0.0, 800.0]] }
    });
    let cfg = write(tmp.path(), "c.json", c);
    let out = tmp.path().join("run");
    let o = bin(&["simulate", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(!m.status.is_completed());
    assert!(out.join("final_state.json").exists());
}

#[test]
fn verify_exit_codes() {
    let o = bin(&["verify", "--suite", "trig-identities", "--samples", "200"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("law of sines") && text.contains("all checks passed"), "{text}");

    let o = bin(&["verify", "--suite", "holonomy", "--samples", "0"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("vacuous pass"));

    let o = bin(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn one_cell_sweep_matches_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", small());
    let sweep = write(tmp.path(), "s.json", json!({ "base": small() }));
    let (single, grid) = (tmp.path().join("single"), tmp.path().join("grid"));
    assert!(bin(&["simulate", "--config", &cfg, "--out", s(&single)]).status.success());
    assert!(bin(&["sweep", "--config", &sweep, "--out", s(&grid)]).status.success());
    let cell = grid.join("cell_0000");
    for f in ["run.csv", "final_state.json"] {
        assert_eq!(fs::read(single.join(f)).unwrap(), fs::read(cell.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_grid_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let mut base = small();
    base["t_end"] = json!(0.5);
    let plan = json!({
        "base": base,
        "grid": { "kappa": [0.5, 1.0, 2.0], "weight": [{ "kind": "constant", "c": 1.0 }, { "kind": "cosh_distance" }], "seeds": 2 }
    });
    let sweep = write(tmp.path(), "s.json", plan);
    let out = tmp.path().join("grid");
    let o = bin(&["sweep", "--config", &sweep, "--out", s(&out), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = summary.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert_eq!(r[5], "completed");
        assert!(r[10].parse::<f64>().unwrap() <= 1e-12, "energy rose: {r:?}");
        let cosh = r[3] == "cosh_distance";
        assert_eq!(r[11] == "not applicable", cosh);
        assert_eq!(r[12] == "not applicable", cosh);
    }
    let seeds: Vec<u64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(seeds, (9..21).collect::<Vec<_>>());
    assert!(out.join("cell_0011").join("manifest.json").exists());
}

#[test]
fn sweep_reports_failed_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = json!({
        "base": { "n": 1, "dim": 1, "kappa": 1.0, "dt": 1.0, "t_end": 5.0,
                  "initializer": { "kind": "explicit", "x": [[1.0, 0.0]], "v": [[0.0, 800.0]] } }
    });
    let sweep = write(tmp.path(), "s.json", plan);
    let out = tmp.path().join("grid");
    let o = bin(&["sweep", "--config", &sweep, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    assert!(!summary.lines().nth(1).unwrap().contains(",completed,"));
}
