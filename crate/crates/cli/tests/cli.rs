use std::path::Path;
use std::process::{Command, Output};

use d2p_core::figures::CSV_HEADER;

fn d2p(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2p"))
        .args(args)
        .env_remove("D2P_SEED")
        .env_remove("D2P_THREADS")
        .output()
        .expect("run d2p")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(o)))
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn phases_positioned_end_matches_improved() {
    let a = json(&d2p(&["phases", "--lambda", "0.01", "--template", "positioned", "--position", "7"]));
    let b = json(&d2p(&["phases", "--lambda", "0.01", "--template", "improved"]));
    for key in ["beta1", "beta2"] {
        let (x, y) = (a[key].as_f64().unwrap(), b[key].as_f64().unwrap());
        assert!((x - y).abs() < 1e-8, "{key}: {x} vs {y}");
    }
    assert_eq!(a["k"], 8);
}

#[test]
fn phases_residual_and_domain() {
    let out = d2p(&["phases", "--lambda", "0.125", "--template", "improved"]);
    assert!(out.status.success());
    assert!(json(&out)["residual"].as_f64().unwrap() < 1e-12);

    assert_eq!(d2p(&["phases", "--lambda", "0.3"]).status.code(), Some(2));
    assert_eq!(d2p(&["phases", "--lambda", "0"]).status.code(), Some(2));
    assert_eq!(d2p(&["phases", "--lambda", "0.01", "--template", "positioned"]).status.code(), Some(2));
    assert_eq!(d2p(&["phases", "--lambda", "0.01", "--template", "positioned", "--position", "8"]).status.code(), Some(2));
    assert_eq!(d2p(&["phases", "--lambda", "0.04", "--template", "d2p", "--kd", "1"]).status.code(), Some(2));
}

#[test]
fn phases_csv_and_d2p() {
    let out = d2p(&["phases", "--lambda", "0.04", "--template", "d2p", "--kd", "5", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,template,k,position,beta1,beta2,residual,iterations"));
    assert!(lines.next().unwrap().starts_with("0.04,d2p,5,,"));
}

#[test]
fn simulate_noiseless_improved_is_certain() {
    let out = d2p(&["simulate", "--algorithm", "improved", "--lambda", "0.04", "--noise", "none", "--samples", "1", "--format", "json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["mean_success"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["stderr"].as_f64().unwrap(), 0.0);
    assert_eq!(v["samples"], 1);
}

#[test]
fn simulate_accepts_documented_noise_specs() {
    for spec in [
        "gaussian:mu=0,var=0.04@reflection",
        "poisson:rate=0.04@reflection",
        "uniform:a=-0.1,b=0.2@reflection",
        "gaussian:mu=0.03,var=0.01@both",
        "oracle=gaussian:mu=0,var=0.04;reflection=gaussian:mu=0.03,var=0.01@both",
    ] {
        let out = d2p(&["simulate", "--algorithm", "d2p", "--lambda", "0.04", "--noise", spec, "--samples", "200"]);
        assert!(out.status.success(), "{spec}: {}", String::from_utf8_lossy(&out.stderr));
        let row = csv::Reader::from_reader(out.stdout.as_slice()).records().next().unwrap().unwrap();
        let mean: f64 = row[7].parse().unwrap();
        assert!(mean > 0.5 && mean <= 1.0, "{spec}: {row:?}");
    }
}

#[test]
fn simulate_rejects_bad_input() {
    let bad = [
        vec!["--noise", "laplace:b=1@reflection"],
        vec!["--noise", "gaussian:mu=0,var=-1@reflection"],
        vec!["--samples", "0"],
        vec!["--lambda", "1.5"],
    ];
    for extra in bad {
        let mut args = vec!["simulate", "--algorithm", "original", "--lambda", "0.04"];
        args.extend(extra.iter());
        assert_eq!(d2p(&args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(d2p(&["simulate", "--algorithm", "positioned", "--lambda", "0.04"]).status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let args = ["simulate", "--algorithm", "improved", "--lambda", "0.04", "--noise", "gaussian:mu=0,var=0.04@reflection", "--samples", "500", "--seed", "11"];
    let (a, b) = (d2p(&args), d2p(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let mut other = args.to_vec();
    let last = other.len() - 1;
    other[last] = "12";
    assert_ne!(d2p(&other).stdout, a.stdout);
}

#[test]
fn seed_flag_overrides_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_d2p"));
        c.args(["simulate", "--algorithm", "d2p", "--lambda", "0.05", "--noise", "uniform:a=-0.1,b=0.2", "--samples", "100"]);
        c.env_remove("D2P_SEED");
        if let Some(e) = env {
            c.env("D2P_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("99"), None), run(None, Some("99")));
    assert_eq!(run(Some("5"), Some("99")), run(None, Some("99")));
    assert_ne!(run(Some("5"), None), run(None, Some("99")));
}

#[test]
fn simulate_out_writes_manifest_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("row.csv");
    let o = d2p(&["simulate", "--algorithm", "original", "--lambda", "0.1", "--noise", "poisson:rate=0.04", "--samples", "300", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let manifest = dir.path().join("row.csv.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["params"]["samples"], 300);
    assert_eq!(m["noise"][0], "poisson:rate=0.04@reflection");
    assert!(m["timestamp"].as_u64().unwrap() > 0);

    let again = dir.path().join("again.csv");
    let r = d2p(&["rerun", "--manifest", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn reproduce_position_figure_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2p(&["reproduce", "--figure", "7a", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = dir.path().join("fig7a.csv");
    let header = std::fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, CSV_HEADER);
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 7);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(&r[0], "7a");
        assert_eq!(&r[1], "positioned");
        assert_eq!(&r[2], "0.01");
        assert_eq!(r[3].parse::<usize>().unwrap(), i + 1);
        assert_eq!((&r[4], &r[5], &r[6]), ("gaussian", "0.0", "0.04"));
        assert_eq!((&r[7], &r[8], &r[9]), ("", "", ""));
        assert_eq!(&r[10], "50000");
    }
    assert!(dir.path().join("fig7a.manifest.json").exists());
}

#[test]
fn reproduce_uniform_and_noiseless_figures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(d2p(&["reproduce", "--figure", "5b", "--samples", "20", "--out", d]).status.success());
    let rows = csv_rows(&dir.path().join("fig5b.csv"));
    assert_eq!(rows.len(), 150);
    assert!(rows.iter().all(|r| &r[4] == "uniform" && &r[8] == "-0.1" && &r[9] == "0.2" && r[5].is_empty() && r[7].is_empty()));

    assert!(d2p(&["reproduce", "--figure", "1c", "--samples", "1", "--out", d]).status.success());
    let rows = csv_rows(&dir.path().join("fig1c.csv"));
    assert_eq!(rows.len(), 150);
    for r in rows.iter().filter(|r| &r[1] != "original") {
        let p: f64 = r[12].parse().unwrap();
        assert!((p - 1.0).abs() < 1e-9, "{r:?}");
    }
    let original_below_one = rows.iter().filter(|r| &r[1] == "original").any(|r| r[12].parse::<f64>().unwrap() < 0.99);
    assert!(original_below_one);
}

#[test]
fn reproduce_unknown_figure() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2p(&["reproduce", "--figure", "8c", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let o = d2p(&["verify", "--suite", "determinism"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("determinism: PASS"));

    let o = d2p(&["verify", "--suite", "theorem2", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v[0]["suite"], "theorem2");
    assert!(v[0]["checks"][0]["value"].as_f64().unwrap() > 1e-3);

    let o = d2p(&["verify", "--suite", "geometry"]);
    assert!(o.status.success());

    assert_eq!(d2p(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let o = d2p(&["verify", "--seed", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
