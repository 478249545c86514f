use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_delaywave"));
    c.env_remove("DELAYWAVE_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn out_dir(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

const CONSERVATION: &str = r#"{
    "params": {"a": 0, "k": 0, "tau": 0, "xi": 1},
    "grid": {"kind": "interval", "nx": 401},
    "init": {"preset": "eigenmode"},
    "t_end": 10,
    "conservation": true,
    "sampling": {"sample_every": 10}
}"#;

#[test]
fn simulate_conservation_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CONSERVATION);
    let out = out_dir(&dir, "out");
    let o = run(&["simulate", "--config", &cfg, "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&Path::new(&out).join("summary.json"));
    assert_eq!(s["status"], "completed");
    assert!(s["fit"]["c2"].as_f64().unwrap().abs() < 1e-3);
    assert_eq!(s["n_tau"], 0);
    assert_eq!(s["dt"].as_f64().unwrap(), 0.00125);
    let csv = fs::read_to_string(Path::new(&out).join("energy.csv")).unwrap();
    let mut lines = csv.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "t,e_standard,e_delay,e_total,s_func,mult_term,lyap,boundary_diss"
    );
    assert_eq!(lines.count(), 801);
    assert!(!csv.contains('\r'));
}

#[test]
fn stable_delayed_run_decays_within_envelope() {
    // a = a0(0.2)/2 on the unit interval
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "s.json",
        r#"{
            "params": {"a": 0.030864197530864196, "k": 0.2, "tau": 1, "xi": 0.06172839506172839},
            "grid": {"kind": "interval", "nx": 201},
            "init": {"preset": "eigenmode"},
            "t_end": 8
        }"#,
    );
    let out = out_dir(&dir, "out");
    let o = run(&["simulate", "--config", &cfg, "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&Path::new(&out).join("summary.json"));
    assert!(s["fit"]["c2"].as_f64().unwrap() > 0.0);
    assert_eq!(s["bound_check"]["holds"], true);
    let [lo, hi] = [0, 1].map(|i| s["equivalence"][i].as_f64().unwrap());
    assert!(0.0 < lo && lo <= hi && hi.is_finite());
}

#[test]
fn summary_config_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "g.json",
        r#"{
            "params": {"a": 0.02, "k": 1, "tau": 0.5, "xi": 0.04},
            "grid": {"kind": "rectangle", "nx": 21, "ny": 21},
            "init": {"preset": "gaussian", "center": [0.5, 0.5], "width": 0.15},
            "t_end": 1,
            "sampling": {"sample_every": 5, "snapshot_every": 20}
        }"#,
    );
    let first = out_dir(&dir, "first");
    assert!(run(&["simulate", "--config", &cfg, "--out", &first]).status.success());
    let s = json(&Path::new(&first).join("summary.json"));
    assert_eq!(s["config"]["grid"]["x0"], serde_json::json!([0.0, 0.5]));
    let resolved = write_config(&dir, "resolved.json", &s["config"].to_string());
    let second = out_dir(&dir, "second");
    assert!(run(&["simulate", "--config", &resolved, "--out", &second]).status.success());
    for f in ["energy.csv", "summary.json", "snapshots/snapshot_00001.csv"] {
        let a = fs::read(Path::new(&first).join(f)).unwrap();
        let b = fs::read(Path::new(&second).join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let snap = fs::read_to_string(Path::new(&first).join("snapshots/snapshot_00000.csv")).unwrap();
    assert_eq!(snap.lines().next().unwrap(), "# t=0");
    assert_eq!(snap.lines().count(), 1 + 21 * 21);
}

#[test]
fn missing_field_exits_2_with_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", &CONSERVATION.replace(r#""tau": 0, "#, ""));
    let o = run(&["simulate", "--config", &cfg, "--out", &out_dir(&dir, "out")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("params") && err.contains("tau"), "{err}");
}

#[test]
fn invalid_params_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", &CONSERVATION.replace(r#""conservation": true"#, r#""conservation": false"#));
    let o = run(&["simulate", "--config", &cfg, "--out", &out_dir(&dir, "out")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k must be positive"));
}

#[test]
fn blow_up_is_an_outcome() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "b.json",
        r#"{
            "params": {"a": 20, "k": 0, "tau": 1, "xi": 1},
            "grid": {"kind": "interval", "nx": 101},
            "init": {"preset": "eigenmode"},
            "t_end": 40,
            "conservation": true,
            "sampling": {"sample_every": 20}
        }"#,
    );
    let out = out_dir(&dir, "out");
    let o = run(&["simulate", "--config", &cfg, "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&Path::new(&out).join("summary.json"))["status"], "blow_up");
}

#[test]
fn output_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "env_out");
    let o = bin()
        .args(["region", "--k", "1"])
        .env("DELAYWAVE_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(Path::new(&out).join("region.json").exists());
}

#[test]
fn region_interval_unit() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "r");
    let o = run(&["region", "--k", "1", "--tau", "1", "--preset", "interval-unit", "--out", &out]);
    assert!(o.status.success());
    let r = json(&Path::new(&out).join("region.json"));
    let a0 = r["a0"].as_f64().unwrap();
    let expected = 1.0 / (3.0 * (3.0 + 4.0 / (std::f64::consts::PI * std::f64::consts::PI)));
    assert!((a0 - expected).abs() < 1e-12);
    assert!((a0 - 0.09789).abs() < 5e-6);
    let csv = fs::read_to_string(Path::new(&out).join("polygon.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "a,xi");
    assert!(rows.len() >= 4);
}

#[test]
fn region_small_gain_and_bad_constants() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "r");
    assert!(run(&["region", "--k", "1e-6", "--out", &out]).status.success());
    assert!(json(&Path::new(&out).join("region.json"))["a0"].as_f64().unwrap() < 1e-6);
    let o = run(&["region", "--k", "1", "--delta", "0", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["region", "--k", "1", "--preset", "disk", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_cases() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "s");
    let summary = |args: &[&str]| {
        let mut all = vec!["spectrum"];
        all.extend_from_slice(args);
        all.extend_from_slice(&["--out", &out]);
        let o = run(&all);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        json(&Path::new(&out).join("summary.json"))
    };
    let s = summary(&["--a", "1", "--k", "0", "--tau", "1"]);
    assert!((s["abscissa"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    let s = summary(&["--a", "1", "--k", "0.5", "--tau", "1"]);
    assert!(s["abscissa"].as_f64().unwrap() < 0.0);
    assert_eq!(s["below_threshold"], true);
    assert!((s["threshold"].as_f64().unwrap() - 1f64.tanh()).abs() < 1e-15);
    assert_eq!(s["winding_matches"], true);
    let s = summary(&["--a", "1", "--k", "0.9", "--tau", "1"]);
    assert_eq!(s["below_threshold"], false);
    assert_eq!(s["claim"], "condition not satisfied; no claim");
    let csv = fs::read_to_string(Path::new(&out).join("roots.csv")).unwrap();
    assert_eq!(csv.lines().find(|l| !l.starts_with('#')), Some("re,im,residual"));
}

#[test]
fn spectrum_winding_mismatch_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "spectrum", "--a", "1", "--k", "0.5", "--tau", "1", "--n-re", "3", "--n-im", "3", "--out",
        &out_dir(&dir, "s"),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("winding"));
}

fn sweep_config(axes: &str, xi_from_a: bool) -> String {
    format!(
        r#"{{
            "base": {{
                "params": {{"a": 0.05, "k": 1, "tau": 1, "xi": 0.1}},
                "grid": {{"kind": "interval", "nx": 101}},
                "init": {{"preset": "polynomial", "lo": [0.3], "hi": [0.7]}},
                "t_end": 4,
                "sampling": {{"sample_every": 4}}
            }},
            "axes": {axes},
            "xi_from_a": {xi_from_a},
            "abscissa": true
        }}"#
    )
}

#[test]
fn sweep_is_sorted_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "sw.json",
        &sweep_config(r#"{"a": [0.01, 0.02, 0.03], "k": [0.5, 1, 2]}"#, true),
    );
    let one = out_dir(&dir, "one");
    let four = out_dir(&dir, "four");
    assert!(run(&["sweep", "--config", &cfg, "--out", &one, "--parallel", "1"]).status.success());
    assert!(run(&["sweep", "--config", &cfg, "--out", &four, "--parallel", "4"]).status.success());
    let a = fs::read_to_string(Path::new(&one).join("sweep.csv")).unwrap();
    let b = fs::read_to_string(Path::new(&four).join("sweep.csv")).unwrap();
    assert_eq!(a, b);
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "a,k,tau,xi,status,C2_fit,abscissa");
    assert_eq!(rows.len(), 10);
    let keys: Vec<(f64, f64)> = rows[1..]
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert_eq!(keys, sorted);
    assert!(rows[1].starts_with("0.01,0.5,1,0.02,completed,"));
}

#[test]
fn sweep_below_threshold_rows_decay() {
    let a0 = 1.0 / (3.0 * (3.0 + 4.0 / (std::f64::consts::PI * std::f64::consts::PI)));
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "sw.json",
        &sweep_config(&format!(r#"{{"a": [{}, {}]}}"#, a0 / 2.0, 2.0 * a0), true),
    );
    let out = out_dir(&dir, "out");
    assert!(run(&["sweep", "--config", &cfg, "--out", &out]).status.success());
    let csv = fs::read_to_string(Path::new(&out).join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][4], "completed");
    assert!(rows[0][5].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn sweep_records_failures_per_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "sw.json", &sweep_config(r#"{"k": [0, 1]}"#, false));
    let out = out_dir(&dir, "out");
    assert!(run(&["sweep", "--config", &cfg, "--out", &out]).status.success());
    let csv = fs::read_to_string(Path::new(&out).join("sweep.csv")).unwrap();
    assert!(csv.contains("# row 0: invalid parameters: k must be positive"));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[1].starts_with("0.05,0,1,0.1,error,,"));
    assert!(rows[2].starts_with("0.05,1,1,0.1,completed,"));
}

#[test]
fn verify_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = run(&["verify", "--out", &out_dir(&dir, "a")]);
    let b = run(&["verify", "--out", &out_dir(&dir, "b"), "--parallel", "2"]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    let text = String::from_utf8(a.stdout).unwrap();
    for id in 1..=8 {
        assert!(text.contains(&format!("criterion {id}: ")), "{id}");
    }
    assert_eq!(fs::read_to_string(dir.path().join("a/verify.txt")).unwrap(), text);
}
