use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_combnls"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn csv_rows(p: &str) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn manifest(p: &str) -> serde_json::Value {
    let m = format!("{p}.manifest.json");
    assert!(Path::new(&m).exists(), "no manifest beside {p}");
    serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap()
}

#[test]
fn no_subcommand_is_a_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["simulate", "--K", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explicit_keeps_modulus() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "b.csv");
    run_ok(&[
        "--quiet",
        "explicit",
        "--alpha-re",
        "0.5",
        "--sweep",
        "1:40:7",
        "--out",
        &out,
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["t", "re", "im", "phase", "tail_bound"]);
    assert_eq!(rows.len(), 8);
    for r in &rows[1..] {
        let (re, im): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((re.hypot(im) - 0.5).abs() < 1e-12);
    }
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "explicit");
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn a_system_rejects_zero_start() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"offset":0,"values":[[0.1,0]]}"#);
    let out = bin()
        .args([
            "simulate", "--alpha", &a, "--K", "1", "--system", "A", "--t0", "0", "--t1", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = TempDir::new().unwrap();
    let nan = write(&dir, "nan.json", r#"{"offset":0,"values":[[NaN,0]]}"#);
    let wide = write(&dir, "wide.json", r#"{"offset":-3,"values":[[0.1,0]]}"#);
    for (f, needle) in [(&nan, "non-finite"), (&wide, "exceeds")] {
        let out = bin()
            .args(["resonance-table", "--K", "2", "--alpha", f])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&out.stderr).contains(needle));
    }
}

#[test]
fn reruns_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let a = write(
        &dir,
        "a.json",
        r#"{"offset":-1,"values":[[0.05,0],[0.1,0.02],[0,0.04]]}"#,
    );
    let mut digests = Vec::new();
    for threads in ["1", "3"] {
        let out = path(&dir, &format!("traj{threads}.csv"));
        run_ok(&[
            "--quiet",
            "--threads",
            threads,
            "simulate",
            "--alpha",
            &a,
            "--K",
            "2",
            "--t0",
            "1",
            "--t1",
            "5",
            "--samples",
            "9",
            "--out",
            &out,
        ]);
        digests.push(manifest(&out)["outputs"][0]["sha256"].clone());
        assert_eq!(manifest(&out)["inputs"][0]["path"], a.as_str());
    }
    assert_eq!(digests[0], digests[1]);

    let first = path(&dir, "traj1.csv");
    let recorded = manifest(&first);
    let before = fs::read(&first).unwrap();
    fs::remove_file(&first).unwrap();
    let argv: Vec<String> = recorded["argv"].as_array().unwrap()[1..]
        .iter()
        .map(|a| a.as_str().unwrap().to_owned())
        .collect();
    let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
    run_ok(&argv);
    assert_eq!(fs::read(&first).unwrap(), before);
    assert_eq!(
        manifest(&first)["outputs"][0]["sha256"],
        recorded["outputs"][0]["sha256"]
    );
}

#[test]
fn stdout_runs_still_emit_a_manifest() {
    let out = run_ok(&[
        "--quiet",
        "explicit",
        "--alpha-re",
        "0.5",
        "--alpha-im",
        "0",
        "--t",
        "10",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,re,im,phase,tail_bound");
    let row: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[1].hypot(row[2]) - 0.5).abs() < 1e-14);
    let m: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(m["subcommand"], "explicit");
    assert_eq!(m["flags"]["t"], 10.0);
}

#[test]
fn pipeline_writes_headers_and_manifests() {
    let dir = TempDir::new().unwrap();
    let a = write(
        &dir,
        "a.json",
        r#"{"offset":0,"values":[[0.05,0],[0.03,0.02]]}"#,
    );
    let table = path(&dir, "table.json");
    run_ok(&[
        "--quiet",
        "resonance-table",
        "--K",
        "1",
        "--alpha",
        &a,
        "--out",
        &table,
    ]);
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(t["K"], 1);
    assert_eq!(t["entries"]["0"].as_array().unwrap().len(), 2);
    manifest(&table);

    let b = path(&dir, "b.csv");
    let diag = path(&dir, "diag.csv");
    run_ok(&[
        "--quiet",
        "simulate",
        "--alpha",
        &a,
        "--K",
        "1",
        "--t0",
        "3.2",
        "--t1",
        "40",
        "--samples",
        "800",
        "--out",
        &b,
        "--diagnostics",
        &diag,
    ]);
    assert_eq!(csv_rows(&b)[0], ["t", "k", "re", "im"]);
    assert_eq!(csv_rows(&b).len(), 1 + 800 * 3);
    assert_eq!(csv_rows(&diag)[0], ["t", "mass", "energy"]);

    let n = path(&dir, "norms.csv");
    let s = path(&dir, "summary.json");
    run_ok(&[
        "--quiet",
        "norms",
        "--traj",
        &b,
        "--alpha",
        &a,
        "--nu-min",
        "2",
        "--nu-max",
        "10",
        "--out",
        &n,
        "--summary",
        &s,
    ]);
    assert_eq!(csv_rows(&n)[0], ["nu", "k", "norm"]);
    assert_eq!(csv_rows(&n).len(), 1 + 9 * 3);
    let sum: serde_json::Value = serde_json::from_str(&fs::read_to_string(&s).unwrap()).unwrap();
    assert!(sum["xsp"].as_f64().unwrap() > 0.0);
    assert_eq!(manifest(&n)["inputs"].as_array().unwrap().len(), 2);

    let fp = path(&dir, "fp.csv");
    let rep = path(&dir, "fp.json");
    run_ok(&[
        "--quiet",
        "fixed-point",
        "--alpha",
        &a,
        "--K",
        "1",
        "--N",
        "1",
        "--tmax",
        "235.6",
        "--out",
        &fp,
        "--report",
        &rep,
    ]);
    assert_eq!(csv_rows(&fp)[0], ["t", "k", "re", "im"]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["converged"], true);
    assert!(r["residual"].as_f64().unwrap() < 1e-10);

    let v = path(&dir, "v.csv");
    run_ok(&[
        "--quiet",
        "simulate",
        "--alpha",
        &a,
        "--K",
        "1",
        "--system",
        "V",
        "--t0",
        "1",
        "--t1",
        "2",
        "--samples",
        "20",
        "--out",
        &v,
    ]);
    let f = path(&dir, "field.csv");
    let res = path(&dir, "res.csv");
    run_ok(&[
        "--quiet",
        "field",
        "--traj",
        &v,
        "--xgrid",
        "8",
        "--alpha",
        &a,
        "--out",
        &f,
        "--residual",
        &res,
    ]);
    assert_eq!(csv_rows(&f)[0], ["t", "x", "re", "im"]);
    assert_eq!(csv_rows(&f).len(), 1 + 20 * 8);
    assert_eq!(csv_rows(&res)[0], ["t", "res_l2"]);
    assert_eq!(manifest(&f)["outputs"].as_array().unwrap().len(), 2);

    let d = path(&dir, "div.json");
    let explicit_manifest = path(&dir, "custom.json");
    run_ok(&[
        "--quiet",
        "--manifest",
        &explicit_manifest,
        "divisor-stats",
        "--m-max",
        "1000",
        "--out",
        &d,
    ]);
    let ds: serde_json::Value = serde_json::from_str(&fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(ds["max"], 48);
    assert!(Path::new(&explicit_manifest).exists());
}
