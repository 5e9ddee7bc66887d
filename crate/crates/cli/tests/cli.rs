use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gsdu(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsdu"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GSDU_THREADS")
        .output()
        .expect("spawn gsdu")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

/// 6-node graph with a 2-column signal and a PPNP-form spec (γ = 0.1).
fn fixture() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n1 4\n").unwrap();
    fs::write(
        dir.path().join("x.csv"),
        "1.0,-0.5\n0.2,0.3\n-1.1,2.0\n0.0,0.0\n3.0,1.5\n-0.7,0.4\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("ppnp.json"),
        r#"{"alpha":0.1,"beta":0.9,"t_alpha":[[1,0],[0,1]],"t_beta":[[1,0],[0,1]]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("nonneg.json"),
        r#"{"alpha":0.5,"beta":0.5,"t_alpha":[[1,0],[0,1]],"t_beta":[[1,0],[0,1]],"regularizer":{"kind":"non_neg"}}"#,
    )
    .unwrap();
    dir
}

#[test]
fn closed_form_with_unit_gamma_is_identity() {
    let dir = fixture();
    let out = gsdu(
        &["denoise", "--graph", "g.txt", "--features", "x.csv", "--solver", "closed-form", "--gamma", "1.0", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_csv(&dir.path().join("x.csv")), read_csv(&dir.path().join("o/denoised.csv")));
    let manifest = json(&fs::read(dir.path().join("o/manifest.json")).unwrap());
    assert_eq!(manifest["command"], "denoise");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn gd_reaches_closed_form() {
    let dir = fixture();
    let base = ["denoise", "--graph", "g.txt", "--features", "x.csv", "--spec", "ppnp.json"];
    let cf = gsdu(&[&base[..], &["--solver", "closed-form", "--out", "cf"]].concat(), dir.path());
    assert!(cf.status.success());
    let gd = gsdu(&[&base[..], &["--solver", "gd", "--iters", "400", "--out", "gd"]].concat(), dir.path());
    assert!(gd.status.success(), "{}", String::from_utf8_lossy(&gd.stderr));
    let a = read_csv(&dir.path().join("cf/denoised.csv"));
    let b = read_csv(&dir.path().join("gd/denoised.csv"));
    let diff = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-6, "diff {diff}");
    let report = json(&fs::read(dir.path().join("gd/solve_report.json")).unwrap());
    // stops early only once the objective stalls exactly
    let iters = report["solve"]["iterations"].as_u64().unwrap();
    assert!(iters == 400 || (iters < 400 && report["solve"]["converged"] == true));
}

#[test]
fn proxgd_nonneg_output() {
    let dir = fixture();
    let out = gsdu(
        &["denoise", "--graph", "g.txt", "--features", "x.csv", "--spec", "nonneg.json", "--solver", "proxgd", "--iters", "50", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read_csv(&dir.path().join("o/denoised.csv")).iter().flatten().all(|&v| v >= 0.0));
}

#[test]
fn exit_codes() {
    let dir = fixture();
    let missing_graph = gsdu(&["denoise", "--features", "x.csv", "--solver", "gd", "--out", "o"], dir.path());
    assert_eq!(missing_graph.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing_graph.stderr).contains("Usage"));

    let bad_file = gsdu(
        &["denoise", "--graph", "nope.txt", "--features", "x.csv", "--solver", "closed-form", "--gamma", "0.5", "--out", "o"],
        dir.path(),
    );
    assert_eq!(bad_file.status.code(), Some(2));

    let mismatch = gsdu(
        &["denoise", "--graph", "g.txt", "--features", "x.csv", "--spec", "ppnp.json", "--solver", "proxgd", "--out", "o"],
        dir.path(),
    );
    assert_eq!(mismatch.status.code(), Some(3));

    let smooth_only = gsdu(
        &["denoise", "--graph", "g.txt", "--features", "x.csv", "--spec", "nonneg.json", "--solver", "gd", "--out", "o"],
        dir.path(),
    );
    assert_eq!(smooth_only.status.code(), Some(3));

    assert_eq!(gsdu(&["equiv", "--model", "unknown"], dir.path()).status.code(), Some(2));
    assert_eq!(gsdu(&["train", "--dataset", "files:missing.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn equiv_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsdu(&["equiv", "--model", "all", "--trials", "50", "--tol", "1e-9", "--out", "eq"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert_eq!(report["pass"], true);
    assert_eq!(report["models"].as_array().unwrap().len(), 7);
    let manifest = json(&fs::read(dir.path().join("eq/manifest.json")).unwrap());
    assert!(manifest["random_graph_model"].as_str().unwrap().contains("Erdos-Renyi"));
}

#[test]
fn equiv_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsdu(&["equiv", "--model", "jknet", "--trials", "5", "--tol", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equiv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["equiv", "--model", "sgc", "--trials", "1", "--seed", "7"];
    let a = gsdu(&args, dir.path());
    let b = gsdu(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn filter_spot_checks() {
    let dir = fixture();
    let one = json(&gsdu(&["filter", "--theta", "1"], dir.path()).stdout);
    assert_eq!(one["gamma"], serde_json::json!([1.0]));
    assert_eq!(one["verification"]["max_abs_diff"], 0.0);

    let lap = json(&gsdu(&["filter", "--theta", "0,1"], dir.path()).stdout);
    assert_eq!(lap["gamma"], serde_json::json!([1.0, -1.0]));

    let out = gsdu(&["filter", "--theta", "0.3,-1.2,0.8,0.5,-0.2", "--graph", "g.txt", "--out", "f"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out.stdout);
    assert!(rep["verification"]["max_abs_diff"].as_f64().unwrap() < 1e-8);
    let response = fs::read_to_string(dir.path().join("f/response.csv")).unwrap();
    assert!(response.starts_with("lambda,response\n"));
    assert_eq!(response.lines().count(), 7);
}

#[test]
fn train_with_zero_lr_reports_initial_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsdu(&["train", "--dataset", "sbm", "--seed", "1", "--lr", "0", "--epochs", "30"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out.stdout);
    assert_eq!(r["best_epoch"], 0);
    assert_eq!(r["test_acc"], r["epochs"][0]["test_acc"]);
}

#[test]
fn train_default_sbm_is_accurate_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = gsdu(&["train", "--dataset", "sbm", "--out", "a"], dir.path());
    let b = gsdu(&["train", "--dataset", "sbm", "--out", "b"], dir.path());
    assert!(a.status.success());
    let (mut ra, mut rb) = (json(&a.stdout), json(&b.stdout));
    assert!(ra["test_acc"].as_f64().unwrap() >= 0.90);
    ra["wall_clock_seconds"] = 0.into();
    rb["wall_clock_seconds"] = 0.into();
    assert_eq!(ra, rb);
}

#[test]
fn train_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("e.txt"), "0 1\n1 2\n2 3\n3 4\n4 5\n").unwrap();
    fs::write(p.join("f.csv"), "1,0\n1,0\n1,0\n0,1\n0,1\n0,1\n").unwrap();
    fs::write(p.join("l.csv"), "0,train\n0,val\n0,test\n1,test\n1,val\n1,train\n").unwrap();
    let out = gsdu(&["train", "--dataset", "files:e.txt,f.csv,l.csv", "--epochs", "20", "--out", "o"], p);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = json(&fs::read(p.join("o/manifest.json")).unwrap());
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsdu(&["sweep", "--ks", "1,3", "--seeds", "2", "--epochs", "50", "--out", "s"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "K,mean_acc,std_acc");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,") && lines[2].starts_with("3,"));
}

#[test]
fn thread_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gsdu"))
        .args(["equiv", "--model", "sgc", "--trials", "2"])
        .current_dir(dir.path())
        .env("GSDU_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_gsdu"))
        .args(["equiv", "--model", "sgc", "--trials", "2"])
        .current_dir(dir.path())
        .env("GSDU_THREADS", "2")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
