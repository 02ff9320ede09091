use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/three_sector").join(name)
}

fn corrspec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrspec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn analyze(extra: &[&str], out: &Path) -> Output {
    let prices = fixture("prices.csv");
    let sectors = fixture("sectors.csv");
    let mut args = vec![
        "analyze",
        "--prices",
        prices.to_str().unwrap(),
        "--sectors",
        sectors.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    corrspec(&args, out)
}

#[test]
fn analyze_fixture_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let before = fs::read(fixture("prices.csv")).unwrap();
    let out = analyze(&[], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(fixture("prices.csv")).unwrap(), before);

    let mut files: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        [
            "cluster_scan.csv",
            "clusters.csv",
            "component_histograms.csv",
            "edges.csv",
            "eigenvectors.csv",
            "element_histogram.csv",
            "manifest.json",
            "mp_density.csv",
            "spectrum.csv",
            "surrogate_spectrum.csv",
        ]
    );

    let m = manifest(dir.path());
    assert_eq!(m["outputs"].as_object().unwrap().len(), 9);
    assert_eq!(m["results"]["n_g"], 2);
    assert_eq!(m["results"]["network"]["clusters"], 3);
    assert_eq!(m["data"]["filled_cells"], 8);
    assert_eq!(m["inputs"]["prices"]["sha256"].as_str().unwrap().len(), 64);

    let clusters = csv_rows(&dir.path().join("clusters.csv"));
    assert_eq!(clusters.len(), 3);
    assert!(clusters.iter().all(|r| r[4] == "1"));

    let eig = csv_rows(&dir.path().join("eigenvectors.csv"));
    assert_eq!(eig.len(), 4 * 30);
    assert!(eig.iter().filter(|r| r[0] == "0").all(|r| r[3].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn period_split_changes_q() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(analyze(&["--period", "2001-01-01:2002-12-31"], a.path()).status.success());
    assert!(analyze(&["--period", "2003-01-01:2004-12-31"], b.path()).status.success());
    for dir in [a.path(), b.path()] {
        let m = manifest(dir);
        let t = m["results"]["observations"].as_f64().unwrap();
        let n = m["results"]["n_stocks"].as_f64().unwrap();
        assert_eq!(m["results"]["q"].as_f64().unwrap(), t / n);
        assert_eq!(m["data"]["dates"].as_f64().unwrap(), t + 1.0);
    }
    assert_ne!(manifest(a.path())["results"]["q"], manifest(b.path())["results"]["q"]);
}

#[test]
fn no_group_modes_gives_empty_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = analyze(&["--ng", "0", "--thresholds", "0.01:0.5:10"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let hist = csv_rows(&dir.path().join("component_histograms.csv"));
    let occupied: Vec<_> = hist.iter().filter(|r| r[0] == "group" && r[3] != "0").collect();
    assert_eq!(occupied.len(), 1);
    let lo: f64 = occupied[0][1].parse().unwrap();
    let hi: f64 = occupied[0][2].parse().unwrap();
    assert!(lo <= 0.0 && 0.0 <= hi);
    for row in csv_rows(&dir.path().join("cluster_scan.csv")) {
        assert_eq!((row[1].as_str(), row[2].as_str(), row[3].as_str()), ("0", "0", "0"));
    }
}

#[test]
fn decomposition_export() {
    let dir = tempfile::tempdir().unwrap();
    assert!(analyze(&["--export-decomposition"], dir.path()).status.success());
    let d: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("decomposition.json")).unwrap()).unwrap();
    assert_eq!(d["n_g"], 2);
    assert_eq!(d["random_eigenvalues"].as_array().unwrap().len(), 27);
    assert_eq!(d["source_hash"], manifest(dir.path())["inputs"]["prices"]["sha256"]);
    assert_eq!(fs::read_to_string(dir.path().join("group.csv")).unwrap().lines().count(), 31);
}

#[test]
fn simulate_reports_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let out = corrspec(&["simulate", "--gamma", "0.6", "--sigma", "0.2", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    let predicted = m["model"]["predicted"]["lambda0"].as_f64().unwrap();
    let measured = m["model"]["measured"]["lambda0"].as_f64().unwrap();
    assert!((measured / predicted - 1.0).abs() < 0.15);
    assert_eq!(csv_rows(&dir.path().join("analytic_comparison.csv")).len(), 10);
    assert_eq!(m["outputs"].as_object().unwrap().len(), 10);
}

#[test]
fn simulate_without_market() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--no-market", "--gamma", "0.3", "--width", "0", "--seed", "1"];
    assert!(corrspec(&args, dir.path()).status.success());
    let rows = csv_rows(&dir.path().join("analytic_comparison.csv"));
    for r in &rows {
        assert!((r[2].parse::<f64>().unwrap() - 2.71).abs() < 1e-10);
    }
    let mean: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum::<f64>() / rows.len() as f64;
    assert!((mean / 2.71 - 1.0).abs() < 0.1);
    assert_eq!(manifest(dir.path())["model"]["predicted"]["in_regime"], false);
}

#[test]
fn sweep_smoke_and_trends() {
    let dir = tempfile::tempdir().unwrap();
    let out = corrspec(
        &["sweep", "--gamma-grid", "0.5,0.9", "--sigma-grid", "0.3,0.9", "--t-len", "300", "--sizes", "3x10"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(csv_rows(&dir.path().join("sweep_surface.csv")).len() <= 4);
    let feas = csv_rows(&dir.path().join("feasibility.csv"));
    assert_eq!(feas.len(), 4);
    assert!(feas.iter().any(|r| r[2] == "false"));

    let wide = tempfile::tempdir().unwrap();
    let out = corrspec(&["sweep", "--t-len", "500", "--seed", "2"], wide.path());
    assert!(out.status.success());
    let trends = &manifest(wide.path())["results"]["trends"];
    assert!(trends["lambda0_vs_beta_sq"].as_f64().unwrap() > 0.9);
    assert!(trends["lambda1_vs_gamma"].as_f64().unwrap() > 0.5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(corrspec(&["sweep", "--gamma-grid", "0.9", "--sigma-grid", "0.9"], dir.path())), 4);
    assert_eq!(code(corrspec(&["analyze", "--prices", "/nonexistent.csv"], dir.path())), 3);
    assert_eq!(code(analyze(&["--ng", "99"], dir.path())), 2);
    assert_eq!(code(analyze(&["--thresholds", "0.5:0.1:4"], dir.path())), 2);
    assert_eq!(code(analyze(&["--period", "2004-01-01:2003-01-01"], dir.path())), 2);

    let bad = dir.path().join("dup.csv");
    fs::write(&bad, "date,ticker,close\n2001-01-01,A,1\n2001-01-01,A,2\n2001-01-02,A,3\n").unwrap();
    let out = corrspec(&["analyze", "--prices", bad.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(code(out.clone()), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage: ingest"));

    let flat = dir.path().join("flat.csv");
    fs::write(
        &flat,
        "date,ticker,close\nd1,A,1\nd1,B,1\nd2,A,2\nd2,B,1\nd3,A,3\nd3,B,1\nd4,A,2\nd4,B,1\n",
    )
    .unwrap();
    let out = corrspec(&["surrogate", "--prices", flat.to_str().unwrap()], &dir.path().join("f"));
    assert_eq!(code(out), 3);
}

#[test]
fn surrogate_command() {
    let dir = tempfile::tempdir().unwrap();
    let prices = fixture("prices.csv");
    let out = corrspec(&["surrogate", "--prices", prices.to_str().unwrap(), "--seed", "4"], dir.path());
    assert!(out.status.success());
    let m = manifest(dir.path());
    assert_eq!(m["results"]["surrogate"]["fraction_inside_support"], 1.0);
    assert!(m["results"]["original_largest_eigenvalue"].as_f64().unwrap() > 10.0);
    assert_eq!(csv_rows(&dir.path().join("mp_density.csv")).len(), 200);
}
