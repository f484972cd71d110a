use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use paclab::cli::output::{read_distributions, CURVE_FILE, DISTRIBUTIONS_FILE, MANIFEST_FILE};

fn paclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paclab"))
        .args(args)
        .env_remove("PACLAB_SEED")
        .output()
        .expect("binary runs")
}

fn small_experiment(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "experiment",
        "--trials",
        "50",
        "--m-start",
        "25",
        "--m-step",
        "25",
        "--m-max",
        "100",
        "--out-dir",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    paclab(&args)
}

fn curve_rows(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join(CURVE_FILE))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn experiment_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_experiment(tmp.path(), &["--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rows = curve_rows(tmp.path());
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["25", "50", "75", "100"]);
    let header = fs::read_to_string(tmp.path().join(CURVE_FILE)).unwrap();
    assert!(header.starts_with("m,mean_p,std_p,mean_q,std_q,kl\n"));

    let dists = read_distributions(&tmp.path().join(DISTRIBUTIONS_FILE)).unwrap();
    assert_eq!(dists.len(), 8);
    for d in &dists {
        assert_eq!(d.dist.num_slots(), 100);
        assert!((d.dist.masses().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest["command"], "experiment");
    assert_eq!(manifest["config"]["master_seed"], 5);
    assert_eq!(manifest["config"]["task"]["name"], "conjunction");
    assert_eq!(manifest["config"]["task"]["n"], 10);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(small_experiment(a.path(), &["--seed", "11", "--task", "threshold", "--gt-mode", "fixed"])
        .status
        .success());
    let manifest = a.path().join(MANIFEST_FILE);
    let out = paclab(&[
        "experiment",
        "--config",
        manifest.to_str().unwrap(),
        "--out-dir",
        b.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [DISTRIBUTIONS_FILE, CURVE_FILE, MANIFEST_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(small_experiment(a.path(), &["--seed", "77"]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_paclab"))
        .args(["experiment", "--trials", "50", "--m-max", "100", "--out-dir", b.path().to_str().unwrap()])
        .env("PACLAB_SEED", "77")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(a.path().join(CURVE_FILE)).unwrap(), fs::read(b.path().join(CURVE_FILE)).unwrap());
}

#[test]
fn config_file_is_read() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "task = \"threshold\"\ntrials = 20\nm_start = 10\nm_step = 10\nm_max = 30\nslots = 10\n").unwrap();
    let out_dir = tmp.path().join("out");
    let out = paclab(&["experiment", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = curve_rows(&out_dir);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][0], "30");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(small_experiment(tmp.path(), &["--slots", "1"]).status.code(), Some(1));
    assert_eq!(paclab(&["experiment", "--bogus"]).status.code(), Some(1));
    let bad_cfg = tmp.path().join("bad.toml");
    fs::write(&bad_cfg, "unknown_key = 3\n").unwrap();
    assert_eq!(paclab(&["experiment", "--config", bad_cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(paclab(&["experiment", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(2));

    // a regular file where the output directory should be
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = small_experiment(&blocker.join("sub"), &[]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(paclab(&["kl", "/nonexistent/p.csv", "/nonexistent/q.csv"]).status.code(), Some(2));
}

#[test]
fn bound_reproduces_reference_cutoffs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = paclab(&["bound", "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary = fs::read_to_string(tmp.path().join("bound_summary.csv")).unwrap();
    let cutoffs: Vec<(u64, f64)> = summary
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(cutoffs.iter().map(|c| c.0).collect::<Vec<_>>(), [22, 35, 100]);
    assert!((cutoffs[0].1 - 0.9420).abs() < 5e-5);
    assert!((cutoffs[2].1 - 0.2072).abs() < 5e-5);

    let curves = fs::read_to_string(tmp.path().join("bound_curves.csv")).unwrap();
    let mut rows = 0;
    for line in curves.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let eps: f64 = f[1].parse().unwrap();
        let cdf: f64 = f[2].parse().unwrap();
        if eps >= 1.0 {
            assert_eq!(cdf, 1.0);
        }
        rows += 1;
    }
    assert_eq!(rows, 3 * 1000);

    let qs = read_distributions(&tmp.path().join(DISTRIBUTIONS_FILE)).unwrap();
    assert_eq!(qs.len(), 3);
    assert!(qs.iter().all(|q| q.source == "Q"));
}

#[test]
fn bound_vc_and_conjunction_class() {
    let tmp = tempfile::tempdir().unwrap();
    let out = paclab(&["bound", "--kind", "vc", "--m", "20,1000", "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let summary = fs::read_to_string(tmp.path().join("bound_summary.csv")).unwrap();
    let first: f64 = summary.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((first - 0.199_786_613_677_699_55).abs() < 1e-12);

    let out = paclab(&["bound", "--n", "10", "--m", "25", "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let summary = fs::read_to_string(tmp.path().join("bound_summary.csv")).unwrap();
    let cutoff: f64 = summary.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((cutoff - 0.439).abs() < 1e-3);

    assert_eq!(paclab(&["bound", "--h-size", "0.5"]).status.code(), Some(1));
    assert_eq!(paclab(&["bound", "--m", "0", "--out-dir", tmp.path().to_str().unwrap()]).status.code(), Some(1));
}

fn kl_value(out: &Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).trim().parse().unwrap()
}

#[test]
fn kl_command() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(small_experiment(tmp.path(), &["--seed", "3"]).status.success());
    let dists = tmp.path().join(DISTRIBUTIONS_FILE);
    let d = dists.to_str().unwrap();

    let same = paclab(&["kl", d, d, "--m", "50", "--p-source", "Q", "--q-source", "Q"]);
    assert_eq!(kl_value(&same), 0.0);

    // matches the curve's kl column bit for bit
    let rows = curve_rows(tmp.path());
    for row in rows {
        let out = paclab(&["kl", d, d, "--m", &row[0], "--p-source", "P", "--q-source", "Q"]);
        assert_eq!(kl_value(&out), row[5].parse::<f64>().unwrap());
    }

    // disjoint supports hit the floor ceiling
    let p = tmp.path().join("p.csv");
    let q = tmp.path().join("q.csv");
    let table = |hot: usize| {
        let mut s = String::from("m,source,slot_index,slot_lo,slot_hi,mass\n");
        for i in 0..100 {
            let mass = if i == hot { 1.0 } else { 0.0 };
            s += &format!("1,X,{i},{},{},{mass}\n", i as f64 / 100.0, (i + 1) as f64 / 100.0);
        }
        s
    };
    fs::write(&p, table(0)).unwrap();
    fs::write(&q, table(99)).unwrap();
    let v = kl_value(&paclab(&["kl", p.to_str().unwrap(), q.to_str().unwrap()]));
    assert!((v - 52.0).abs() < 1.0);

    // ambiguous selection and slot mismatch are input errors
    assert_eq!(paclab(&["kl", d, d]).status.code(), Some(1));
    let short = tmp.path().join("short.csv");
    fs::write(&short, "m,source,slot_index,slot_lo,slot_hi,mass\n1,X,0,0,0.5,0.5\n1,X,1,0.5,1,0.5\n").unwrap();
    assert_eq!(paclab(&["kl", p.to_str().unwrap(), short.to_str().unwrap()]).status.code(), Some(1));
}
