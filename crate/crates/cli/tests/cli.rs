use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn inof(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inof"))
        .args(args)
        .current_dir(cwd)
        .env_remove("INOF_THREADS")
        .output()
        .expect("spawn inof")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = inof(args, cwd);
    assert!(
        out.status.success(),
        "inof {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Small graph: two seeds feeding a ring plus an unreachable pair.
fn fixture() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let mut edges = String::from("# src dst\n");
    for i in 2..12u32 {
        edges.push_str(&format!("{} {}\n", i, 2 + (i - 1) % 10));
        edges.push_str(&format!("{} {}\n", 2 + (i + 3) % 10, i));
    }
    edges.push_str("0 2\n0 5\n1 7\n1 9\n12 13\n13 12\n3 3\n0 2\n");
    fs::write(dir.path().join("edges.txt"), edges).unwrap();
    let titles: Vec<String> = (0..14).map(|i| format!("Page {i}")).collect();
    let mut titles = titles.join("\n");
    titles = titles.replacen("Page 0", "Socialism", 1).replacen("Page 1", "Capitalism, modern", 1);
    fs::write(dir.path().join("titles.txt"), titles + "\n").unwrap();
    ok(
        &["ingest", "--edges", "edges.txt", "--titles", "titles.txt", "--out", "g.bin"],
        dir.path(),
    );
    let graph = dir.path().join("g.bin");
    (dir, graph)
}

fn simulate(cwd: &Path, out: &str, extra: &[&str]) {
    let mut args = vec![
        "simulate", "--graph", "g.bin", "--red", "Socialism", "--blue", "Capitalism\\, modern",
        "--realizations", "60", "--slots", "3", "--seed", "11", "--out", out,
    ];
    args.extend_from_slice(extra);
    ok(&args, cwd);
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn ingest_reports_counts() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("e.txt"), "0 1\n1 1\n0 1\n1 2\n").unwrap();
    let out = ok(&["ingest", "--edges", "e.txt", "--out", "g.bin"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("edges kept:         2"), "{text}");
    assert!(text.contains("self-loops dropped: 1"), "{text}");
    assert!(text.contains("duplicates merged:  1"), "{text}");
    assert!(dir.path().join("g.bin").exists());
}

#[test]
fn ingest_errors_cite_line() {
    let dir = TempDir::new().unwrap();
    let mut body: String = (0..16).map(|i| format!("{i} {}\n", i + 1)).collect();
    body.push_str("16 oops\n");
    fs::write(dir.path().join("e.txt"), body).unwrap();
    let out = inof(&["ingest", "--edges", "e.txt", "--out", "g.bin"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 17"), "{err}");
    assert!(!dir.path().join("g.bin").exists());

    let missing = inof(&["ingest", "--edges", "nope.txt", "--out", "g.bin"], dir.path());
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.txt"));
}

#[test]
fn simulate_writes_all_artifacts() {
    let (dir, _) = fixture();
    simulate(dir.path(), "run", &["--dump-realizations"]);
    let run = dir.path().join("run");
    for name in [
        "manifest.json",
        "pagerank.csv",
        "slot_000_summary.json",
        "slot_002_nodes.csv",
        "slot_001_realizations.csv",
    ] {
        assert!(run.join(name).exists(), "{name} missing");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&read(&run, "manifest.json")).unwrap();
    assert_eq!(manifest["config"]["red_nodes"], serde_json::json!([0]));
    assert_eq!(manifest["config"]["blue_nodes"], serde_json::json!([1]));
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(manifest["graph"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["slots"].as_array().unwrap().len(), 3);

    let nodes = String::from_utf8(read(&run, "slot_000_nodes.csv")).unwrap();
    let mut lines = nodes.lines();
    assert_eq!(lines.next(), Some("node_id,title,k_index,mu,delta_mu,white_freq"));
    assert_eq!(lines.next().unwrap().split(',').nth(3), Some("1"));
    // unreachable pair stays white
    let row12: Vec<&str> = nodes.lines().nth(13).unwrap().split(',').collect();
    assert_eq!((row12[0], row12[3], row12[5]), ("12", "0", "1"));

    let summary: serde_json::Value = serde_json::from_slice(&read(&run, "slot_000_summary.json")).unwrap();
    assert_eq!(summary["n_realizations"], 60);
    let iso = summary["isolated_fraction"].as_f64().unwrap();
    assert!((iso - 2.0 / 14.0).abs() < 1e-12, "{iso}");
}

#[test]
fn simulate_is_deterministic_across_runs_and_threads() {
    let (dir, _) = fixture();
    simulate(dir.path(), "a", &["--threads", "1"]);
    simulate(dir.path(), "b", &["--threads", "4"]);
    let out = Command::new(env!("CARGO_BIN_EXE_inof"))
        .args([
            "simulate", "--graph", "g.bin", "--red", "Socialism", "--blue", "Capitalism\\, modern",
            "--realizations", "60", "--slots", "3", "--seed", "11", "--out", "c",
        ])
        .current_dir(dir.path())
        .env("INOF_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for name in ["pagerank.csv", "slot_000_nodes.csv", "slot_001_nodes.csv", "slot_002_summary.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
        assert_eq!(read(&a, name), read(&c, name), "{name}");
    }
    // manifests agree apart from timings
    let strip = |d: &Path| {
        let mut m: serde_json::Value = serde_json::from_slice(&read(d, "manifest.json")).unwrap();
        m.as_object_mut().unwrap().remove("timings");
        m
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_file_with_flag_override() {
    let (dir, _) = fixture();
    fs::write(
        dir.path().join("exp.json"),
        r##"{"graph": "g.bin", "red": ["#0"], "blue": ["#1"], "realizations": 40, "slots": 2,
            "seed": 5, "matrix": "stochastic", "tau": 10}"##,
    )
    .unwrap();
    ok(&["simulate", "--config", "exp.json", "--slots", "1", "--out", "run"], dir.path());
    let m: serde_json::Value = serde_json::from_slice(&read(&dir.path().join("run"), "manifest.json")).unwrap();
    assert_eq!(m["config"]["n_slots"], 1);
    assert_eq!(m["config"]["n_realizations"], 40);
    assert_eq!(m["config"]["matrix_mode"], "stochastic");
    assert_eq!(m["config"]["tau_max"], 10);

    fs::write(dir.path().join("typo.json"), r#"{"realisations": 3}"#).unwrap();
    let bad = inof(&["simulate", "--config", "typo.json", "--out", "x"], dir.path());
    assert!(!bad.status.success());
}

#[test]
fn unresolved_titles_are_all_listed() {
    let (dir, _) = fixture();
    let out = inof(
        &["simulate", "--graph", "g.bin", "--red", "Socialism,Nowhere", "--red", "Atlantis",
          "--blue", "#1", "--out", "run"],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Nowhere") && err.contains("Atlantis"), "{err}");
    assert!(!dir.path().join("run").join("manifest.json").exists());

    let overlap = inof(
        &["simulate", "--graph", "g.bin", "--red", "#0", "--blue", "#0", "--out", "run"],
        dir.path(),
    );
    assert!(!overlap.status.success());
}

#[test]
fn analyze_emits_requested_tables() {
    let (dir, _) = fixture();
    simulate(dir.path(), "run", &[]);
    fs::write(dir.path().join("cov.csv"), "title,value\nPage 2,0.1\nPage 5,0.7\nPage 7,0.2\nPage 9,0.4\nPage 4,0.3\nMissing,1\n").unwrap();
    fs::write(dir.path().join("sel.txt"), "Page 2\nPage 5\n\nPage 9\n").unwrap();
    let out = ok(
        &["analyze", "--results", "run", "--histogram", "fr", "--fluctuations", "--correlate-slots",
          "--covariate", "cov.csv", "--select-titles", "sel.txt"],
        dir.path(),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("slot,n_realizations,mu_0"), "{stdout}");
    assert_eq!(stdout.lines().count(), 4);

    let analysis = dir.path().join("run").join("analysis");
    let hist = String::from_utf8(read(&analysis, "histogram_fr.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 4 * 30);
    let pooled: f64 = hist
        .lines()
        .filter(|l| l.starts_with("all,"))
        .map(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap() / 30.0)
        .sum();
    assert!((pooled - 1.0).abs() < 1e-9);

    let fl: serde_json::Value = serde_json::from_slice(&read(&analysis, "fluctuations.json")).unwrap();
    assert_eq!(fl["n_slots"], 3);
    assert!(fl["sigma_0"].as_f64().unwrap() >= 0.0);

    let corr = String::from_utf8(read(&analysis, "slot_correlators.csv")).unwrap();
    assert_eq!(corr.lines().count(), 1 + 3);

    let cov: serde_json::Value = serde_json::from_slice(&read(&analysis, "covariate.json")).unwrap();
    assert_eq!(cov[0]["n_matched"], 5);
    assert_eq!(cov[0]["unmatched"], serde_json::json!(["Missing"]));

    let sel = String::from_utf8(read(&analysis, "slot_000_selected.csv")).unwrap();
    assert_eq!(sel.lines().count(), 1 + 3);
}

#[test]
fn analyze_rejects_missing_slot_files() {
    let (dir, _) = fixture();
    simulate(dir.path(), "run", &[]);
    fs::remove_file(dir.path().join("run").join("slot_001_nodes.csv")).unwrap();
    let out = inof(&["analyze", "--results", "run", "--fluctuations"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("slot_001_nodes.csv"));

    let empty = inof(&["analyze", "--results", "."], dir.path());
    assert!(!empty.status.success());
}

#[test]
fn distance_hub_and_profile() {
    let dir = TempDir::new().unwrap();
    let mut edges: String = (2..8).flat_map(|i| [format!("0 {i}\n"), format!("1 {i}\n")]).collect();
    // red-only feeder so node 2 ends colored
    edges.push_str("0 8\n8 2\n");
    fs::write(dir.path().join("e.txt"), edges).unwrap();
    ok(&["ingest", "--edges", "e.txt", "--out", "g.bin"], dir.path());
    ok(&["distance", "--graph", "g.bin", "--red", "#0", "--blue", "#1", "--out", "d"], dir.path());
    let d = dir.path().join("d");
    let joint = String::from_utf8(read(&d, "joint_counts.csv")).unwrap();
    assert!(joint.contains("\n1,1,6\n"), "{joint}");
    assert!(!d.join("profile.csv").exists());

    ok(
        &["simulate", "--graph", "g.bin", "--red", "#0", "--blue", "#1", "--realizations", "20",
          "--out", "run"],
        dir.path(),
    );
    ok(&["distance", "--graph", "g.bin", "--results", "run", "--out", "d2"], dir.path());
    let profile = String::from_utf8(read(&dir.path().join("d2"), "profile.csv")).unwrap();
    assert!(profile.starts_with("d,diagonal,mean_delta_mu,count\n"));
    assert!(profile.contains("1,EQUAL,"), "{profile}");

    ok(&["distance", "--graph", "g.bin", "--red", "#0", "--blue", "#1", "--direction", "reverse",
         "--out", "d3"], dir.path());
    let rev = String::from_utf8(read(&dir.path().join("d3"), "distances.csv")).unwrap();
    assert!(rev.contains("\n2,,\n"), "{rev}");
}
