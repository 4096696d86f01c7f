use std::path::Path;
use std::process::{Command, Output};

use diversinet::experiment::mean_and_sd;
use diversinet::graph::read_edge_list;

fn diversinet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diversinet"))
        .args(args)
        .env_remove("DIVERSINET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = diversinet(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_er_empty_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    stdout(&["gen-er", "--n", "10", "--p", "0", "--out", path_str(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "# 10 nodes, 0 edges");
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn gen_er_is_seeded() {
    let a = stdout(&["gen-er", "--n", "60", "--p", "0.1", "--seed", "3"]);
    let b = stdout(&["gen-er", "--n", "60", "--p", "0.1", "--seed", "3"]);
    let c = stdout(&["gen-er", "--n", "60", "--p", "0.1", "--seed", "4"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn env_seed_applies_without_flag() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_diversinet"));
        cmd.args(args).env_remove("DIVERSINET_SEED");
        if let Some(v) = env {
            cmd.env("DIVERSINET_SEED", v);
        }
        cmd.output().unwrap().stdout
    };
    let args = ["gen-er", "--n", "40", "--p", "0.2"];
    assert_eq!(run(Some("9"), &args), run(None, &[&args[..], &["--seed", "9"]].concat()));
    assert_eq!(run(None, &args), run(None, &[&args[..], &["--seed", "42"]].concat()));
    assert_eq!(
        run(Some("9"), &[&args[..], &["--seed", "5"]].concat()),
        run(None, &[&args[..], &["--seed", "5"]].concat())
    );
}

#[test]
fn run_headers_and_rows() {
    let csv = stdout(&["run", "--n", "80", "--p", "0.1", "--n-r", "3", "--scheme", "no-a"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "scheme,axis,axis_value,run,seed,pc,sg,sd,dc,ms");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], "no-a");
        assert_eq!(f[3], i.to_string());
        assert_eq!(f[4], (42 ^ i).to_string());
        // IDS isolations count toward dc even without adaptation
        assert!(f[8].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(f[9], "0");
    }
}

#[test]
fn sweep_ns_aggregates_five_points() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let agg = stdout(&[
        "sweep", "--n", "80", "--p", "0.1", "--n-r", "4", "--axis", "ns", "--values", "3,4,5,6,7",
        "--out", path_str(&raw),
    ]);
    let mut lines = agg.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,axis,axis_value,n,pc_mean,pc_sd,sg_mean,sg_sd,sd_mean,sd_sd,dc_mean,dc_sd"
    );
    let agg_rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(agg_rows.len(), 5);
    assert_eq!(
        agg_rows.iter().map(|r| r[2].as_str()).collect::<Vec<_>>(),
        ["3", "4", "5", "6", "7"]
    );

    // aggregates are recomputable from the raw file
    let raw_text = std::fs::read_to_string(&raw).unwrap();
    let raw_rows: Vec<Vec<&str>> = raw_text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(raw_rows.len(), 20);
    for (p, agg_row) in agg_rows.iter().enumerate() {
        let chunk = &raw_rows[p * 4..(p + 1) * 4];
        assert!(chunk.iter().all(|r| r[2] == agg_row[2]));
        let pcs: Vec<f64> = chunk.iter().map(|r| r[5].parse().unwrap()).collect();
        let (mean, sd) = mean_and_sd(&pcs);
        assert!((mean - agg_row[4].parse::<f64>().unwrap()).abs() < 1e-12);
        assert!((sd - agg_row[5].parse::<f64>().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn sweep_accepts_negative_values() {
    let agg = stdout(&[
        "sweep", "--n", "60", "--p", "0.1", "--n-r", "2", "--scheme", "sda", "--axis", "rho",
        "--values", "-1,-0.6,0,0.6,1",
    ]);
    assert_eq!(agg.lines().count(), 6);
    assert!(agg.contains("sda(-0.6),rho,-0.6,2,"));
}

#[test]
fn derive_extracts_rank_window() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("star.txt");
    // star centre 0 with leaves 1-5, plus a 1-2 edge
    std::fs::write(&input, "0 1\n0 2\n0 3\n0 4\n0 5\n1 2\n").unwrap();
    let out = dir.path().join("sub.txt");
    stdout(&["derive", "--input", path_str(&input), "--lo", "1", "--hi", "3", "--out", path_str(&out)]);
    let sub = read_edge_list(&out).unwrap().graph;
    assert_eq!((sub.node_count(), sub.edge_count()), (3, 3));
}

#[test]
fn schemes_lists_tokens() {
    assert_eq!(stdout(&["schemes"]), "no-a\nrandom-a\nrandom-graph-c\nsda\n");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run", "--bogus"][..],
        &["run", "--rho", "3"],
        &["run", "--pa", "1.5"],
        &["run", "--n-r", "0"],
        &["run", "--ns", "9"],
        &["run", "--scheme", "magic"],
        &["run", "--fp-mode", "maybe"],
        &["sweep", "--axis", "size", "--values", "1"],
        &["sweep", "--axis", "k", "--values", "1.5"],
        &["frobnicate"],
    ] {
        let out = diversinet(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn bad_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"gamma": 0.9, "colour": "red"}"#).unwrap();
    assert_eq!(diversinet(&["run", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn missing_inputs_fail_with_message() {
    let out = diversinet(&["run", "--graph", "/nonexistent/edges.txt", "--n-r", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/edges.txt"));

    let out = diversinet(&["derive", "--input", "/nonexistent/e.txt", "--lo", "1", "--hi", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"network": {"er": {"n": 50, "p": 0.2}}, "scheme": "random-a", "n_r": 5, "base_seed": 1}"#,
    )
    .unwrap();
    let csv = stdout(&["run", "--config", path_str(&cfg), "--n-r", "2", "--seed", "7"]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("random-a,none,,0,7,"));
    assert!(rows[1].starts_with("random-a,none,,1,6,"));
}
