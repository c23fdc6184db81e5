use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn accumsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_accumsim")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn workspace_with_graph() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("# small test graph\n");
    for v in 0..200u32 {
        text.push_str(&format!("{} {}\n", v, (v * 7 + 3) % 200));
        text.push_str(&format!("{} {}\n", v, (v * v + 1) % 200));
    }
    fs::write(dir.path().join("g.txt"), text).unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_stats_and_manifest() {
    let dir = workspace_with_graph();
    let out = accumsim(&["run", "g.txt", "--algo", "bfs", "--root", "0", "--out", "r"], dir.path());
    ok(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("cycles="), "{stdout}");
    let stats = json(&dir.path().join("r/stats.json"));
    for key in ["schema_version", "cycles", "edges_traversed", "teps", "stalls", "iterations", "productive_cycles"] {
        assert!(stats.get(key).is_some(), "missing {key}");
    }
    for key in ["atomic", "bank_conflict", "reorder", "scheduler", "crossbar", "dram"] {
        assert!(stats["stalls"].get(key).is_some(), "missing stall {key}");
    }
    let csv = fs::read_to_string(dir.path().join("r/stats.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("algorithm,mode,vertex_pipelines,partitions,iterations,cycles"));
    let manifest = json(&dir.path().join("r/manifest.json"));
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["config"]["algorithm"]["algo"], "bfs");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["content_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = workspace_with_graph();
    for out in ["a", "b"] {
        ok(&accumsim(&["run", "g.txt", "--algo", "pr", "--mode", "cfg4", "--out", out], dir.path()));
    }
    for file in ["stats.json", "stats.csv", "states.json", "manifest.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(file)).unwrap(), fs::read(dir.path().join("b").join(file)).unwrap());
    }
}

#[test]
fn pagerank_two_cycle_single_step() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 0\n").unwrap();
    ok(&accumsim(&["run", "g.txt", "--algo", "pr", "--iterations", "1", "--out", "r"], dir.path()));
    let states = json(&dir.path().join("r/states.json"));
    // Each vertex gets 0.15 plus the other's full starting rank of 1.
    for r in states["values"].as_array().unwrap() {
        assert!((r.as_f64().unwrap() - 1.15).abs() < 1e-6, "{r}");
    }
}

#[test]
fn prepare_writes_partitions_and_rearranged_graph() {
    let dir = workspace_with_graph();
    ok(&accumsim(&["prepare", "g.txt", "--rearrange", "16", "--partitions", "4", "--out", "p"], dir.path()));
    for name in ["graph.agrf", "part-000.agrf", "part-003.agrf", "manifest.json"] {
        assert!(dir.path().join("p").join(name).exists(), "missing {name}");
    }
    let manifest = json(&dir.path().join("p/manifest.json"));
    let parts = manifest["config"]["partitions"].as_array().unwrap();
    assert_eq!(parts.len(), 4);
    let edges: u64 = parts.iter().map(|p| p["num_edges"].as_u64().unwrap()).sum();
    assert_eq!(edges, 400);
    // The prepared binary graph runs like the text one.
    ok(&accumsim(&["run", "p/graph.agrf", "--algo", "wcc", "--out", "a"], dir.path()));
    ok(&accumsim(&["run", "g.txt", "--algo", "wcc", "--out", "b"], dir.path()));
    assert_eq!(fs::read(dir.path().join("a/states.json")).unwrap(), fs::read(dir.path().join("b/states.json")).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = workspace_with_graph();
    for args in [
        vec!["run", "g.txt", "--algo", "pr", "--root", "0", "--out", "r"],
        vec!["run", "g.txt", "--algo", "bfs", "--epsilon", "0.2", "--out", "r"],
        vec!["run", "g.txt", "--algo", "bfs", "--banks", "12", "--out", "r"],
        vec!["run", "g.txt", "--algo", "bfs", "--root", "999", "--out", "r"],
        vec!["run", "g.txt", "--algo", "dfs", "--out", "r"],
        vec!["prepare", "g.txt", "--rearrange", "3", "--out", "p"],
    ] {
        let out = accumsim(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "0 1\nnot an edge\n").unwrap();
    let out = accumsim(&["run", "bad.txt", "--algo", "wcc", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = accumsim(&["run", "missing.txt", "--algo", "wcc", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn capacity_overflow_exits_with_four() {
    let dir = workspace_with_graph();
    fs::write(dir.path().join("small.json"), r#"{"onchip_bytes": 100}"#).unwrap();
    let out = accumsim(&["run", "g.txt", "--algo", "wcc", "--config", "small.json", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partitions"));
    ok(&accumsim(
        &["run", "g.txt", "--algo", "wcc", "--config", "small.json", "--partitions", "8", "--out", "r"],
        dir.path(),
    ));
}

#[test]
fn sweep_writes_table_and_plot_data() {
    let dir = workspace_with_graph();
    let out = Command::new(env!("CARGO_BIN_EXE_accumsim"))
        .args(["sweep", "g.txt", "--algo", "bfs", "--root", "0", "--sweep", "modes", "--out", "s"])
        .env("ACCUMSIM_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    ok(&out);
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "label,mode,vertex_pipelines,partitions,cycles,edges_traversed,teps,speedup,\
         stall_atomic,stall_bank_conflict,stall_reorder,stall_scheduler,stall_crossbar,stall_dram"
    );
    let labels: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["baseline", "cfg1", "cfg2", "cfg3", "cfg4", "cfg5"]);
    let plot = json(&dir.path().join("s/plot.json"));
    assert_eq!(plot["speedup"][0], 1.0);
    assert_eq!(plot["cycles"].as_array().unwrap().len(), 6);

    ok(&accumsim(&["sweep", "g.txt", "--algo", "wcc", "--sweep", "pipelines", "--out", "n"], dir.path()));
    ok(&accumsim(&["sweep", "g.txt", "--algo", "wcc", "--sweep", "partitions", "--out", "k"], dir.path()));
    let k = fs::read_to_string(dir.path().join("k/sweep.csv")).unwrap();
    assert_eq!(k.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect::<Vec<_>>(), ["k1", "k2", "k4"]);
}
