use std::fs;
use std::process::{Command, Output};

fn opinion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opinion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_prints_a_report() {
    let o = opinion(&[
        "simulate",
        "--graph",
        "path:100",
        "--eps",
        "0.75",
        "--seed",
        "7",
        "--to-absorption",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["absorbed"], true);
    assert_eq!(report["final_opinions"].as_array().unwrap().len(), 100);
    let again = opinion(&[
        "simulate",
        "--graph",
        "path:100",
        "--eps",
        "0.75",
        "--seed",
        "7",
        "--to-absorption",
    ]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn epsilon_is_validated_before_the_file_is_read() {
    let o = opinion(&["index", "--graph-file", "g.txt", "--eps", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("epsilon out of range"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn urn_strategy_s() {
    let o = opinion(&["urn", "--strategy", "S", "--balls", "5", "--boxes", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "steps=15");
    let o = opinion(&["urn", "--strategy", "S", "--balls", "5", "--boxes", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_subcommands() {
    let o = opinion(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for sub in [
        "simulate",
        "index",
        "consensus",
        "coexistence",
        "sweep",
        "urn",
    ] {
        assert!(text.contains(sub), "missing {sub}");
    }
}

#[test]
fn grammar_errors_exit_one() {
    assert_eq!(
        opinion(&["simulate", "--graph", "path:5", "--eps", "0.5", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(opinion(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        opinion(&["simulate", "--graph", "wheel:5", "--eps", "0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(opinion(&[]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let o = opinion(&[
        "index",
        "--graph-file",
        missing.to_str().unwrap(),
        "--eps",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn index_reads_edge_list_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    fs::write(&path, "# five-cycle\n5 5\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
    let o = opinion(&[
        "index",
        "--graph-file",
        path.to_str().unwrap(),
        "--eps",
        "0.55",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (lower, exact, upper) = (
        v["lower"].as_u64().unwrap(),
        v["exact"].as_u64().unwrap(),
        v["upper"].as_u64().unwrap(),
    );
    assert!(lower <= exact && exact <= upper);

    fs::write(&path, "3 1\n0 0\n").unwrap();
    let o = opinion(&[
        "index",
        "--graph-file",
        path.to_str().unwrap(),
        "--eps",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_seed_is_generated_and_printed() {
    let o = opinion(&["simulate", "--graph", "cycle:6", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    let seed = err
        .lines()
        .find_map(|l| l.strip_prefix("seed="))
        .expect("seed printed");
    let replay = opinion(&[
        "simulate", "--graph", "cycle:6", "--eps", "1", "--seed", seed,
    ]);
    assert_eq!(o.stdout, replay.stdout);
}

#[test]
fn sweep_writes_outputs_identically_for_any_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &std::path::Path, workers: &str| {
        opinion(&[
            "sweep",
            "--graph",
            "torus:6x6",
            "--eps-grid",
            "0,1/3,1",
            "--t-max",
            "30",
            "--reps",
            "3",
            "--seed",
            "5",
            "--workers",
            workers,
            "--snapshot",
            "--out",
            dir.to_str().unwrap(),
        ])
    };
    assert_eq!(run(a.path(), "1").status.code(), Some(0));
    assert_eq!(run(b.path(), "3").status.code(), Some(0));
    for name in [
        "report.json",
        "records.csv",
        "snapshot_0.pgm",
        "snapshot_0.3333333333333333.pgm",
        "snapshot_1.pgm",
    ] {
        let x = fs::read(a.path().join(name)).unwrap_or_else(|_| panic!("{name} missing"));
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name} differs");
    }
    let csv = fs::read_to_string(a.path().join("records.csv")).unwrap();
    assert!(csv.starts_with("replicate,seed,nu,absorbed,consensus,theta_inf_zero,events\n"));
    let pgm = fs::read(a.path().join("snapshot_0.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n6 6\n255\n"));
    assert_eq!(pgm.len(), 11 + 36);
}

#[test]
fn sweep_needs_a_torus_and_coexistence_a_path() {
    let o = opinion(&["sweep", "--graph", "path:9", "--eps", "0.3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = opinion(&[
        "coexistence",
        "--graph",
        "cycle:9",
        "--eps",
        "0.3",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn consensus_rejects_low_threshold_and_reports_checks() {
    let o = opinion(&[
        "consensus",
        "--graph",
        "path:20",
        "--eps",
        "0.4",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = opinion(&[
        "consensus",
        "--graph",
        "path:20",
        "--eps",
        "1",
        "--reps",
        "20",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).lines().filter(|l| l.starts_with("PASS")).count() == 3,
        "{}",
        stdout(&o)
    );
}

#[test]
fn graph_generator_round_trips() {
    let o = opinion(&["graph", "--graph", "torus:3x4"]);
    assert_eq!(o.status.code(), Some(0));
    let g = opinion_core::graph::parse_edge_list(&stdout(&o)).unwrap();
    assert_eq!((g.n_vertices(), g.n_edges()), (12, 24));
}

#[test]
fn urn_random_play_respects_the_bound() {
    let o = opinion(&[
        "urn",
        "--strategy",
        "random",
        "--balls",
        "4",
        "--boxes",
        "5",
        "--seed",
        "2",
        "--reps",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        let steps: u64 = line
            .split_whitespace()
            .next()
            .unwrap()
            .strip_prefix("steps=")
            .unwrap()
            .parse()
            .unwrap();
        assert!(steps <= 12);
    }
}
