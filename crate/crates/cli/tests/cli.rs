use std::fs;
use std::io::BufReader;
use std::process::{Command, Output};

use condtest_core::edgelist::parse_edgelist;
use condtest_harness::{read_jsonl, ReportRecord, SweepCell, SCHEMA_VERSION};

fn condtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condtest"))
        .args(args)
        .env_remove("CONDTEST_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn records(path: &std::path::Path) -> Vec<ReportRecord> {
    read_jsonl(BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

#[test]
fn generate_barbell_and_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b4.txt");
    let o = condtest(&["generate", "barbell", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = parse_edgelist(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((g.n(), g.m()), (8, 13));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("n=8 m=13 conductance="), "{stderr}");

    let o = condtest(&["generate", "cycle:8"]);
    assert!(o.status.success());
    let g = parse_edgelist(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!((g.n(), g.m()), (8, 8));
}

#[test]
fn generate_rejects_odd_degree_sum() {
    let o = condtest(&["generate", "random_regular", "7", "3"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn test_two_k4_rejects_as_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let o = condtest(&[
        "test", "--graph", "union:complete:4+complete:4", "--reps", "5", "--declared-n", "8",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 5);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r.schema_version, SCHEMA_VERSION);
        assert_eq!(r.rep, i);
        assert_eq!(r.verdict, "reject");
        assert_eq!(r.reject_reason.as_deref(), Some("bfs_incomplete"));
    }
}

#[test]
fn config_file_env_dir_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("k8.toml");
    fs::write(&spec, "graph = \"complete:8\"\nreps = 4\nseed = 3\n[tester]\nphi = 0.5\naccept_threshold = \"mixing\"\n").unwrap();
    let run = || {
        let o = Command::new(env!("CARGO_BIN_EXE_condtest"))
            .args(["test", "--config", spec.to_str().unwrap()])
            .env("CONDTEST_OUT_DIR", dir.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        records(&dir.path().join("test.jsonl"))
    };
    let a = run();
    let b = run();
    assert_eq!(a.len(), 4);
    assert!(a.iter().all(|r| r.verdict == "accept"));
    assert_eq!(a.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![3, 4, 5, 6]);
    let strip = |v: &[ReportRecord]| v.iter().map(ReportRecord::without_timing).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn strict_congestion_is_recorded_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let o = condtest(&[
        "test", "--graph", "complete:6", "--reps", "2", "--congestion-lanes", "1", "--strict-congestion",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(records(&out).iter().all(|r| r.verdict == "abort"));
}

#[test]
fn oracle_battery_on_c8_and_edge_list() {
    let o = condtest(&["oracle", "cycle:8", "--steps", "4"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k2.txt");
    fs::write(&path, "2 1\n0 1\n").unwrap();
    let o = condtest(&["oracle", path.to_str().unwrap(), "--steps", "0"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().take(2).all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn sweep_writes_table_and_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.jsonl");
    let o = condtest(&[
        "sweep", "--graph", "cycle-of-cliques:{n}:4", "--vary", "n=4,8", "--vary", "phi=0.5",
        "--reps", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 3);
    let cells: Vec<SweepCell> = read_jsonl(BufReader::new(fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(cells.iter().map(|c| c.n).collect::<Vec<_>>(), vec![16, 32]);
    assert!(cells[0].max_rounds < cells[1].max_rounds);
}

#[test]
fn sweep_needs_a_grid() {
    let o = condtest(&["sweep", "--graph", "cycle:8", "--vary", "phi="]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn report_records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let o = condtest(&["test", "--graph", "barbell:5", "--reps", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let recs = records(&out);
    let mut buf = Vec::new();
    condtest_harness::write_jsonl(&recs, &mut buf).unwrap();
    let back: Vec<ReportRecord> = read_jsonl(&buf[..]).unwrap();
    assert_eq!(back, recs);
    assert_eq!(fs::read(&out).unwrap(), buf);
}
