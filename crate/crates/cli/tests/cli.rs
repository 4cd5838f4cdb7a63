use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cplds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cplds")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gnp_file(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("g.txt");
    let o = cplds(&["gen", "--kind", "gnp", "--n", "1000", "--p", "0.01", "--seed", "3", "--output", s(&p)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn exact_triangle() {
    let d = TempDir::new().unwrap();
    let g = write(&d, "t.txt", "# triangle\n0 1\n1 2\n2 0\n");
    let o = cplds(&["exact", "--graph", s(&g)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "2 2 2");
}

#[test]
fn exact_edgeless_is_zero() {
    let d = TempDir::new().unwrap();
    let g = write(&d, "e.txt", "0 0\n3 3\n");
    let o = cplds(&["exact", "--graph", s(&g)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "0 0 0 0");
    let h = cplds(&["exact", "--graph", s(&g), "--histogram"]);
    assert_eq!(stdout(&h).trim(), "0 4");
}

#[test]
fn missing_file_is_io_error() {
    for sub in ["exact", "ingest", "audit", "bench"] {
        let o = cplds(&[sub, "--graph", "/nonexistent/graph.txt"]);
        assert_eq!(code(&o), 2, "{sub}");
    }
}

#[test]
fn malformed_input_is_io_error() {
    let d = TempDir::new().unwrap();
    let g = write(&d, "bad.txt", "0 1\n1 x\n");
    assert_eq!(code(&cplds(&["exact", "--graph", s(&g)])), 2);
    let h = write(&d, "bad.history", "B\t1\tnope\n");
    assert_eq!(code(&cplds(&["lincheck", "--history", s(&h)])), 2);
}

#[test]
fn bad_flags_exit_64() {
    assert_eq!(code(&cplds(&["bench", "--graph", "x", "--batch-size", "0"])), 64);
    assert_eq!(code(&cplds(&["bench", "--graph", "x", "--mode", "sometimes"])), 64);
    assert_eq!(code(&cplds(&["frobnicate"])), 64);
    assert_eq!(code(&cplds(&["audit", "--graph", "x", "--delta", "-1"])), 64);
    assert_eq!(code(&cplds(&["--help"])), 0);
}

#[test]
fn ingest_reports_counts() {
    let d = TempDir::new().unwrap();
    let g = write(&d, "g.txt", "0 1\n1 0\n2 2\n1 4\n");
    let o = cplds(&["ingest", "--graph", s(&g)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for line in ["vertices 5", "edges 2", "self_loops 1", "duplicates 1"] {
        assert!(out.contains(line), "{out}");
    }
}

#[test]
fn audit_passes_and_reports_threshold() {
    let d = TempDir::new().unwrap();
    let g = gnp_file(&d);
    let o = cplds(&["audit", "--graph", s(&g), "--batch-size", "500", "--mirror-deletes"]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.contains("bound threshold 2.8000"), "{out}");
    assert!(out.contains("invariant violations 0"), "{out}");
}

#[test]
fn audit_catches_injected_fault() {
    let d = TempDir::new().unwrap();
    let g = gnp_file(&d);
    let o = cplds(&["audit", "--graph", s(&g), "--batch-size", "500", "--inject-fault"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn bench_all_modes_and_lincheck() {
    let d = TempDir::new().unwrap();
    let g = gnp_file(&d);
    let csv = d.path().join("out.csv");
    let rec = d.path().join("hist");
    let o = cplds(&[
        "bench", "--graph", s(&g), "--mode", "all", "--batch-size", "1000", "--update-threads", "2",
        "--read-threads", "2", "--max-reads", "20000", "--seed", "7", "--output", s(&csv), "--record", s(&rec),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], cplds::bench::CSV_HEADER);
    let modes: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(modes, ["cplds", "sync", "nonsync"]);
    for m in ["cplds", "sync"] {
        let h = rec.join(format!("{m}.history"));
        let o = cplds(&["lincheck", "--history", s(&h)]);
        assert_eq!(code(&o), 0, "{m}: {}", stdout(&o));
    }
}

#[test]
fn lincheck_empty_history_passes() {
    let d = TempDir::new().unwrap();
    let h = write(&d, "empty.history", "");
    assert_eq!(code(&cplds(&["lincheck", "--history", s(&h)])), 0);
}

#[test]
fn lincheck_nonsync_climb_fails() {
    let d = TempDir::new().unwrap();
    let g = d.path().join("climb.txt");
    assert_eq!(code(&cplds(&["gen", "--kind", "climb", "--n-core", "200", "--output", s(&g)])), 0);
    let o = cplds(&["lincheck", "--graph", s(&g), "--mode", "cplds", "--batch-size", "100000", "--max-reads", "200000"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = cplds(&["lincheck", "--graph", s(&g), "--mode", "nonsync", "--batch-size", "100000", "--max-reads", "200000"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}
