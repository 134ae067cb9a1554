use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qroute(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to launch qroute")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bitonic_verify_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["sortnet", "--kind", "bitonic", "--t", "3", "--verify"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "layers=6 comparators=24 verified=true");
}

#[test]
fn broken_network_fails_self_test() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["sortnet", "--kind", "oets", "--n", "6", "--out", "net.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let mut net: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("net.json")).unwrap()).unwrap();
    net["layers"].as_array_mut().unwrap().truncate(3);
    fs::write(dir.path().join("broken.json"), net.to_string()).unwrap();
    let o = qroute(&["sortnet", "--input", "broken.json", "--verify"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("verified=false"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qroute(&["sortnet", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(qroute(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(qroute(&["move", "--n", "6", "--family", "hypercube"], dir.path()).status.code(), Some(1));
    assert_eq!(qroute(&["move", "--n", "4", "--perm", "0,0,1,2"], dir.path()).status.code(), Some(1));
    assert_eq!(qroute(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn pram_adversarial_self_test() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["pram", "--n", "8", "--d", "2", "--selftest", "adversarial"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result=pass"));
    let o = qroute(&["pram", "--n", "8", "--d", "2", "--single", "--selftest", "random", "--cases", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn move_reports_stage_depth() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["move", "--n", "4", "--d", "2", "--perm", "2,0,3,1", "--cases", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    // Bitonic on 8 wires has 6 layers.
    assert!(stdout(&o).contains("stage_depth=15"));
    assert!(stdout(&o).contains("failures=0"));
}

#[test]
fn emulate_from_files_writes_overhead_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(qroute(&["topo", "--kind", "hypercube", "--n", "8", "--out", "hc8.json"], p).status.success());
    let saved = qroute(
        &["emulate", "--random-width", "6", "--random-depth", "5", "--seed", "4", "--save-circuit", "random6.json"],
        p,
    );
    assert!(saved.status.success());
    let o = qroute(
        &["emulate", "--circuit", "random6.json", "--topo", "hc8.json", "--verify", "--csv", "row.csv"],
        p,
    );
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(p.join("row.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let col = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_string();
    assert!(col("overhead").parse::<f64>().unwrap() >= 1.0);
    assert_eq!(col("equivalent"), "true");
    assert_eq!(col("seed"), "0");
    assert!(!col("version").is_empty());
}

#[test]
fn distinct_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for name in ["a.csv", "b.csv"] {
        let o = qroute(&["distinct", "--n", "16", "--s", "4", "--trials", "20", "--seed", "7", "--csv", name], p);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read_to_string(p.join("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(p.join("b.csv")).unwrap());
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "seed,N,S,success,oracle_calls,stage_depth,width,version");
    assert_eq!(lines.clone().count(), 20);
    assert!(lines.all(|l| l.starts_with("7,16,4,")));
}

#[test]
fn collision_one_to_one_never_reports_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(
        &["collision", "--n", "16", "--s", "4", "--trials", "20", "--one-to-one", "--csv", "c.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("successes=20"));
}

#[test]
fn grover_auto_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(&["grover", "--n", "16", "--m", "1", "--iters", "auto"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("iterations=3"));
    assert_eq!(qroute(&["grover", "--n", "12"], dir.path()).status.code(), Some(1));
}

#[test]
fn bench_csv_rows_carry_seed_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let o = qroute(
        &["bench", "--families", "hypercube,line", "--ns", "4,8", "--d", "2", "--seed", "5", "--csv", "bench.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.starts_with("5,") && r.split(',').nth(1).is_some_and(|v| !v.is_empty())));
    assert!(rows[0].contains(",hypercube,4,2,3,"));
    assert!(rows[2].contains(",line,4,2,4,"));
}

#[test]
fn topo_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(qroute(&["topo", "--kind", "grid", "--rows", "2", "--cols", "3", "--out", "g.json"], p).status.success());
    let o = qroute(&["topo", "--input", "g.json"], p);
    assert_eq!(stdout(&o).trim(), "family=grid2d nodes=6 edges=7 max_degree=3");
}
