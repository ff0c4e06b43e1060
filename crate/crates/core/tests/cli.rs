use std::path::Path;
use std::process::{Command, Output};

fn graphfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphfuse"))
        .args(args)
        .env_remove("GRAPHFUSE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
    text.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.collect())
        })
        .unwrap_or_else(|| panic!("no {key} line in\n{text}"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_reports_are_deterministic() {
    let a = graphfuse(&["run", "-p", "hexagon", "--herald", "sample", "--seed", "9"]);
    let b = graphfuse(&["run", "-p", "hexagon", "--herald", "sample", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("format_version 1\nreport run\nseed 9\n"));
}

#[test]
fn forced_tree_run_is_ideal() {
    let o = graphfuse(&["run", "-p", "tree", "--backend", "dense"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "success"), ["true"]);
    assert_eq!(field(&text, "genuine"), ["true"]);
    let overlap: f64 = field(&text, "overlap")[0].parse().unwrap();
    assert!((overlap - 1.0).abs() < 1e-10);
    let stabs: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("stabilizer "))
        .collect();
    assert_eq!(stabs.len(), 8);
    for l in stabs {
        let v: f64 = l.split_whitespace().nth(3).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{l}");
    }
}

#[test]
fn montecarlo_records_feed_witness() {
    let dir = tempfile::tempdir().unwrap();
    let noise = dir.path().join("noise.toml");
    std::fs::write(
        &noise,
        "loss_per_photon = 0.1\ndepolarizing_per_emission = 0.02\n",
    )
    .unwrap();
    let rec1 = dir.path().join("a.rec");
    let rec2 = dir.path().join("b.rec");
    let graph = dir.path().join("box.graph");
    let common = [
        "montecarlo",
        "-p",
        "box",
        "--trials",
        "3000",
        "--noise",
        path(&noise),
    ];
    let a = graphfuse(&[&common[..], &["--seed", "4", "--records", path(&rec1)]].concat());
    let b = graphfuse(&[&common[..], &["--seed", "4", "--records", path(&rec2)]].concat());
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read(&rec1).unwrap(), std::fs::read(&rec2).unwrap());

    let e = graphfuse(&["export", "-p", "box", "--graph", "-o", path(&graph)]);
    assert_eq!(e.status.code(), Some(0));
    let w = graphfuse(&["witness", "--records", path(&rec1), "--graph", path(&graph)]);
    assert_eq!(
        w.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&w.stderr)
    );
    let mc = stdout(&a);
    let wt = stdout(&w);
    assert_eq!(field(&mc, "g_a"), field(&wt, "g_a"));
    assert_eq!(field(&mc, "g_b"), field(&wt, "g_b"));
    assert_eq!(field(&wt, "seed"), ["4"]);
}

#[test]
fn seed_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_graphfuse"))
        .args(["run", "-p", "bell", "--herald", "sample"])
        .env("GRAPHFUSE_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(field(&stdout(&o), "seed"), ["17"]);
}

#[test]
fn exported_program_runs_like_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("tree.prog");
    assert_eq!(
        graphfuse(&["export", "-p", "tree", "-o", path(&prog)])
            .status
            .code(),
        Some(0)
    );
    let a = graphfuse(&["run", "-p", "tree", "--seed", "1"]);
    let b = graphfuse(&["run", "-p", path(&prog), "--seed", "1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn parity_scan_report() {
    let o = graphfuse(&[
        "scan",
        "-p",
        "tree",
        "--parameter",
        "t0",
        "--from",
        "15",
        "--to",
        "25",
        "--steps",
        "41",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let off: f64 = field(&text, "branch_offset")[0].parse().unwrap();
    assert!((off - std::f64::consts::PI).abs() < 1e-6, "{off}");
    assert_eq!(text.lines().filter(|l| l.starts_with("row ")).count(), 41);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pentagon = dir.path().join("pentagon.graph");
    let records = dir.path().join("empty.rec");
    std::fs::write(&records, "format_version 1\n").unwrap();
    assert_eq!(
        graphfuse(&["export", "-p", "pentagon", "--graph", "-o", path(&pentagon)])
            .status
            .code(),
        Some(0)
    );

    assert_eq!(graphfuse(&["run", "-p", "heptagon"]).status.code(), Some(2));
    assert_eq!(
        graphfuse(&["run", "-p", "box", "--bogus"]).status.code(),
        Some(2)
    );
    let o = graphfuse(&["run", "-p", "pentagon", "--backend", "tableau"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("instruction 2"));
    let o = graphfuse(&[
        "witness",
        "--records",
        path(&records),
        "--graph",
        path(&pentagon),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = graphfuse(&["stabilizers", "--graph", path(&pentagon)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("odd"));
}
