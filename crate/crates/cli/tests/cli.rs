use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_readability"));
    c.env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Two edges crossing once, away from any strip boundary.
fn x_instance(dir: &Path) -> (String, String) {
    let edges = write(dir, "x.txt", "# X\n0 1\n2 3\n");
    let layout = write(dir, "x.csv", "id,x,y\n0,0,0\n1,10,9\n2,0,8\n3,10,0.3\n");
    (edges.display().to_string(), layout.display().to_string())
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON output")
}

#[test]
fn eval_oracle_counts_the_x() {
    let dir = TempDir::new().unwrap();
    let (e, l) = x_instance(dir.path());
    let r = json(&run(&["eval", "--edges", &e, "--layout", &l, "--mode", "oracle"]));
    assert_eq!(r["metrics"]["edge_crossing"], 1);
    assert_eq!(r["mode"], "oracle");
    assert!((r["params"]["ideal_angle"].as_f64().unwrap() - 70f64.to_radians()).abs() < 1e-15);
}

#[test]
fn eval_enhanced_occlusion_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let edges = write(dir.path(), "e.txt", &(0..200).map(|i| format!("{i} {}\n", (i * 7 + 3) % 200)).collect::<String>());
    let e = edges.display().to_string();
    let common = ["--edges", &e, "--generate", "random", "--seed", "4", "--radius", "3", "--metrics", "nc"];
    let a = json(&run(&[&["eval", "--mode", "oracle"][..], &common].concat()));
    let b = json(&run(&[&["eval", "--mode", "enhanced", "--threads", "3"][..], &common].concat()));
    assert!(a["metrics"]["node_occlusion"].as_u64().unwrap() > 0);
    assert_eq!(a["metrics"]["node_occlusion"], b["metrics"]["node_occlusion"]);
}

#[test]
fn eval_is_repeatable_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let (e, l) = x_instance(dir.path());
    let args = ["eval", "--edges", &e, "--layout", &l, "--mode", "enhanced", "--threads", "2"];
    let mut a = json(&run(&args));
    let mut b = json(&run(&args));
    a.as_object_mut().unwrap().remove("elapsed");
    b.as_object_mut().unwrap().remove("elapsed");
    assert_eq!(a, b);
}

#[test]
fn eval_csv_lists_requested_metrics() {
    let dir = TempDir::new().unwrap();
    let (e, l) = x_instance(dir.path());
    let out = dir.path().join("r.csv");
    let o = run(&[
        "eval", "--edges", &e, "--layout", &l, "--metrics", "ec,ml", "--format", "csv", "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "metric,value,seconds");
    assert!(lines[1].starts_with("ml,"));
    assert!(lines[2].starts_with("ec,1,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let (e, l) = x_instance(dir.path());
    assert_eq!(code(&run(&["eval", "--edges", &e])), 2);
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", &l, "--metrics", "nc,zz"])), 2);
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", &l, "--radius", "0"])), 2);
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", &l, "--ideal-angle", "91"])), 2);
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", &l, "--strip-width", "1.5"])), 2);
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", &l, "--threads", "0"])), 2);
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", &l, "--ideal-angle", "90"])), 0);
    assert_eq!(code(&run(&["bench", "--edges", &e, "--layout", &l, "--threads-list", "4,2"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn input_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let (e, l) = x_instance(dir.path());
    let bad = write(dir.path(), "bad.txt", "0 1\n1 x\n");
    let o = run(&["eval", "--edges", bad.to_str().unwrap(), "--layout", &l]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(code(&run(&["eval", "--edges", "/no/such/file", "--layout", &l])), 3);
    let empty = write(dir.path(), "empty.txt", "");
    assert_eq!(code(&run(&["eval", "--edges", empty.to_str().unwrap(), "--layout", &l])), 3);
    let short = write(dir.path(), "short.csv", "id,x,y\n0,0,0\n1,1,1\n");
    assert_eq!(code(&run(&["eval", "--edges", &e, "--layout", short.to_str().unwrap()])), 3);
}

#[test]
fn gen_is_deterministic_and_bounded() {
    let dir = TempDir::new().unwrap();
    let edges = write(dir.path(), "e.txt", "0 1\n1 2\n2 3\n3 0\n0 2\n");
    let e = edges.to_str().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = run(&["gen", "--edges", e, "--seed", "7", "--extent", "20", "--output", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!(cols.iter().all(|&v| (0.0..=20.0).contains(&v)));
    }
}

#[test]
fn fr_layout_of_k5_has_a_crossing() {
    let dir = TempDir::new().unwrap();
    let k5: String = (0..5).flat_map(|a| (a + 1..5).map(move |b| format!("{a} {b}\n"))).collect();
    let edges = write(dir.path(), "k5.txt", &k5);
    let layout = dir.path().join("k5.csv");
    let o = run(&[
        "gen", "--edges", edges.to_str().unwrap(), "--kind", "fr", "--iterations", "50", "--output",
        layout.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = json(&run(&[
        "eval", "--edges", edges.to_str().unwrap(), "--layout", layout.to_str().unwrap(), "--mode", "oracle",
        "--metrics", "ec",
    ]));
    assert!(r["metrics"]["edge_crossing"].as_u64().unwrap() >= 1);
}

#[test]
fn compare_writes_error_table() {
    let dir = TempDir::new().unwrap();
    let pairs: String = (0..300).map(|i| format!("{} {}\n", i % 120, (i * 37 + 11) % 120)).collect();
    let edges = write(dir.path(), "e.txt", &pairs);
    let o = run(&[
        "compare", "--edges", edges.to_str().unwrap(), "--generate", "random", "--seed", "3", "--radius", "2",
        "--metrics", "nc,ec,eca", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["metric", "oracle", "enhanced", "pct_error"]);
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3);
    assert_eq!(&records[0][0], "nc");
    assert_eq!(records[0][3].parse::<f64>().unwrap(), 0.0);
    let (oracle_ec, enhanced_ec): (f64, f64) = (records[1][1].parse().unwrap(), records[1][2].parse().unwrap());
    assert!(enhanced_ec <= oracle_ec);
}

#[test]
fn bench_values_agree_across_threads() {
    let dir = TempDir::new().unwrap();
    let pairs: String = (0..400).map(|i| format!("{} {}\n", i % 150, (i * 53 + 7) % 150)).collect();
    let edges = write(dir.path(), "e.txt", &pairs);
    let e = edges.to_str().unwrap();
    let rows = json(&run(&[
        "bench", "--edges", e, "--generate", "random", "--threads-list", "1,8", "--metrics", "nc,ec", "--repeat", "1",
    ]));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for metric in ["nc", "ec"] {
        let values: Vec<&Value> = rows.iter().filter(|r| r["metric"] == metric).map(|r| &r["value"]).collect();
        assert_eq!(values[0], values[1]);
    }
    let oracle = json(&run(&[
        "bench", "--edges", e, "--generate", "random", "--mode", "oracle", "--threads-list", "1,2", "--metrics", "ec",
        "--repeat", "1",
    ]));
    assert!(oracle.as_array().unwrap().iter().all(|r| r["speedup"] == 1.0));
}
