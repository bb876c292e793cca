use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qplab")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn negative_n_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "lambda = 0.5\nn = -4\n").unwrap();
    let out = qplab(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`n`"), "{err}");
}

#[test]
fn unknown_key_and_bad_syntax_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let out = qplab(&["ids", "--set", "lamda=0.3", "--out", o.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`lamda`"));
    let cfg = dir.path().join("x.cfg");
    std::fs::write(&cfg, "lambda 0.3\n").unwrap();
    assert_eq!(qplab(&["ids", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qplab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(qplab(&["cf", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn atom_collision_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    // λ = 0 and odd N put an eigenvalue exactly at E = 0
    let out = qplab(&["thouless", "--set", "n=101", "--set", "energies=0", "--set", "n_l=100", "--out", o.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cf_golden_gives_fibonacci_denominators() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("golden_cf.cfg");
    let out = qplab(&["cf", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cf.json")).unwrap()).unwrap();
    let q: Vec<u64> = v["q"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().parse().unwrap()).collect();
    let mut fib = vec![1u64, 1];
    while fib.len() < q.len() {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    assert_eq!(q.len(), 11);
    assert_eq!(q, fib);
    assert_eq!(v["verified"], true);
}

#[test]
fn holder_free_edge_reproduces_one_over_pi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("free_edge.cfg");
    let out = qplab(&["holder", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, r) = rows(&dir.path().join("holder.csv"));
    assert_eq!(&h[..4], ["E", "eps", "mu", "ratio"]);
    assert_eq!(r.len(), 7);
    let c = column(&h, "ratio");
    for row in &r {
        let ratio: f64 = row[c].parse().unwrap();
        assert!((ratio * PI - 1.0).abs() < 0.1, "{ratio}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["config_hash"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(manifest["outputs"][0], "holder.csv");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let o = dir.path().join(name);
        let out = qplab(&["ids", "--set", "lambda=1.3", "--set", "n=300", "--out", o.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read(o.join("ids.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn row_counts_match_the_declared_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let out = qplab(&["measure", "--set", "energies=lin:-2:2:9", "--set", "eps=0.05,0.1,0.2", "--set", "n=200", "--out", o.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(rows(&o.join("measure.csv")).1.len(), 27);
}

#[test]
fn potential_file_is_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_mode_spectrum.cfg");
    let out = qplab(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&dir.path().join("spectrum.csv")).1.len(), 1600);
}

#[test]
fn exported_block_matches_its_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = qplab(&["spectrum", "--set", "kind=dual", "--set", "n=12", "--set", "export_block=true", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let bin = std::fs::read(dir.path().join("block.bin")).unwrap();
    assert_eq!(bin.len(), 12 * 12 * 16);
    // AMO dual: diagonal 2cos(2πnα), off-diagonals λ
    let entry = |i: usize, j: usize| {
        let o = 16 * (j * 12 + i);
        f64::from_le_bytes(bin[o..o + 8].try_into().unwrap())
    };
    assert_eq!(entry(0, 0), 2.0);
    assert_eq!(entry(1, 0), 1.0);
    assert_eq!(entry(2, 0), 0.0);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qplab(&["selftest", "--out", dir.path().to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.contains("PASS reject-corrupt-potential-file"));
}
