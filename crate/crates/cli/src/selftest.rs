//! Quick end-to-end checks: closed forms of the free operator, exact
//! identities, input validation and output determinism. Scratch runs go
//! under the selftest output directory.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use qplab::cocycles::{model_x, pk_sequence, Cocycle};
use qplab::diophantine::{CfExpansion, FrequencySpec};
use qplab::operators::{OperatorConfig, Potential};
use qplab::spectral::{ids_curve, weyl_m_plus};

use crate::commands::{execute, find};
use crate::config::{CliError, Config};

type Check = Result<String, String>;

fn golden(depth: usize) -> CfExpansion {
    CfExpansion::new(&FrequencySpec::golden(), depth).expect("golden mean expands")
}

fn free() -> OperatorConfig {
    OperatorConfig::new(0.0, golden(60), 0.0, Potential::almost_mathieu())
}

fn run_cmd(name: &str, pairs: &[(&str, &str)], out: &Path) -> Result<(), CliError> {
    let cmd = find(name).expect("known command");
    execute(cmd, &Config::from_pairs(pairs), out)
}

/// Data rows of a CSV written by the runner, split into cells.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("missing header")?.split(',').map(String::from).collect();
    Ok((header, lines.map(|l| l.split(',').map(String::from).collect()).collect()))
}

fn expect_key(r: Result<(), CliError>, key: &str) -> Check {
    match r {
        Err(CliError::Validation { key: k, message }) if k == key => Ok(format!("rejected: `{k}`: {message}")),
        Err(e) => Err(format!("wrong error: {e}")),
        Ok(()) => Err("accepted".into()),
    }
}

fn cf_fibonacci(_: &Path) -> Check {
    let cf = golden(10);
    let (mut a, mut b) = (1u64, 1u64);
    for k in 0..=10 {
        if cf.q_i64(k) != Some(a as i64) {
            return Err(format!("q_{k} = {} but F = {a}", cf.q(k)));
        }
        (a, b) = (b, a + b);
    }
    cf.verify()?;
    Ok("q_0..q_10 are Fibonacci numbers and the brackets verify".into())
}

fn free_ids(_: &Path) -> Check {
    let energies: Vec<f64> = (0..101).map(|i| -1.98 + 3.96 * i as f64 / 100.0).collect();
    let v = ids_curve(&free(), &energies, 2000, 1).map_err(|e| e.to_string())?;
    let err = energies.iter().zip(&v).map(|(e, n)| (n - (1.0 - (e / 2.0).acos() / PI)).abs()).fold(0.0, f64::max);
    if err < 1e-2 { Ok(format!("sup error {err:.2e}")) } else { Err(format!("sup error {err:.2e}")) }
}

fn free_weyl(_: &Path) -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let z = Complex64::new(-3.0 + 0.3 * i as f64, 0.05 + 0.1 * (i % 5) as f64);
        let m = weyl_m_plus(&free(), z, 1e-13).map_err(|e| e.to_string())?.m;
        // root of m² + zm + 1 = 0 in the upper half plane
        let s = (z * z - 4.0).sqrt();
        let r = [(-z + s) / 2.0, (-z - s) / 2.0].into_iter().find(|r| r.im > 0.0).ok_or("no Herglotz root")?;
        worst = worst.max((m - r).norm());
    }
    if worst < 1e-8 { Ok(format!("max |m - root| {worst:.2e}")) } else { Err(format!("max |m - root| {worst:.2e}")) }
}

fn rotation_pk(_: &Path) -> Check {
    let s = pk_sequence(&Cocycle::schrodinger(&free(), 0.0), 0.0, 100).map_err(|e| e.to_string())?;
    let tight = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * b.abs();
    let bad = s.entries.iter().find(|e| {
        let k = e.k as f64;
        !(tight(e.norm, k) && tight(e.eps, 0.5 / k) && tight(2.0 * e.eps * e.norm, 1.0))
    });
    match bad {
        None => Ok("P_(k) = kI, eps_k = 1/(2k) for k <= 100".into()),
        Some(e) => Err(format!("k = {}: norm {} eps {}", e.k, e.norm, e.eps)),
    }
}

fn model_x_identity(_: &Path) -> Check {
    let cf = golden(40);
    for k in [1, 10, 100] {
        let m = model_x(0.21, 2, Complex64::new(0.0, 0.0), &cf, k, 0.0).map_err(|e| e.to_string())?;
        let kc = Complex64::new(k as f64, 0.0);
        let z = Complex64::new(0.0, 0.0);
        if m.matrix != [[kc, z], [z, kc]] {
            return Err(format!("k = {k}: {:?}", m.matrix));
        }
    }
    Ok("t_hat = 0 gives X = kI".into())
}

fn holder_edge(out: &Path) -> Check {
    let dir = out.join("holder-free");
    let pairs = [("lambda", "0"), ("n", "2000"), ("energies", "2"), ("vector", "e0"), ("eps", "log:1e-3:1e-2:5")];
    run_cmd("holder", &pairs, &dir).map_err(|e| e.to_string())?;
    let (header, rows) = read_csv(&dir.join("holder.csv"))?;
    let col = header.iter().position(|h| h == "ratio").ok_or("no ratio column")?;
    if rows.len() != 5 {
        return Err(format!("{} rows for a 5-point grid", rows.len()));
    }
    let mut worst: f64 = 0.0;
    for r in &rows {
        let ratio: f64 = r[col].parse().map_err(|_| "unparsable ratio")?;
        worst = worst.max((ratio * PI - 1.0).abs());
    }
    if worst < 0.1 { Ok(format!("edge ratio within {:.1}% of 1/pi", 100.0 * worst)) } else { Err(format!("relative error {worst:.3}")) }
}

fn negative_n(out: &Path) -> Check {
    expect_key(run_cmd("spectrum", &[("n", "-5")], &out.join("bad-n")), "n")
}

fn unknown_key(out: &Path) -> Check {
    expect_key(run_cmd("cf", &[("depht", "10")], &out.join("bad-key")), "depht")
}

fn corrupt_potential(out: &Path) -> Check {
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let file: PathBuf = out.join("corrupt_potential.txt");
    std::fs::write(&file, "0 0 0\n1 1.0 zero\n").map_err(|e| e.to_string())?;
    let f = file.to_string_lossy().to_string();
    expect_key(run_cmd("spectrum", &[("potential_file", &f), ("n", "10")], &out.join("bad-potential")), "potential_file")
}

fn deterministic(out: &Path) -> Check {
    let pairs = [("lambda", "0.3"), ("n", "400"), ("energy_count", "4"), ("eps", "log:1e-2:1e-1:4")];
    let (a, b) = (out.join("det-a"), out.join("det-b"));
    run_cmd("holder", &pairs, &a).map_err(|e| e.to_string())?;
    run_cmd("holder", &pairs, &b).map_err(|e| e.to_string())?;
    for f in ["holder.csv", "holder.json"] {
        let x = std::fs::read(a.join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(f)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{f} differs between runs"));
        }
    }
    Ok("holder.csv and holder.json byte-identical across two runs".into())
}

const CHECKS: &[(&str, fn(&Path) -> Check)] = &[
    ("cf-golden-fibonacci", cf_fibonacci),
    ("free-ids-closed-form", free_ids),
    ("free-weyl-quadratic-branch", free_weyl),
    ("rotation-pk-exact", rotation_pk),
    ("model-x-identity", model_x_identity),
    ("holder-free-edge", holder_edge),
    ("reject-negative-n", negative_n),
    ("reject-unknown-key", unknown_key),
    ("reject-corrupt-potential-file", corrupt_potential),
    ("byte-identical-outputs", deterministic),
];

/// Prints one line per check; true when all pass.
pub fn run(out: &Path) -> bool {
    let mut failed = 0;
    for (name, f) in CHECKS {
        let t = Instant::now();
        let r = f(out);
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(m) => println!("PASS {name} ({secs:.2}s): {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {m}");
            }
        }
    }
    println!("selftest: {} of {} checks passed", CHECKS.len() - failed, CHECKS.len());
    failed == 0
}
