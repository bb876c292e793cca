//! CSV/JSON emitters and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{CliError, CliResult, Config};

pub const ARTIFACT_VERSION: &str = concat!("qplab ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::I(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::B(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

pub struct Table {
    columns: Vec<&'static str>,
    units: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// `spec` holds (column name, unit); use "1" for dimensionless.
    pub fn new(spec: &[(&'static str, &'static str)]) -> Self {
        Table { columns: spec.iter().map(|c| c.0).collect(), units: spec.iter().map(|c| c.1).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    /// Guards against silent truncation of a declared grid.
    pub fn expect_rows(&self, n: usize, what: &str) -> CliResult<()> {
        if self.rows.len() != n {
            return Err(CliError::invalid("", format!("{what}: produced {} rows, grid declares {n}", self.rows.len())));
        }
        Ok(())
    }

    fn render(&self, header: &str) -> String {
        let mut s = String::from(header);
        let _ = writeln!(s, "# units: {}", self.units.join(","));
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

pub fn resolved_text(resolved: &BTreeMap<String, String>) -> String {
    resolved.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects outputs, stage timings and warnings for one command invocation.
pub struct Run {
    pub command: String,
    pub out_dir: PathBuf,
    pub precision: u32,
    started: Instant,
    stages: Vec<(String, f64)>,
    warnings: Vec<String>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(command: &str, out_dir: &Path, precision: u32) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
        Ok(Run {
            command: command.to_string(),
            out_dir: out_dir.to_path_buf(),
            precision,
            started: Instant::now(),
            stages: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
        let t = Instant::now();
        let r = f();
        self.stages.push((name.to_string(), t.elapsed().as_secs_f64()));
        r
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let p = self.out_dir.join(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table, cfg: &Config) -> CliResult<()> {
        let mut header = format!("# {ARTIFACT_VERSION} {}\n", self.command);
        for line in resolved_text(&cfg.resolved()).lines() {
            let _ = writeln!(header, "# {line}");
        }
        self.write(name, table.render(&header).as_bytes())
    }

    pub fn json(&mut self, name: &str, mut body: Value, cfg: &Config) -> CliResult<()> {
        if let Value::Object(m) = &mut body {
            m.insert("command".into(), json!(self.command));
            m.insert("config".into(), json!(cfg.resolved()));
        }
        let mut text = serde_json::to_string_pretty(&body).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn binary(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        self.write(name, bytes)
    }

    pub fn finish(self, cfg: &Config) -> CliResult<()> {
        let resolved = cfg.resolved();
        let hash = sha256_hex(format!("{}\n{}", self.command, resolved_text(&resolved)).as_bytes());
        let stages: Vec<Value> = self.stages.iter().map(|(n, t)| json!({"stage": n, "seconds": t})).collect();
        let manifest = json!({
            "artifact_version": ARTIFACT_VERSION,
            "command": self.command,
            "config_hash": format!("sha256:{hash}"),
            "config": resolved,
            "precision_bits": self.precision,
            "wall_seconds": self.started.elapsed().as_secs_f64(),
            "stages": stages,
            "warnings": self.warnings,
            "outputs": self.outputs,
        });
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let p = self.out_dir.join("manifest.json");
        std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn table_rendering() {
        let mut t = Table::new(&[("E", "energy"), ("note", "1")]);
        t.push(vec![0.5.into(), Cell::S("a,b".into())]);
        let s = t.render("# h\n");
        assert_eq!(s, "# h\n# units: energy,1\nE,note\n5.0000000000000000e-1,\"a,b\"\n");
        assert!(t.expect_rows(2, "t").is_err());
    }
}
