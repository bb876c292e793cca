//! Flat `key = value` experiment configs.
//!
//! Blank lines and `#` comments are ignored. Every key a command reads is
//! recorded with its effective value (defaults included); that record is the
//! resolved config echoed into the outputs and hashed into the manifest.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug)]
pub enum CliError {
    /// bad input, tied to a config key where there is one
    Validation { key: String, message: String },
    /// a library failure; `numeric` selects exit code 3 over 2
    Library { context: String, error: qplab::Error },
    Io(String),
}

impl CliError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::Validation { key: key.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Library { error, .. } if error.is_numeric() => 3,
            CliError::Library { .. } => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation { key, message } if key.is_empty() => write!(f, "invalid input: {message}"),
            CliError::Validation { key, message } => write!(f, "invalid value for `{key}`: {message}"),
            CliError::Library { context, error } => write!(f, "{context}: {error}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a context string to library errors.
pub trait Context<T> {
    fn ctx(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for qplab::Result<T> {
    fn ctx(self, context: &str) -> CliResult<T> {
        self.map_err(|error| CliError::Library { context: context.to_string(), error })
    }
}

pub struct Config {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn parse_text(text: &str, origin: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::invalid("", format!("{origin} line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::invalid("", format!("{origin} line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::invalid(k, format!("{origin} line {}: key given twice", i + 1)));
        }
    }
    Ok(out)
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let (mut values, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_text(&text, &p.display().to_string())?, dir)
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| CliError::invalid("", format!("--set expects key=value, got `{o}`")))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Config { values, base_dir, resolved: RefCell::new(BTreeMap::new()) })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        let values = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Config { values, base_dir: PathBuf::new(), resolved: RefCell::new(BTreeMap::new()) }
    }

    /// Rejects every key outside `allowed`.
    pub fn restrict(&self, allowed: &BTreeSet<&str>) -> CliResult<()> {
        match self.values.keys().find(|k| !allowed.contains(k.as_str())) {
            Some(k) => Err(CliError::invalid(k, "unknown key for this command")),
            None => Ok(()),
        }
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.base_dir.join(rel)
    }

    fn record(&self, key: &str, value: &str) {
        self.resolved.borrow_mut().insert(key.to_string(), value.to_string());
    }

    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }

    /// Reads a key without recording it (output locations, thread counts).
    pub fn peek(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn raw(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v);
        }
        v
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, &v);
        v
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T: fmt::Display,
    {
        match self.values.get(key) {
            Some(v) => {
                let parsed = v.parse::<T>().map_err(|_| CliError::invalid(key, format!("cannot parse `{v}`")))?;
                self.record(key, v);
                Ok(parsed)
            }
            None => {
                self.record(key, &default.to_string());
                Ok(default)
            }
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.parse_or(key, default)?;
        if !v.is_finite() {
            return Err(CliError::invalid(key, "must be finite"));
        }
        Ok(v)
    }

    pub fn positive_f64(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return Err(CliError::invalid(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    /// A positive count; negative or zero values name the key.
    pub fn count(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.values.get(key) {
            Some(v) => {
                let n: i64 = v.parse().map_err(|_| CliError::invalid(key, format!("expected an integer, got `{v}`")))?;
                if n < 1 {
                    return Err(CliError::invalid(key, format!("must be >= 1, got {n}")));
                }
                self.record(key, v);
                Ok(n as usize)
            }
            None => {
                self.record(key, &default.to_string());
                Ok(default)
            }
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        let v = self.str_or(key, if default { "true" } else { "false" });
        match v.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(CliError::invalid(key, format!("expected true/false, got `{v}`"))),
        }
    }

    /// Number list: `a,b,c`, `lin:a:b:n` or `log:a:b:n`.
    pub fn grid(&self, key: &str, default: &str) -> CliResult<Vec<f64>> {
        let v = self.str_or(key, default);
        parse_grid(&v).map_err(|m| CliError::invalid(key, m))
    }

    pub fn int_list(&self, key: &str, default: &str) -> CliResult<Vec<i64>> {
        let v = self.str_or(key, default);
        v.split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|_| CliError::invalid(key, format!("bad integer `{s}`"))))
            .collect()
    }
}

pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}`"));
    let out = if let Some(rest) = v.strip_prefix("lin:").or_else(|| v.strip_prefix("log:")) {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            return Err(format!("expected {}a:b:n", &v[..4]));
        }
        let (a, b) = (num(p[0])?, num(p[1])?);
        let n: usize = p[2].trim().parse().map_err(|_| format!("bad count `{}`", p[2]))?;
        if n == 0 {
            return Err("grid count must be >= 1".into());
        }
        let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        if v.starts_with("lin:") {
            (0..n).map(|i| a + (b - a) * t(i)).collect()
        } else {
            if a <= 0.0 || b <= 0.0 {
                return Err("log grid needs positive ends".into());
            }
            (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * t(i)).exp()).collect()
        }
    } else {
        v.split(',').map(num).collect::<Result<Vec<f64>, String>>()?
    };
    if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
        return Err("grid must be non-empty and finite".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let m = parse_text("# c\nlambda = 0.5\n\nn=10 # tail\n", "t").unwrap();
        assert_eq!(m["lambda"], "0.5");
        assert_eq!(m["n"], "10");
        assert!(parse_text("lambda 0.5", "t").is_err());
        assert!(parse_text("a=1\na=2", "t").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid("log:1e-3:1e-1:3").unwrap();
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert!(parse_grid("log:0:1:3").is_err());
    }

    #[test]
    fn counts_name_the_key() {
        let c = Config::from_pairs(&[("n", "-5")]);
        match c.count("n", 10) {
            Err(CliError::Validation { key, .. }) => assert_eq!(key, "n"),
            other => panic!("{other:?}"),
        }
        let allowed: BTreeSet<&str> = ["n"].into_iter().collect();
        let c = Config::from_pairs(&[("bogus", "1")]);
        assert!(matches!(c.restrict(&allowed), Err(CliError::Validation { key, .. }) if key == "bogus"));
    }
}
