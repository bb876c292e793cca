//! Frequency, potential and operator settings shared by most commands.

use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use qplab::diophantine::{CfExpansion, FrequencySpec};
use qplab::operators::{OperatorConfig, Potential};

use crate::config::{CliError, CliResult, Config, Context};

pub const COMMON_KEYS: &[&str] = &["frequency", "depth", "precision", "out", "threads"];
pub const OPERATOR_KEYS: &[&str] = &["lambda", "phase", "potential", "potential_file", "rho", "sigma"];

fn quotient_list(key: &str, s: &str) -> CliResult<Vec<BigUint>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            BigUint::from_str(t).map_err(|_| CliError::invalid(key, format!("bad partial quotient `{t}`")))
        })
        .collect()
}

fn rational(key: &str, s: &str) -> CliResult<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| CliError::invalid(key, format!("bad rational `{s}`")))
}

/// `golden`, `silver`, `stream:a1,a2,..`, `periodic:head;cycle`,
/// `decimal:0.xxx` or `decimal:p/q`, `quadratic:d:offset:scale`.
pub fn parse_frequency(v: &str, precision: u32) -> CliResult<FrequencySpec> {
    const KEY: &str = "frequency";
    let (kind, rest) = v.split_once(':').unwrap_or((v, ""));
    Ok(match kind.trim() {
        "golden" => FrequencySpec::golden(),
        "silver" => FrequencySpec::silver(),
        "stream" => FrequencySpec::Stream(quotient_list(KEY, rest)?),
        "periodic" => {
            let (head, cycle) = rest.split_once(';').unwrap_or(("", rest));
            let cycle = quotient_list(KEY, cycle)?;
            if cycle.is_empty() {
                return Err(CliError::invalid(KEY, "periodic expansion needs a non-empty cycle"));
            }
            FrequencySpec::Periodic { head: quotient_list(KEY, head)?, cycle }
        }
        "decimal" => FrequencySpec::Decimal { text: rest.trim().to_string(), precision_bits: precision },
        "quadratic" => {
            let p: Vec<&str> = rest.split(':').collect();
            if p.len() != 3 {
                return Err(CliError::invalid(KEY, "expected quadratic:d:offset:scale"));
            }
            let d = BigUint::from_str(p[0].trim()).map_err(|_| CliError::invalid(KEY, format!("bad radicand `{}`", p[0])))?;
            FrequencySpec::Quadratic { d, offset: rational(KEY, p[1])?, scale: rational(KEY, p[2])? }
        }
        other => return Err(CliError::invalid(KEY, format!("unknown frequency form `{other}`"))),
    })
}

pub fn precision(cfg: &Config) -> CliResult<u32> {
    let p: u32 = cfg.parse_or("precision", qplab::diophantine::DEFAULT_PRECISION)?;
    if p < 53 {
        return Err(CliError::invalid("precision", format!("need at least 53 bits, got {p}")));
    }
    Ok(p)
}

pub fn frequency(cfg: &Config, default_depth: usize) -> CliResult<CfExpansion> {
    let bits = precision(cfg)?;
    let spec = parse_frequency(&cfg.str_or("frequency", "golden"), bits)?;
    let depth = cfg.count("depth", default_depth)?;
    CfExpansion::with_precision(&spec, depth, bits).map_err(|error| match error {
        qplab::Error::InvalidFrequency(m) => CliError::invalid("frequency", m),
        error => CliError::Library { context: "frequency".into(), error },
    })
}

/// `amo`, `mode:k:a`, or an inline table `k re im; k re im; ...`.
/// `potential_file` (relative to the config) takes precedence when given.
pub fn potential(cfg: &Config) -> CliResult<Potential> {
    let rho = cfg.parse_or("rho", f64::INFINITY)?;
    if !(rho > 0.0) {
        return Err(CliError::invalid("rho", format!("must be positive, got {rho}")));
    }
    let table = |text: &str, key: &str| {
        Potential::parse_table(text, rho).map_err(|e| CliError::invalid(key, e.to_string()))
    };
    let p = if let Some(file) = cfg.raw("potential_file") {
        let path = cfg.path(&file);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::invalid("potential_file", format!("{}: {e}", path.display())))?;
        table(&text, "potential_file")?
    } else {
        let v = cfg.str_or("potential", "amo");
        let (kind, rest) = v.split_once(':').unwrap_or((v.as_str(), ""));
        match kind.trim() {
            "amo" => Potential::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], rho).ctx("potential")?,
            "mode" => {
                let (k, a) = rest.split_once(':').ok_or_else(|| CliError::invalid("potential", "expected mode:k:a"))?;
                let k: usize = k.trim().parse().map_err(|_| CliError::invalid("potential", format!("bad mode `{k}`")))?;
                let a: f64 = a.trim().parse().map_err(|_| CliError::invalid("potential", format!("bad amplitude `{a}`")))?;
                let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
                c[k] += Complex64::new(a, 0.0);
                Potential::new(c, rho).map_err(|e| CliError::invalid("potential", e.to_string()))?
            }
            "table" => table(&rest.replace(';', "\n"), "potential")?,
            other => return Err(CliError::invalid("potential", format!("unknown potential form `{other}`"))),
        }
    };
    match cfg.raw("sigma") {
        Some(_) => {
            let s = cfg.positive_f64("sigma", 0.5)?;
            p.with_decay(s).map_err(|e| CliError::invalid("sigma", e.to_string()))
        }
        None => Ok(p),
    }
}

pub fn operator(cfg: &Config, default_depth: usize, default_lambda: f64) -> CliResult<OperatorConfig> {
    let cf = frequency(cfg, default_depth)?;
    let lambda = cfg.f64_or("lambda", default_lambda)?;
    let phase = cfg.f64_or("phase", 0.0)?;
    Ok(OperatorConfig::new(lambda, cf, phase, potential(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_forms() {
        assert_eq!(parse_frequency("golden", 256).unwrap(), FrequencySpec::golden());
        assert_eq!(parse_frequency("stream:1,2,3", 256).unwrap(), FrequencySpec::stream([1, 2, 3]));
        let p = parse_frequency("periodic:1;2,3", 256).unwrap();
        assert!(matches!(p, FrequencySpec::Periodic { head, cycle } if head.len() == 1 && cycle.len() == 2));
        let q = parse_frequency("quadratic:2:-1:1", 256).unwrap();
        assert_eq!(q, FrequencySpec::silver());
        assert!(parse_frequency("periodic:1;", 256).is_err());
        assert!(parse_frequency("bogus", 256).is_err());
    }

    #[test]
    fn potential_forms() {
        let c = Config::from_pairs(&[("potential", "table:0 0.5 0; 2 0.25 0.1")]);
        let p = potential(&c).unwrap();
        assert_eq!(p.degree(), 2);
        let c = Config::from_pairs(&[("potential", "mode:3:0.5")]);
        assert_eq!(potential(&c).unwrap().coefficient(3), Complex64::new(0.5, 0.0));
        let c = Config::from_pairs(&[("potential", "table:0 1 2")]);
        assert!(matches!(potential(&c), Err(CliError::Validation { key, .. }) if key == "potential"));
    }
}
