use super::measure::{measure_interval, mu_x, MeasureApprox};
use crate::error::{Error, Result};
use crate::operators::OperatorConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderRow {
    pub energy: f64,
    pub eps: f64,
    pub mu: f64,
    /// μ[E−ε, E+ε)/ε^{1/2}
    pub ratio: f64,
    pub below_resolution: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub half_width: i64,
    pub floor: f64,
    pub rows: Vec<HolderRow>,
    /// sup of the ratio over resolved rows
    pub global_sup: f64,
    /// (d, sup over resolved rows with ε ∈ (10^d, 10^{d+1}])
    pub decade_sups: Vec<(i32, f64)>,
    /// max/min of the decade sups
    pub decade_variation: f64,
    /// log-log slope of μ against ε per energy, resolved rows only
    pub exponents: Vec<(f64, Option<f64>)>,
    pub excluded: usize,
}

fn decade(eps: f64) -> i32 {
    (eps.log10() - 1e-9).ceil() as i32 - 1
}

pub fn holder_from_measure(mu: &MeasureApprox, energies: &[f64], eps_grid: &[f64]) -> Result<HolderReport> {
    if energies.is_empty() || eps_grid.is_empty() {
        return Err(Error::InvalidArgument("empty energy or ε grid".into()));
    }
    let mut rows = Vec::with_capacity(energies.len() * eps_grid.len());
    for &e in energies {
        for &eps in eps_grid {
            let m = measure_interval(mu, e, eps)?;
            rows.push(HolderRow { energy: e, eps, mu: m.value, ratio: m.value / eps.sqrt(), below_resolution: m.below_resolution });
        }
    }
    let resolved = || rows.iter().filter(|r| !r.below_resolution);
    let global_sup = resolved().map(|r| r.ratio).fold(0.0, f64::max);
    let mut decades: Vec<i32> = resolved().map(|r| decade(r.eps)).collect();
    decades.sort_unstable();
    decades.dedup();
    let decade_sups: Vec<(i32, f64)> = decades
        .iter()
        .map(|&d| (d, resolved().filter(|r| decade(r.eps) == d).map(|r| r.ratio).fold(0.0, f64::max)))
        .collect();
    let (lo, hi) = decade_sups.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &(_, s)| (a.min(s), b.max(s)));
    let decade_variation = if decade_sups.is_empty() { f64::NAN } else { hi / lo };
    let exponents = energies
        .iter()
        .map(|&e| {
            let pts: Vec<(f64, f64)> =
                resolved().filter(|r| r.energy == e && r.mu > 0.0).map(|r| (r.eps.ln(), r.mu.ln())).collect();
            (e, slope(&pts))
        })
        .collect();
    let excluded = rows.iter().filter(|r| r.below_resolution).count();
    Ok(HolderReport {
        half_width: mu.half_width,
        floor: mu.resolution_floor(),
        rows,
        global_sup,
        decade_sups,
        decade_variation,
        exponents,
        excluded,
    })
}

fn slope(p: &[(f64, f64)]) -> Option<f64> {
    if p.len() < 2 {
        return None;
    }
    let n = p.len() as f64;
    let mx = p.iter().map(|a| a.0).sum::<f64>() / n;
    let my = p.iter().map(|a| a.1).sum::<f64>() / n;
    let sxx: f64 = p.iter().map(|a| (a.0 - mx).powi(2)).sum();
    let sxy: f64 = p.iter().map(|a| (a.0 - mx) * (a.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Scan of μ_x(E−ε, E+ε)/ε^{1/2} for μ_x = μ^{e_{−1}} + μ^{e_0} of the truncation at phase x.
pub fn holder_scan(cfg: &OperatorConfig, energies: &[f64], eps_grid: &[f64], n: i64, x: f64) -> Result<HolderReport> {
    let mu = mu_x(&cfg.with_phase(x), n)?;
    holder_from_measure(&mu, energies, eps_grid)
}

/// n points log-spaced on [a, b].
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}
