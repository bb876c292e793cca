use num_complex::Complex64;

use super::cocycle::{transfer_ladder, Cocycle};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovEstimate {
    pub n: u64,
    pub grid: usize,
    /// (1/n) · mean over the phase grid of ln‖A_n‖
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subadditivity {
    pub l_n: LyapunovEstimate,
    pub l_2n: LyapunovEstimate,
    /// L_{2n} ≤ L_n + 3·SE with SE the combined standard error
    pub holds: bool,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Grid estimates of L_n for each n in the ascending ladder, phases x_j = j/G.
pub fn lyapunov_ladder(c: &Cocycle, ns: &[u64], grid: usize) -> Result<Vec<LyapunovEstimate>> {
    if grid == 0 || ns.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("need n >= 1 and a non-empty phase grid".into()));
    }
    let mut samples = vec![Vec::with_capacity(grid); ns.len()];
    for j in 0..grid {
        let x = Complex64::new(j as f64 / grid as f64, 0.0);
        for (i, t) in transfer_ladder(c, x, ns)?.iter().enumerate() {
            samples[i].push(t.log_norm() / t.n as f64);
        }
    }
    Ok(ns
        .iter()
        .zip(samples)
        .map(|(&n, s)| {
            let (value, std_error) = mean_se(&s);
            LyapunovEstimate { n, grid, value, std_error }
        })
        .collect())
}

/// L_n together with L_{2n} and the subadditivity check.
pub fn lyapunov_finite(c: &Cocycle, n: u64, grid: usize) -> Result<Subadditivity> {
    let l = lyapunov_ladder(c, &[n, 2 * n], grid)?;
    let se = l[0].std_error.hypot(l[1].std_error);
    Ok(Subadditivity { l_n: l[0], l_2n: l[1], holds: l[1].value <= l[0].value + 3.0 * se + 1e-15 })
}

/// Birkhoff estimate along the single orbit of x.
pub fn lyapunov_orbit(c: &Cocycle, x: f64, n: u64) -> Result<f64> {
    let t = transfer_ladder(c, Complex64::new(x, 0.0), &[n])?;
    Ok(t[0].log_norm() / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripRow {
    pub eps: f64,
    pub n: u64,
    /// (1/n) · max over the phase grid of ln‖A_n(x + iε)‖
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripGrowth {
    pub eta: f64,
    pub rows: Vec<StripRow>,
    /// sup over the strip grid, per n
    pub sup_rates: Vec<(u64, f64)>,
    pub decreasing: bool,
    pub final_rate: f64,
}

/// Growth of the transfer matrices on the strip grid ε_j = η·j/m, |j| < m.
pub fn strip_growth_scan(c: &Cocycle, eta: f64, ns: &[u64], strip_points: usize, phases: usize) -> Result<StripGrowth> {
    if !(eta > 0.0) || strip_points == 0 || phases == 0 || ns.is_empty() {
        return Err(Error::InvalidArgument("need η > 0, a non-empty ladder and non-empty grids".into()));
    }
    let m = strip_points as i64;
    let mut rows = Vec::new();
    for j in -(m - 1)..m {
        let eps = eta * j as f64 / m as f64;
        let mut best = vec![f64::NEG_INFINITY; ns.len()];
        for p in 0..phases {
            let x = Complex64::new(p as f64 / phases as f64, eps);
            for (i, t) in transfer_ladder(c, x, ns)?.iter().enumerate() {
                best[i] = best[i].max(t.log_norm() / t.n as f64);
            }
        }
        rows.extend(ns.iter().zip(best).map(|(&n, rate)| StripRow { eps, n, rate }));
    }
    let sup_rates: Vec<(u64, f64)> = ns
        .iter()
        .map(|&n| (n, rows.iter().filter(|r| r.n == n).map(|r| r.rate).fold(f64::NEG_INFINITY, f64::max)))
        .collect();
    let decreasing = sup_rates.windows(2).all(|w| w[1].1 < w[0].1);
    let final_rate = sup_rates.last().map(|r| r.1).unwrap_or(f64::NAN);
    Ok(StripGrowth { eta, rows, sup_rates, decreasing, final_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::cocycle::{conjugate, MatrixMap};
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::linalg::mat2::c;
    use crate::operators::{OperatorConfig, Potential};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn amo(lambda: f64, e: f64) -> Cocycle {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        Cocycle::schrodinger(&OperatorConfig::new(lambda, cf, 0.0, Potential::almost_mathieu()), e)
    }

    #[test]
    fn free_rotation_has_zero_exponent() {
        let s = lyapunov_finite(&amo(0.0, 0.0), 100, 8).unwrap();
        assert!(s.l_n.value.abs() < 1e-14 && s.l_2n.value.abs() < 1e-14);
        assert!(s.holds);
    }

    #[test]
    fn off_spectrum_constant_matrix() {
        // eigenvalue of [[3, −1], [1, 0]] is (3 + √5)/2
        let l = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let s = lyapunov_finite(&amo(0.0, 3.0), 2000, 4).unwrap();
        assert!((s.l_2n.value - l).abs() < 1e-3);
        assert!(s.holds);
    }

    #[test]
    fn subcritical_amo_decays_towards_zero() {
        let l = lyapunov_ladder(&amo(0.5, 0.3), &[100, 1000], 16).unwrap();
        assert!(l[1].value < l[0].value);
        assert!(l[1].value < 0.02);
    }

    #[test]
    fn conjugation_preserves_the_rate() {
        let base = amo(1.5, 0.2);
        let b: MatrixMap = Arc::new(|x: Complex64| {
            let t = (Complex64::new(0.0, 2.0 * PI) * x).exp();
            [[c(2.0, 0.0) + 0.3 * t, c(0.5, 0.1)], [c(0.2, 0.0), c(1.0, 0.0) - 0.1 * t]]
        });
        let conj = conjugate(&base, b);
        let a = lyapunov_orbit(&base, 0.31, 1000).unwrap();
        let d = lyapunov_orbit(&conj, 0.31, 1000).unwrap();
        assert!((a - d).abs() < 1e-3, "{a} vs {d}");
    }

    #[test]
    fn strip_scan_shapes() {
        let z = strip_growth_scan(&amo(0.0, 0.0), 0.05, &[10, 100], 3, 4).unwrap();
        assert_eq!(z.rows.len(), 5 * 2);
        assert!(z.final_rate.abs() < 1e-14);
        let far = strip_growth_scan(&amo(0.3, 3.0), 0.05, &[100, 1000], 2, 8).unwrap();
        let l = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((far.final_rate - l).abs() < 0.05 * l, "{}", far.final_rate);
    }
}
