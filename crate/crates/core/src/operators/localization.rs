use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;

use super::block::{truncate, BlockKind, MatrixBlock, OperatorConfig, Window};
use crate::diophantine::{phase_ext, resonances};
use crate::error::{Error, Result};
use crate::linalg::tridiag;

/// Eigenvalues ascending with eigenvectors as columns. Real tridiagonal
/// blocks go through QL, everything else through the dense Hermitian solver.
pub fn block_eigen(b: &MatrixBlock) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = b.window.len();
    let m = &b.matrix;
    let tridiagonal_real = (0..n).all(|i| {
        (0..n).all(|j| {
            let z = m[(i, j)];
            z.im == 0.0 && (i.abs_diff(j) <= 1 || z.re == 0.0)
        })
    });
    if tridiagonal_real {
        let d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        let e: Vec<f64> = (0..n.saturating_sub(1)).map(|i| m[(i + 1, i)].re).collect();
        let (vals, vecs) = tridiag::eigen_full(&d, &e);
        let mat = DMatrix::from_fn(n, n, |i, j| Complex64::new(vecs[j][i], 0.0));
        return (vals, mat);
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
    let vals = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mat = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, mat)
}

pub const C0: f64 = 3.0;
const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionFit {
    /// the region C₀|n_j| < |k| < |n_{j+1}|/C₀ (k relative to the center)
    pub j: usize,
    pub lower: f64,
    pub upper: f64,
    /// region sites inside the truncation
    pub sites: usize,
    /// sites above the noise floor, used in the fit
    pub used: usize,
    /// fitted decay rate −d ln|û|/d|k|
    pub rate: Option<f64>,
    /// ln C̄ of the envelope C̄e^{−ε₁|k|}
    pub log_c_bar: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecay {
    pub energy: f64,
    /// argmax site; the profile is read relative to it
    pub center: i64,
    pub resonances: Vec<i64>,
    pub regions: Vec<RegionFit>,
    /// set when the first region C₀·0 < |k| < |n_1|/C₀ has no sites
    pub first_region_empty: bool,
}

impl EigenDecay {
    /// Rate on the first region with at least three fitted sites.
    pub fn first_rate(&self) -> Option<f64> {
        self.regions.iter().find(|r| r.used >= 3).and_then(|r| r.rate)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport {
    pub theta: f64,
    pub n_trunc: i64,
    pub eps0: f64,
    pub eps1: f64,
    pub vectors: Vec<EigenDecay>,
    /// eigenvectors whose center lies outside [−N/2, N/2]
    pub boundary_skipped: usize,
    pub median_rate: Option<f64>,
    pub sites_checked: usize,
    pub violations: usize,
}

impl LocalizationReport {
    pub fn violation_fraction(&self) -> f64 {
        if self.sites_checked == 0 {
            0.0
        } else {
            self.violations as f64 / self.sites_checked as f64
        }
    }
}

pub fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn fit_region(points: &[(f64, f64)], eps1: f64) -> (Option<f64>, f64, usize) {
    let n = points.len() as f64;
    if points.is_empty() {
        return (None, f64::NEG_INFINITY, 0);
    }
    let rate = if points.len() >= 3 {
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| -sxy / sxx)
    } else {
        None
    };
    // envelope with the prescribed rate: mean offset plus two residual deviations
    let shifted: Vec<f64> = points.iter().map(|p| p.1 + eps1 * p.0).collect();
    let mean = shifted.iter().sum::<f64>() / n;
    let sd = (shifted.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    let log_c = mean + 2.0 * sd;
    let violations = shifted.iter().filter(|&&s| s > log_c).count();
    (rate, log_c, violations)
}

/// Decay profile of every interior eigenvector of the dual truncation on
/// [−N, N], read between consecutive resonances of the recentred phase.
pub fn localization_profile(cfg_dual: &OperatorConfig, theta: f64, n_trunc: i64, eps0: f64, eps1: f64) -> Result<LocalizationReport> {
    if n_trunc < 1 {
        return Err(Error::InvalidArgument("N_trunc must be >= 1".into()));
    }
    let cfg = cfg_dual.with_phase(theta);
    let w = Window::centered(n_trunc);
    let block = truncate(&cfg, &w, BlockKind::Dual)?;
    let (vals, vecs) = block_eigen(&block);
    let cf = &cfg.frequency;
    let k_max = (2 * n_trunc).min(cf.k_limit());
    let base = phase_ext(cf, theta);
    let mut out = Vec::new();
    let mut skipped = 0;
    let (mut checked, mut viol) = (0, 0);
    for (j, &energy) in vals.iter().enumerate() {
        let col: Vec<f64> = (0..w.len()).map(|i| vecs[(i, j)].norm()).collect();
        let (imax, vmax) = col.iter().enumerate().fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        let center = w.x1 + imax as i64;
        if center.abs() > n_trunc / 2 {
            skipped += 1;
            continue;
        }
        let shifted = base.add(&cf.alpha().mul_int(&BigInt::from(center)));
        let res = resonances(&shifted, cf, eps0, k_max)?;
        let mut scales: Vec<i64> = res.entries.iter().map(|r| r.k.abs()).collect();
        scales.dedup();
        let reach = (n_trunc - center.abs()) as f64 + 0.5;
        let mut regions = Vec::new();
        for (jj, &nj) in scales.iter().enumerate() {
            let lower = C0 * nj as f64;
            let upper = scales.get(jj + 1).map(|&n1| n1 as f64 / C0).unwrap_or(f64::INFINITY).min(reach + (n_trunc as f64));
            let mut sites = 0;
            let mut points = Vec::new();
            for k in -(2 * n_trunc)..=(2 * n_trunc) {
                let a = k.abs() as f64;
                if !(lower < a && a < upper) {
                    continue;
                }
                let Some(i) = w.index(center + k) else { continue };
                sites += 1;
                let v = col[i] / vmax;
                if v >= NOISE_FLOOR {
                    points.push((a, v.ln()));
                }
            }
            if sites == 0 {
                continue;
            }
            let (rate, log_c_bar, violations) = fit_region(&points, eps1);
            checked += points.len();
            viol += violations;
            regions.push(RegionFit { j: jj, lower, upper, sites, used: points.len(), rate, log_c_bar, violations });
        }
        let first_region_empty = scales.len() > 1 && scales[1] as f64 / C0 <= 1.0;
        out.push(EigenDecay { energy, center, resonances: res.ks(), regions, first_region_empty });
    }
    let mut rates: Vec<f64> = out.iter().filter_map(|e| e.first_rate()).collect();
    if rates.is_empty() {
        return Err(Error::TruncationTooSmall(format!(
            "no interior eigenvector has three fitted sites between resonances at N = {n_trunc}"
        )));
    }
    Ok(LocalizationReport {
        theta,
        n_trunc,
        eps0,
        eps1,
        vectors: out,
        boundary_skipped: skipped,
        median_rate: median(&mut rates),
        sites_checked: checked,
        violations: viol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::operators::Potential;

    fn cfg(lambda: f64) -> OperatorConfig {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        OperatorConfig::new(lambda, cf, 0.0, Potential::almost_mathieu())
    }

    #[test]
    fn qr_and_ql_paths_agree() {
        let c = cfg(0.4).with_phase(0.2);
        let b = truncate(&c, &Window::centered(12), BlockKind::Dual).unwrap();
        let (v1, _) = block_eigen(&b);
        let e = b.matrix.clone().symmetric_eigen();
        let mut v2: Vec<f64> = e.eigenvalues.iter().copied().collect();
        v2.sort_by(f64::total_cmp);
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decay_rate_grows_as_coupling_shrinks() {
        let a = localization_profile(&cfg(0.1), 0.137, 60, 1.0, 1.0).unwrap();
        let b = localization_profile(&cfg(0.01), 0.137, 60, 1.0, 1.0).unwrap();
        let (ra, rb) = (a.median_rate.unwrap(), b.median_rate.unwrap());
        assert!(ra > 0.5 * 10f64.ln(), "{ra}");
        assert!(rb > ra + 1.0, "{rb} vs {ra}");
    }

    #[test]
    fn exact_resonance_flags_the_first_region() {
        let c = cfg(0.1);
        let theta = c.alpha() / 2.0;
        let r = localization_profile(&c, theta, 60, 0.5, 1.0).unwrap();
        let at_zero = r.vectors.iter().find(|v| v.center == 0).unwrap();
        assert_eq!(at_zero.resonances[1].abs(), 1);
        assert!(at_zero.first_region_empty);
    }

    #[test]
    fn tiny_truncation_is_rejected() {
        assert!(matches!(localization_profile(&cfg(0.1), 0.3, 1, 1.0, 1.0), Err(Error::TruncationTooSmall(_))));
    }
}
