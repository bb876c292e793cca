//! Comparison of the truncated spectra of H_{λv,α} and its dual.
//!
//! Dirichlet truncations carry eigenvalues belonging to states pinned at the
//! window ends; those fill gaps at phase-dependent positions. Every eigenvector
//! whose weight in the outer quarters of the window exceeds [`LAYER_WEIGHT_MAX`]
//! is dropped (extended states put about half their weight there) and the
//! remaining eigenvalues of a few phases are pooled.

use crate::error::{Error, Result};
use crate::linalg::tridiag;
use crate::operators::{
    block_eigen, dual_tridiagonal, schrodinger_tridiagonal, truncate, BlockKind, OperatorConfig, Window,
};

pub const MAX_DUALITY_N: usize = 3000;
pub const LAYER_WEIGHT_MAX: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRow {
    /// gap of the H spectrum, (lower edge, upper edge)
    pub direct: (f64, f64),
    /// gap of the dual spectrum containing the midpoint of `direct`, if any
    pub dual: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub n: usize,
    pub phases: usize,
    /// Hausdorff distance between the pooled H and dual spectra
    pub distance: f64,
    /// for degree-one v: distance between the dual spectrum and |v̂₁|λ·H_{1/(|v̂₁|λ)}
    /// at phases offset from the dual ones
    pub scaled_distance: Option<f64>,
    pub gaps: Vec<GapRow>,
    pub direct_spectrum: Vec<f64>,
    pub dual_spectrum: Vec<f64>,
    pub discarded: usize,
}

fn layer(n: usize) -> usize {
    n / 4
}

fn bulk_tridiagonal(d: &[f64], e: &[f64], discarded: &mut usize) -> Vec<f64> {
    let n = d.len();
    let l = layer(n);
    let values = tridiag::eigenvalues(d, e);
    let mut out = Vec::with_capacity(n);
    for &ev in &values {
        let v = tridiag::inverse_iteration(d, e, ev);
        let w: f64 = v[..l].iter().chain(&v[n - l..]).map(|x| x * x).sum();
        if w > LAYER_WEIGHT_MAX {
            *discarded += 1;
        } else {
            out.push(ev);
        }
    }
    out
}

fn direct_bulk(cfg: &OperatorConfig, w: &Window, discarded: &mut usize) -> Result<Vec<f64>> {
    let (d, e) = schrodinger_tridiagonal(cfg, w)?;
    Ok(bulk_tridiagonal(&d, &e, discarded))
}

fn dual_bulk(cfg: &OperatorConfig, w: &Window, discarded: &mut usize) -> Result<Vec<f64>> {
    if let Some((d, e)) = dual_tridiagonal(cfg, w)? {
        return Ok(bulk_tridiagonal(&d, &e, discarded));
    }
    let b = truncate(cfg, w, BlockKind::Dual)?;
    let (vals, vecs) = block_eigen(&b);
    let n = vals.len();
    let l = layer(n);
    let mut out = Vec::with_capacity(n);
    for (j, &ev) in vals.iter().enumerate() {
        let col = vecs.column(j);
        let wgt: f64 = (0..l).chain(n - l..n).map(|i| col[i].norm_sqr()).sum();
        if wgt > LAYER_WEIGHT_MAX {
            *discarded += 1;
        } else {
            out.push(ev);
        }
    }
    Ok(out)
}

fn pooled(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn nearest(sorted: &[f64], x: f64) -> f64 {
    let i = sorted.partition_point(|&y| y < x);
    let mut d = f64::INFINITY;
    if i < sorted.len() {
        d = d.min(sorted[i] - x);
    }
    if i > 0 {
        d = d.min(x - sorted[i - 1]);
    }
    d
}

/// Hausdorff distance between two finite sets given as sorted slices.
pub fn hausdorff_sorted(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let ab = a.iter().map(|&x| nearest(b, x)).fold(0.0, f64::max);
    let ba = b.iter().map(|&x| nearest(a, x)).fold(0.0, f64::max);
    ab.max(ba)
}

/// Gaps of a sorted point set wider than `min_width`, widest first.
pub fn gaps(sorted: &[f64], min_width: f64) -> Vec<(f64, f64)> {
    let mut g: Vec<(f64, f64)> = sorted.windows(2).filter(|w| w[1] - w[0] > min_width).map(|w| (w[0], w[1])).collect();
    g.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)));
    g
}

/// Truncations on [0, N−1]; H at x_j = j/P, the dual at θ_j = j/P, and the
/// rescaled H_{1/λ} at (j + 1/4)/P.
pub fn duality_gap(cfg: &OperatorConfig, n: usize, phases: usize) -> Result<DualityReport> {
    if n < 8 || n > MAX_DUALITY_N {
        return Err(Error::InvalidArgument(format!("N must lie in [8, {MAX_DUALITY_N}], got {n}")));
    }
    if phases == 0 {
        return Err(Error::InvalidArgument("need at least one phase".into()));
    }
    let w = Window::new(0, n as i64 - 1)?;
    let mut discarded = 0;
    let (mut direct, mut dual) = (Vec::new(), Vec::new());
    for j in 0..phases {
        let x = j as f64 / phases as f64;
        direct.extend(direct_bulk(&cfg.with_phase(x), &w, &mut discarded)?);
        dual.extend(dual_bulk(&cfg.with_phase(x), &w, &mut discarded)?);
    }
    let direct = pooled(direct);
    let dual = pooled(dual);

    // for v = 2c·cos(2π(x + φ)) the dual is c·λ times H with coupling 1/(cλ), up to a phase gauge
    let scaled_distance = match (cfg.potential.degree(), cfg.lambda) {
        (1, l) if l != 0.0 && cfg.potential.coefficient(0).norm() == 0.0 => {
            let c = l * cfg.potential.coefficient(1).norm();
            let inv = cfg.with_lambda(cfg.lambda / (c * c));
            let mut s = Vec::new();
            for j in 0..phases {
                let x = (j as f64 + 0.25) / phases as f64;
                s.extend(direct_bulk(&inv.with_phase(x), &w, &mut discarded)?.into_iter().map(|e| c * e));
            }
            Some(hausdorff_sorted(&dual, &pooled(s)))
        }
        _ => None,
    };

    let table = gaps(&direct, 20.0 / n as f64)
        .into_iter()
        .take(16)
        .map(|g| {
            let mid = 0.5 * (g.0 + g.1);
            let i = dual.partition_point(|&y| y < mid);
            let dg = (i > 0 && i < dual.len()).then(|| (dual[i - 1], dual[i]));
            GapRow { direct: g, dual: dg }
        })
        .collect();

    Ok(DualityReport {
        n,
        phases,
        distance: hausdorff_sorted(&direct, &dual),
        scaled_distance,
        gaps: table,
        direct_spectrum: direct,
        dual_spectrum: dual,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::operators::Potential;

    fn cfg(lambda: f64) -> OperatorConfig {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 60).unwrap();
        OperatorConfig::new(lambda, cf, 0.0, Potential::almost_mathieu())
    }

    #[test]
    fn hausdorff_basics() {
        assert_eq!(hausdorff_sorted(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_eq!(hausdorff_sorted(&[0.0, 1.0], &[0.0, 0.5, 1.0]), 0.5);
        assert_eq!(hausdorff_sorted(&[0.0], &[0.25]), 0.25);
        assert_eq!(hausdorff_sorted(&[], &[1.0]), f64::INFINITY);
    }

    #[test]
    fn free_dual_fills_the_free_band() {
        let r = duality_gap(&cfg(0.0), 400, 2).unwrap();
        assert!(r.distance < 0.05, "{}", r.distance);
        assert!(r.scaled_distance.is_none());
        assert!(r.dual_spectrum.iter().all(|e| e.abs() <= 2.0));
    }

    #[test]
    fn amo_spectra_align_and_improve() {
        let a = duality_gap(&cfg(0.5), 400, 4).unwrap();
        let b = duality_gap(&cfg(0.5), 800, 4).unwrap();
        assert!(b.distance < a.distance, "{} {}", a.distance, b.distance);
        assert!(b.scaled_distance.unwrap() < 0.1);
        let widest = b.gaps[0];
        let d = widest.dual.unwrap();
        assert!((d.0 - widest.direct.0).abs() < 0.05 && (d.1 - widest.direct.1).abs() < 0.05);
    }
}
