use crate::error::{Error, Result};
use crate::linalg::tridiag;
use crate::operators::{schrodinger_tridiagonal, OperatorConfig, Window};

use super::measure::MAX_HALF_WIDTH;

fn phases(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |j| j as f64 / count as f64)
}

fn check(n: usize, phase_avg: usize) -> Result<()> {
    if n == 0 || n as i64 > 2 * MAX_HALF_WIDTH + 1 {
        return Err(Error::InvalidArgument(format!("N must lie in [1, {}], got {n}", 2 * MAX_HALF_WIDTH + 1)));
    }
    if phase_avg == 0 {
        return Err(Error::InvalidArgument("phase_avg must be >= 1".into()));
    }
    Ok(())
}

/// Eigenvalues of the Schrödinger truncation on [0, N−1] at phase x.
pub fn truncation_eigenvalues(cfg: &OperatorConfig, x: f64, n: usize) -> Result<Vec<f64>> {
    let (d, e) = schrodinger_tridiagonal(&cfg.with_phase(x), &Window::new(0, n as i64 - 1)?)?;
    Ok(tridiag::eigenvalues(&d, &e))
}

/// #{E_i ≤ E}/N on [0, N−1], averaged over the phases j/phase_avg, for every E.
pub fn ids_curve(cfg: &OperatorConfig, energies: &[f64], n: usize, phase_avg: usize) -> Result<Vec<f64>> {
    check(n, phase_avg)?;
    let mut acc = vec![0usize; energies.len()];
    for x in phases(phase_avg) {
        let (d, e) = schrodinger_tridiagonal(&cfg.with_phase(x), &Window::new(0, n as i64 - 1)?)?;
        for (a, &en) in acc.iter_mut().zip(energies) {
            *a += tridiag::sturm_count(&d, &e, en.next_up());
        }
    }
    let denom = (n * phase_avg) as f64;
    Ok(acc.into_iter().map(|c| c as f64 / denom).collect())
}

pub fn ids(cfg: &OperatorConfig, energy: f64, n: usize, phase_avg: usize) -> Result<f64> {
    Ok(ids_curve(cfg, &[energy], n, phase_avg)?[0])
}

/// Truncation eigenvalues at the given quantiles of the bulk, skipping the outer
/// `trim` fraction at each end (edge and boundary states).
pub fn spectrum_energies(cfg: &OperatorConfig, n: usize, count: usize, trim: f64) -> Result<Vec<f64>> {
    let ev = truncation_eigenvalues(cfg, cfg.phase, n)?;
    let lo = (trim * ev.len() as f64) as usize;
    let hi = ev.len() - 1 - lo;
    if count == 0 || hi <= lo {
        return Err(Error::InvalidArgument("empty energy selection".into()));
    }
    Ok((0..count)
        .map(|i| {
            let t = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
            ev[lo + ((hi - lo) as f64 * t).round() as usize]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::operators::Potential;
    use std::f64::consts::PI;

    fn cfg(lambda: f64) -> OperatorConfig {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        OperatorConfig::new(lambda, cf, 0.0, Potential::almost_mathieu())
    }

    #[test]
    fn free_ids_closed_form() {
        let es: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * i as f64).collect();
        let got = ids_curve(&cfg(0.0), &es, 1000, 1).unwrap();
        for (e, g) in es.iter().zip(&got) {
            let want = 1.0 - (e / 2.0).clamp(-1.0, 1.0).acos() / PI;
            assert!((g - want).abs() < 2e-3, "E={e}");
        }
        assert!((ids(&cfg(0.0), 0.0, 1000, 1).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn outside_the_spectrum() {
        let c = cfg(0.8);
        assert_eq!(ids(&c, -5.0, 300, 3).unwrap(), 0.0);
        assert_eq!(ids(&c, 5.0, 300, 3).unwrap(), 1.0);
    }

    #[test]
    fn central_gap_plateau() {
        // golden α: the two largest gaps have labels ±1, i.e. IDS values {α}, 1 − {α}
        let c = cfg(0.5);
        let ev = truncation_eigenvalues(&c, 0.0, 2000).unwrap();
        let (i, gap) = ev.windows(2).enumerate().filter(|(j, _)| *j > 200 && *j < 1800).map(|(j, w)| (j, w[1] - w[0])).fold((0, 0.0), |b, x| if x.1 > b.1 { x } else { b });
        assert!(gap > 0.05);
        let (a, b) = (ev[i] + 0.2 * gap, ev[i + 1] - 0.2 * gap);
        let na = ids(&c, a, 2000, 4).unwrap();
        let nb = ids(&c, b, 2000, 4).unwrap();
        assert!((na - nb).abs() < 2e-3);
        let alpha = c.alpha();
        let label = [alpha, 1.0 - alpha, 2.0 * alpha - 1.0, 2.0 - 2.0 * alpha].iter().map(|l| (l - na).abs()).fold(f64::INFINITY, f64::min);
        assert!(label < 2e-3, "IDS {na} on the gap is not a low gap label");
    }
}
