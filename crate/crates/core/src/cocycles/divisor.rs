use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::diophantine::CfExpansion;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorSolve {
    pub theta: f64,
    pub cutoff: i64,
    /// ŵ_k for |k| ≤ K, k not excluded
    pub w_hat: BTreeMap<i64, Complex64>,
    /// smallest |1 − e^{−2πi(2θ−kα)}| among the modes divided by
    pub min_divisor: f64,
    pub min_divisor_at: Option<i64>,
    /// Σ|ŵ_k|, a bound for sup |w| on the real line
    pub w_bound: f64,
}

impl DivisorSolve {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.w_hat.iter().map(|(&k, &w)| w * (Complex64::new(0.0, 2.0 * PI * k as f64) * x).exp()).sum()
    }
}

/// 2θ − kα reduced to [−½, ½).
pub fn phase_offset(cf: &CfExpansion, theta: f64, k: i64) -> f64 {
    let f = cf.orbit(2.0 * theta, -k);
    if f >= 0.5 {
        f - 1.0
    } else {
        f
    }
}

/// ŵ_k = −b̂_k e^{−2πiθ} / (1 − e^{−2πi(2θ−kα)}), refusing divisors below the floor.
pub fn divisor_solve(
    b_hat: &BTreeMap<i64, Complex64>,
    theta: f64,
    cf: &CfExpansion,
    excluded: &BTreeSet<i64>,
    cutoff: i64,
    floor: f64,
) -> Result<DivisorSolve> {
    if cutoff < 0 || !(floor >= 0.0) {
        return Err(Error::InvalidArgument("cutoff and floor must be non-negative".into()));
    }
    let phase = Complex64::from_polar(1.0, -2.0 * PI * theta);
    let mut w_hat = BTreeMap::new();
    let mut min_divisor = f64::INFINITY;
    let mut min_at = None;
    for (&k, &b) in b_hat.range(-cutoff..=cutoff) {
        if excluded.contains(&k) {
            continue;
        }
        let d = phase_offset(cf, theta, k);
        if d.abs() < floor {
            return Err(Error::DivisorBelowFloor { k, divisor: d.abs(), floor });
        }
        // 1 − e^{−2πid} without cancellation
        let s = (PI * d).sin();
        let denom = Complex64::new(2.0 * s * s, (2.0 * PI * d).sin());
        let m = denom.norm();
        if m < min_divisor {
            min_divisor = m;
            min_at = Some(k);
        }
        if b != Complex64::new(0.0, 0.0) {
            w_hat.insert(k, -b * phase / denom);
        }
    }
    let w_bound = w_hat.values().map(|w| w.norm()).sum();
    Ok(DivisorSolve { theta, cutoff, w_hat, min_divisor, min_divisor_at: min_at, w_bound })
}

/// Fourier modes of the upper-right entry of W(x+α)^{−1}[[e^{2πiθ}, b],[0, e^{−2πiθ}]]W(x),
/// W = [[1, w],[0, 1]], sampled on `samples` phases.
pub fn conjugated_corner_modes(
    b_hat: &BTreeMap<i64, Complex64>,
    sol: &DivisorSolve,
    cf: &CfExpansion,
    samples: usize,
) -> Vec<(i64, Complex64)> {
    let e = Complex64::from_polar(1.0, 2.0 * PI * sol.theta);
    let alpha = cf.alpha_f64();
    let eval_b = |x: f64| -> Complex64 {
        b_hat.iter().map(|(&k, &b)| b * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x)).sum()
    };
    let vals: Vec<Complex64> = (0..samples)
        .map(|j| {
            let x = j as f64 / samples as f64;
            let w0 = sol.eval(Complex64::new(x, 0.0));
            let w1 = sol.eval(Complex64::new(x + alpha, 0.0));
            e * w0 + eval_b(x) - w1 * e.conj()
        })
        .collect();
    let half = (samples / 2) as i64;
    (-half + 1..half)
        .map(|k| {
            let s: Complex64 = vals
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / samples as f64))
                .sum();
            (k, s / samples as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::FrequencySpec;

    fn golden() -> CfExpansion {
        CfExpansion::new(&FrequencySpec::golden(), 40).unwrap()
    }

    #[test]
    fn single_mode_divisor_modulus() {
        let cf = golden();
        let theta = 0.123;
        let b: BTreeMap<i64, Complex64> = [(3, Complex64::new(1.0, 0.0))].into();
        let s = divisor_solve(&b, theta, &cf, &BTreeSet::new(), 10, 1e-6).unwrap();
        let d = 2.0 * theta - 3.0 * cf.alpha_f64();
        let expect = 2.0 * (PI * d).sin().abs();
        assert!((s.min_divisor - expect).abs() < 1e-14);
        assert!((s.w_hat[&3].norm() - 1.0 / expect).abs() < 1e-12);
    }

    #[test]
    fn zero_input_and_exclusion() {
        let cf = golden();
        let s = divisor_solve(&BTreeMap::new(), 0.2, &cf, &BTreeSet::new(), 5, 0.0).unwrap();
        assert!(s.w_hat.is_empty() && s.w_bound == 0.0);

        // θ = α/2 makes k = 1 exactly resonant
        let theta = cf.alpha_f64() / 2.0;
        let b: BTreeMap<i64, Complex64> = (-4i64..=4).map(|k| (k, Complex64::new(0.5f64.powi(k.abs() as i32), 0.0))).collect();
        assert!(matches!(divisor_solve(&b, theta, &cf, &BTreeSet::new(), 4, 1e-3), Err(Error::DivisorBelowFloor { k: 1, .. })));
        let ex: BTreeSet<i64> = [1].into();
        let s = divisor_solve(&b, theta, &cf, &ex, 2, 1e-3).unwrap();
        assert!(!s.w_hat.contains_key(&1));
        assert!(!s.w_hat.contains_key(&3));
        assert_eq!(s.w_hat.len(), 4);
    }

    #[test]
    fn conjugation_removes_solved_modes() {
        let cf = golden();
        let theta = 0.31;
        let b: BTreeMap<i64, Complex64> = (-6i64..=6).map(|k| (k, Complex64::new(0.7f64.powi(k.abs() as i32), 0.1 * k as f64))).collect();
        let ex: BTreeSet<i64> = [2].into();
        let s = divisor_solve(&b, theta, &cf, &ex, 4, 1e-4).unwrap();
        let modes = conjugated_corner_modes(&b, &s, &cf, 64);
        for (k, v) in modes {
            let keep = ex.contains(&k) || k.abs() > 4;
            let want = if keep { b.get(&k).copied().unwrap_or_default() } else { Complex64::new(0.0, 0.0) };
            assert!((v - want).norm() < 1e-9, "k={k}: {v} vs {want}");
        }
    }
}
