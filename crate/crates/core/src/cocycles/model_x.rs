use std::f64::consts::PI;

use num_complex::Complex64;

use crate::diophantine::CfExpansion;
use crate::error::{Error, Result};
use crate::linalg::mat2::hermitian_eigen2;
use crate::linalg::C2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelX {
    pub k: usize,
    pub matrix: C2,
    /// ‖X‖
    pub norm: f64,
    /// ‖X^{−1}‖^{−1}
    pub lower: f64,
    /// ‖2θ − rα‖
    pub offset: f64,
    /// ‖X‖ / (k(1 + |t̂|² min{k², ‖2θ−rα‖^{−2}}))
    pub norm_shape: f64,
    /// ‖X^{−1}‖^{−1} / k
    pub lower_shape: f64,
}

/// X = Σ_{j=1}^k T*_{2j−1}T_{2j−1} for T(x) = [[e^{2πiθ}, t̂e^{2πirx}], [0, e^{−2πiθ}]].
pub fn model_x(theta: f64, r: i64, t_hat: Complex64, cf: &CfExpansion, k: usize, x: f64) -> Result<ModelX> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let e = Complex64::from_polar(1.0, 2.0 * PI * theta);
    let unit = |n: usize| Complex64::from_polar(1.0, 2.0 * PI * (n as f64 * theta).fract());
    // s_{n+1} = e·s_n + t(x + nα)·ē^n, with e^n re-evaluated from its angle
    let mut s = Complex64::default();
    let (mut off, mut corner) = (Complex64::default(), 0.0f64);
    for n in 0..(2 * k - 1) {
        let t = t_hat * Complex64::from_polar(1.0, 2.0 * PI * r as f64 * cf.orbit(x, n as i64));
        s = e * s + t * unit(n).conj();
        let m = n + 1;
        if m % 2 == 1 {
            off += unit(m).conj() * s;
            corner += s.norm_sqr();
        }
    }
    let kf = k as f64;
    let matrix = [[Complex64::new(kf, 0.0), off], [off.conj(), Complex64::new(kf + corner, 0.0)]];
    let (norm, lower) = hermitian_eigen2(&matrix);
    let d = {
        let f = cf.orbit(2.0 * theta, -r);
        f.min(1.0 - f)
    };
    let resonance = if d > 0.0 { (kf * kf).min(d.powi(-2)) } else { kf * kf };
    Ok(ModelX {
        k,
        matrix,
        norm,
        lower,
        offset: d,
        norm_shape: norm / (kf * (1.0 + t_hat.norm_sqr() * resonance)),
        lower_shape: lower / kf,
    })
}

/// θ = 0, r = 0, t̂ = 1: X = [[k, k²], [k², k + k(4k²−1)/3]].
pub fn model_x_closed_form(k: usize) -> C2 {
    let k = k as f64;
    let c = |v: f64| Complex64::new(v, 0.0);
    [[c(k), c(k * k)], [c(k * k), c(k + k * (4.0 * k * k - 1.0) / 3.0)]]
}

/// Least-squares slope of ln‖X‖ against ln k.
pub fn growth_exponent(samples: &[ModelX]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| ((s.k as f64).ln(), s.norm.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::FrequencySpec;

    fn golden() -> CfExpansion {
        CfExpansion::new(&FrequencySpec::golden(), 40).unwrap()
    }

    #[test]
    fn zero_corner_gives_multiple_of_identity() {
        let cf = golden();
        for &(theta, k) in &[(0.1, 1usize), (0.37, 17), (0.9, 400)] {
            let m = model_x(theta, 3, Complex64::default(), &cf, k, 0.2).unwrap();
            let kf = k as f64;
            assert_eq!(m.matrix[0][0], Complex64::new(kf, 0.0));
            assert_eq!(m.matrix[1][1], Complex64::new(kf, 0.0));
            assert_eq!(m.matrix[0][1], Complex64::default());
            assert_eq!((m.norm, m.lower), (kf, kf));
        }
    }

    #[test]
    fn parabolic_case_closed_form() {
        let cf = golden();
        let mut samples = Vec::new();
        for k in [1usize, 2, 5, 40, 300] {
            let m = model_x(0.0, 0, Complex64::new(1.0, 0.0), &cf, k, 0.0).unwrap();
            let want = model_x_closed_form(k);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m.matrix[i][j] - want[i][j]).norm() <= 1e-12 * want[i][j].norm().max(1.0));
                }
            }
            samples.push(m);
        }
        let g = growth_exponent(&samples[2..]).unwrap();
        assert!((g - 3.0).abs() < 0.05, "{g}");
    }

    #[test]
    fn lower_shape_is_of_order_k() {
        let cf = golden();
        for theta in [0.05, 0.21, 0.33] {
            for t in [0.1, 1.0, 5.0] {
                let m = model_x(theta, 1, Complex64::new(t, 0.3), &cf, 500, 0.0).unwrap();
                assert!(m.lower_shape > 0.1 && m.lower_shape < 10.0, "θ={theta} t={t}: {}", m.lower_shape);
                assert!(m.norm_shape > 0.01 && m.norm_shape < 100.0);
            }
        }
    }

    #[test]
    fn phase_only_rotates_the_corner() {
        let cf = golden();
        let a = model_x(0.13, 2, Complex64::new(0.8, 0.0), &cf, 100, 0.0).unwrap();
        let b = model_x(0.13, 2, Complex64::new(0.8, 0.0), &cf, 100, 0.37).unwrap();
        assert!((a.norm - b.norm).abs() < 1e-9 * a.norm);
        assert!((a.lower - b.lower).abs() < 1e-9 * a.lower);
    }
}
