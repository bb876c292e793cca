use std::f64::consts::PI;

use num_complex::Complex64;

use super::measure::MeasureApprox;
use crate::error::{Error, Result};
use crate::operators::OperatorConfig;

pub const MAX_DEPTH: usize = 1_000_000;
const START_DEPTH: usize = 64;

/// Root of m² + zm + 1 = 0 with |m| < 1, i.e. m⁺ of the free half-line.
pub fn free_m_plus(z: Complex64) -> Complex64 {
    let s = (z * z - 4.0).sqrt();
    let a = (-z + s) / 2.0;
    let b = (-z - s) / 2.0;
    if a.norm() < b.norm() {
        a
    } else {
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylValue {
    pub m: Complex64,
    /// depth of the converged evaluation
    pub depth: usize,
    /// |m(depth) − m(depth/2)|
    pub delta: f64,
}

fn recursion(cfg: &OperatorConfig, z: Complex64, depth: usize) -> Complex64 {
    // m_n = 1/(V_n − z − m_{n+1}), seeded by the free value beyond the depth
    let mut m = free_m_plus(z);
    for n in (1..=depth).rev() {
        m = 1.0 / (cfg.site_potential(n as i64) - z - m);
    }
    m
}

/// m⁺(z) = −u₁⁺/u₀⁺ from the backward recursion, doubling the depth until two
/// consecutive values agree to `tol`.
pub fn weyl_m_plus(cfg: &OperatorConfig, z: Complex64, tol: f64) -> Result<WeylValue> {
    if !(z.im > 0.0) {
        return Err(Error::BoundaryInput { im: z.im });
    }
    let mut depth = START_DEPTH;
    let mut prev = recursion(cfg, z, depth);
    loop {
        let next_depth = depth * 2;
        if next_depth > MAX_DEPTH {
            return Err(Error::NoConvergence { depth, delta: f64::NAN });
        }
        let cur = recursion(cfg, z, next_depth);
        let delta = (cur - prev).norm();
        depth = next_depth;
        if delta < tol {
            return Ok(WeylValue { m: cur, depth, delta });
        }
        if depth * 2 > MAX_DEPTH {
            return Err(Error::NoConvergence { depth, delta });
        }
        prev = cur;
    }
}

/// M(z) = Σ w_i/(E_i − z).
pub fn herglotz_m(m: &MeasureApprox, z: Complex64) -> Complex64 {
    m.atoms.iter().map(|&(e, w)| w / (e - z)).sum()
}

/// ψ(z) = sup_γ |R_γ·z| in closed form (1 + u)/(1 − u), u = |z − i|/|z + i|.
pub fn psi(z: Complex64) -> Result<f64> {
    if !(z.im > 0.0) {
        return Err(Error::BoundaryInput { im: z.im });
    }
    let i = Complex64::new(0.0, 1.0);
    let u = (z - i).norm() / (z + i).norm();
    Ok((1.0 + u) / (1.0 - u))
}

/// R_γ·z for the rotation by angle 2πγ.
pub fn rotate(gamma: f64, z: Complex64) -> Complex64 {
    let (s, c) = (2.0 * PI * gamma).sin_cos();
    (c * z - s) / (s * z + c)
}

/// max over γ = j/points of |R_γ·z|, refined by golden section around the best point.
pub fn psi_grid(z: Complex64, points: usize) -> f64 {
    let f = |g: f64| rotate(g, z).norm();
    let mut best = (0usize, f(0.0));
    for j in 1..points {
        let v = f(j as f64 / points as f64);
        if v > best.1 {
            best = (j, v);
        }
    }
    let h = 1.0 / points as f64;
    let (mut a, mut b) = (best.0 as f64 * h - h, best.0 as f64 * h + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    best.1.max(f(0.5 * (a + b)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HerglotzSample {
    pub z: Complex64,
    pub big_m: Complex64,
    pub m_plus: Complex64,
    pub psi: f64,
    pub depth: usize,
}

pub fn herglotz_sample(cfg: &OperatorConfig, mu: &MeasureApprox, z: Complex64, tol: f64) -> Result<HerglotzSample> {
    let w = weyl_m_plus(cfg, z, tol)?;
    Ok(HerglotzSample { z, big_m: herglotz_m(mu, z), m_plus: w.m, psi: psi(w.m)?, depth: w.depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::operators::{truncate, BlockKind, Potential, Window};
    use crate::spectral::measure::mu_x;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(lambda: f64, x: f64) -> OperatorConfig {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        OperatorConfig::new(lambda, cf, x, Potential::almost_mathieu())
    }

    #[test]
    fn free_value_at_2i() {
        let w = weyl_m_plus(&cfg(0.0, 0.0), Complex64::new(0.0, 2.0), 1e-14).unwrap();
        assert!((w.m - Complex64::new(0.0, 2f64.sqrt() - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn herglotz_positivity() {
        let c = cfg(0.6, 0.21);
        for re in [-3.0, -1.0, 0.0, 0.4, 2.2] {
            for im in [0.05, 0.5, 3.0] {
                let m = weyl_m_plus(&c, Complex64::new(re, im), 1e-12).unwrap().m;
                assert!(m.im > 0.0);
            }
        }
        assert!(matches!(weyl_m_plus(&c, Complex64::new(0.0, 0.0), 1e-8), Err(Error::BoundaryInput { .. })));
    }

    #[test]
    fn matches_half_line_resolvent() {
        let c = cfg(0.7, 0.33);
        let z = Complex64::new(0.3, 0.1);
        let w = Window::new(1, 600).unwrap();
        let b = truncate(&c, &w, BlockKind::Schrodinger).unwrap();
        let mut a = b.matrix.clone();
        for i in 0..w.len() {
            a[(i, i)] -= z;
        }
        let inv = a.try_inverse().unwrap();
        // with u_0 = 1 the decaying solution solves (H − z)u = −e₁ on [1, L], so m⁺ = −u₁ = G(1, 1)
        let want = inv[(0, 0)];
        let got = weyl_m_plus(&c, z, 1e-13).unwrap().m;
        assert!((got - want).norm() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn psi_values_and_invariance() {
        assert!((psi(Complex64::new(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((psi(Complex64::new(0.0, 2.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((psi_grid(Complex64::new(0.0, 2.0), 10_000) - 2.0).abs() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
            let p = psi(z).unwrap();
            assert!((psi_grid(z, 10_000) - p).abs() < 1e-6 * p);
            let g: f64 = rng.gen();
            assert!((psi(rotate(g, z)).unwrap() - p).abs() < 1e-9 * p);
        }
        assert!(psi(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn single_atom_and_lemma_inequalities() {
        let one = MeasureApprox { half_width: 10, vectors: vec![], atoms: vec![(0.3, 0.5)], total: 0.5 };
        let z = Complex64::new(0.1, 0.2);
        assert!((herglotz_m(&one, z) - 0.5 / (Complex64::new(0.3, 0.0) - z)).norm() < 1e-15);

        let c = cfg(0.3, 0.0);
        let mu = mu_x(&c, 1500).unwrap();
        for (re, eps) in [(0.0, 0.05), (1.1, 0.02), (-1.7, 0.1), (2.5, 0.05)] {
            let z = Complex64::new(re, eps);
            let s = herglotz_sample(&c, &mu, z, 1e-12).unwrap();
            assert!(s.big_m.im >= mu.mass(re - eps, re + eps) / (2.0 * eps));
            assert!(s.big_m.norm() <= s.psi * (1.0 + 1e-6), "{} > {}", s.big_m.norm(), s.psi);
        }
    }
}
