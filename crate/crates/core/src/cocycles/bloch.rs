use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{OperatorConfig, Window, WindowVector};

#[derive(Clone, Debug)]
pub struct BlochLift {
    pub theta: f64,
    pub energy: f64,
    pub lift: Window,
    /// u^I coefficients
    pub u_hat: BTreeMap<i64, Complex64>,
    /// ĝ_k from the truncated side (sum over I)
    pub g_inside: BTreeMap<i64, Complex64>,
    /// ĝ_k recovered from the complement of I, on the data window only
    pub g_outside: BTreeMap<i64, Complex64>,
    /// max over the data window of |ĝ_inside − ĝ_outside|, relative to ‖û‖∞(|E| + 2 + |λ| sup|v|)
    pub agreement: f64,
    /// sup of |g| over the strip grid
    pub defect_sup: f64,
    /// max over the strip grid of |AU − e^{2πiθ}U(x+α) − e^{2πiθ}(g, 0)|, same relative scale
    pub direct_residual: f64,
}

fn fourier(c: &BTreeMap<i64, Complex64>, x: Complex64) -> Complex64 {
    c.iter().map(|(&k, &a)| a * (Complex64::new(0.0, 2.0 * PI * k as f64) * x).exp()).sum()
}

/// Lift of a dual vector û (given on its data window) restricted to I, with the
/// defect g computed from both halves of the dual eigen-equation.
pub fn bloch_lift(
    cfg: &OperatorConfig,
    theta: f64,
    energy: f64,
    u: &WindowVector,
    lift: Window,
    eta: f64,
    strip_points: usize,
    phases: usize,
) -> Result<BlochLift> {
    let data = u.window;
    if lift.x1 < data.x1 || lift.x2 > data.x2 {
        return Err(Error::WindowTooSmall(format!("lift window {lift:?} leaves the data window {data:?}")));
    }
    let v = &cfg.potential;
    if eta >= v.rho() {
        return Err(Error::StripExceeded { im: eta, rho: v.rho() });
    }
    let kv = v.degree() as i64;
    let lam = cfg.lambda;
    let cf = &cfg.frequency;
    let diag = |k: i64| energy - 2.0 * (2.0 * PI * cf.orbit(theta, k)).cos();
    let uk = |k: i64| u.get(k).unwrap_or_default();
    let in_i = |k: i64| lift.contains(k);

    let half = |k: i64, inside: bool| -> Complex64 {
        let mut s = if in_i(k) == inside { uk(k) * diag(k) } else { Complex64::default() };
        for j in -kv..=kv {
            if in_i(k - j) == inside {
                s -= lam * v.coefficient(j) * uk(k - j);
            }
        }
        s
    };
    let g_inside: BTreeMap<i64, Complex64> = (lift.x1 - kv..=lift.x2 + kv).map(|k| (k, half(k, true))).collect();
    let g_outside: BTreeMap<i64, Complex64> = data.sites().map(|k| (k, -half(k, false))).collect();

    let umax = u.values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let scale = umax * (energy.abs() + 2.0 + lam.abs() * v.sup_bound());
    let agreement = data
        .sites()
        .map(|k| (g_inside.get(&k).copied().unwrap_or_default() - g_outside[&k]).norm())
        .fold(0.0, f64::max)
        / scale;

    let u_hat: BTreeMap<i64, Complex64> = lift.sites().map(|k| (k, uk(k))).collect();
    let e = Complex64::from_polar(1.0, 2.0 * PI * theta);
    let alpha = cfg.alpha();
    let m = strip_points.max(1) as i64;
    let (mut defect_sup, mut direct) = (0.0f64, 0.0f64);
    for j in -(m - 1)..m {
        let eps = eta * j as f64 / m as f64;
        for p in 0..phases.max(1) {
            let x = Complex64::new(p as f64 / phases.max(1) as f64, eps);
            let g = fourier(&g_inside, x);
            defect_sup = defect_sup.max(g.norm());
            let ux = fourier(&u_hat, x);
            let (u_prev, u_next) = (fourier(&u_hat, x - alpha), fourier(&u_hat, x + alpha));
            // U(x) = (e u(x), u(x−α)), U(x+α) = (e u(x+α), u(x))
            let top = (energy - lam * v.eval(x)?) * e * ux - u_prev;
            // the second component holds identically
            direct = direct.max((top - e * e * u_next - e * g).norm());
        }
    }
    Ok(BlochLift {
        theta,
        energy,
        lift,
        u_hat,
        g_inside,
        g_outside,
        agreement,
        defect_sup,
        direct_residual: direct / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::operators::{block_eigen, truncate, BlockKind, Potential};

    fn cfg(lambda: f64) -> OperatorConfig {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        OperatorConfig::new(lambda, cf, 0.0, Potential::almost_mathieu())
    }

    #[test]
    fn single_mode_at_zero_coupling() {
        let c = cfg(0.0);
        let w = Window::new(-3, 3).unwrap();
        let mut vals = vec![Complex64::default(); 7];
        vals[3] = Complex64::new(1.0, 0.0);
        let u = WindowVector::new(w, vals).unwrap();
        let theta = 0.17;
        let e = 0.4;
        let b = bloch_lift(&c, theta, e, &u, Window::new(0, 0).unwrap(), 0.1, 2, 8).unwrap();
        // ĝ has only the diagonal term at k = 0 when λ = 0
        let d0 = e - 2.0 * (2.0 * PI * theta).cos();
        assert!((b.g_inside[&0] - Complex64::new(d0, 0.0)).norm() < 1e-15);
        assert!(b.g_inside.iter().filter(|(&k, _)| k != 0).all(|(_, z)| z.norm() == 0.0));
        assert!(b.direct_residual < 1e-14);
    }

    #[test]
    fn eigenvector_defect_shrinks_with_the_window() {
        let c = cfg(0.2);
        let theta = 0.29;
        let w = Window::centered(120);
        let blk = truncate(&c.with_phase(theta), &w, BlockKind::Dual).unwrap();
        let (vals, vecs) = block_eigen(&blk);
        let i0 = w.index(0).unwrap();
        let j = (0..w.len()).max_by(|&a, &b| vecs[(i0, a)].norm().total_cmp(&vecs[(i0, b)].norm())).unwrap();
        let u = WindowVector::new(w, vecs.column(j).iter().copied().collect()).unwrap();
        let mut prev = f64::INFINITY;
        for n in [4i64, 8, 16] {
            let b = bloch_lift(&c, theta, vals[j], &u, Window::centered(n), 0.02, 2, 32).unwrap();
            assert!(b.agreement < 1e-9, "{}", b.agreement);
            assert!(b.direct_residual < 1e-12);
            assert!(b.defect_sup < prev);
            prev = b.defect_sup;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn strip_is_checked() {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        let v = Potential::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], 0.1).unwrap();
        let c = OperatorConfig::new(0.2, cf, 0.0, v);
        let u = WindowVector::new(Window::new(0, 1).unwrap(), vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!(matches!(bloch_lift(&c, 0.1, 0.0, &u, Window::new(0, 1).unwrap(), 0.2, 2, 4), Err(Error::StripExceeded { .. })));
    }
}
