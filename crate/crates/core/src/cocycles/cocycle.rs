use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::diophantine::CfExpansion;
use crate::error::{Error, Result};
use crate::linalg::mat2::{c, det2, inv2, max_abs2};
use crate::linalg::{Mat2C, C2};
use crate::operators::{OperatorConfig, Potential};

/// Matrix-valued map of the phase, used for conjugations.
pub type MatrixMap = Arc<dyn Fn(Complex64) -> C2 + Send + Sync>;

/// Finite Fourier series Σ c_k e^{2πikx}.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierSeries(pub Vec<(i64, Complex64)>);

impl FourierSeries {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().map(|&(k, a)| a * (Complex64::new(0.0, 2.0 * PI * k as f64) * x).exp()).sum()
    }
}

#[derive(Clone)]
pub enum Generator {
    /// S(x) = [[E − λv(x), −1], [1, 0]]
    Schrodinger { lambda: f64, energy: Complex64, potential: Arc<Potential> },
    /// entrywise Fourier tables, admissible for |Im x| < rho
    Fourier { entries: Box<[[FourierSeries; 2]; 2]>, rho: f64 },
    /// [[e^{2πiθ}, t̂e^{2πirx}], [0, e^{−2πiθ}]]
    ModelT { theta: f64, r: i64, t_hat: Complex64 },
    /// B(x+α)^{−1} A(x) B(x)
    Conjugated { inner: Box<Generator>, b: MatrixMap },
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Schrodinger { lambda, energy, .. } => write!(f, "Schrodinger(λ={lambda}, E={energy})"),
            Generator::Fourier { rho, .. } => write!(f, "Fourier(ρ={rho})"),
            Generator::ModelT { theta, r, t_hat } => write!(f, "ModelT(θ={theta}, r={r}, t̂={t_hat})"),
            Generator::Conjugated { inner, .. } => write!(f, "Conjugated({inner:?})"),
        }
    }
}

impl Generator {
    fn eval(&self, x: Complex64, alpha: f64) -> Result<C2> {
        match self {
            Generator::Schrodinger { lambda, energy, potential } => {
                let v = if x.im == 0.0 {
                    Complex64::new(potential.eval_real(x.re), 0.0)
                } else {
                    potential.eval(x)?
                };
                Ok([[energy - *lambda * v, c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
            }
            Generator::Fourier { entries, rho } => {
                if x.im.abs() >= *rho {
                    return Err(Error::StripExceeded { im: x.im.abs(), rho: *rho });
                }
                Ok([[entries[0][0].eval(x), entries[0][1].eval(x)], [entries[1][0].eval(x), entries[1][1].eval(x)]])
            }
            Generator::ModelT { theta, r, t_hat } => {
                let e = Complex64::from_polar(1.0, 2.0 * PI * theta);
                let t = t_hat * (Complex64::new(0.0, 2.0 * PI * *r as f64) * x).exp();
                Ok([[e, t], [c(0.0, 0.0), e.conj()]])
            }
            Generator::Conjugated { inner, b } => {
                let a = inner.eval(x, alpha)?;
                let b0 = b(x);
                let b1 = b(x + alpha);
                let sing = |m: &C2| det2(m).norm() <= 1e-12 * max_abs2(m).powi(2);
                if sing(&b0) || sing(&b1) {
                    return Err(Error::SingularConjugacy { x: format!("{x}") });
                }
                let b1i = inv2(&b1).ok_or_else(|| Error::SingularConjugacy { x: format!("{}", x + alpha) })?;
                Ok(crate::linalg::mat2::mul2(&crate::linalg::mat2::mul2(&b1i, &a), &b0))
            }
        }
    }
}

/// A generator over the rotation x ↦ x + α.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub frequency: Arc<CfExpansion>,
    pub generator: Generator,
}

impl Cocycle {
    pub fn new(frequency: Arc<CfExpansion>, generator: Generator) -> Self {
        Cocycle { frequency, generator }
    }

    /// The Schrödinger cocycle of `cfg` at energy E.
    pub fn schrodinger(cfg: &OperatorConfig, energy: f64) -> Self {
        Cocycle {
            frequency: cfg.frequency.clone(),
            generator: Generator::Schrodinger {
                lambda: cfg.lambda,
                energy: Complex64::new(energy, 0.0),
                potential: cfg.potential.clone(),
            },
        }
    }

    pub fn model_t(frequency: Arc<CfExpansion>, theta: f64, r: i64, t_hat: Complex64) -> Self {
        Cocycle { frequency, generator: Generator::ModelT { theta, r, t_hat } }
    }

    pub fn alpha(&self) -> f64 {
        self.frequency.alpha_f64()
    }

    /// x + nα with the real part reduced mod 1.
    pub fn shift(&self, x: Complex64, n: i64) -> Complex64 {
        Complex64::new(self.frequency.orbit(x.re, n), x.im)
    }

    pub fn eval(&self, x: Complex64) -> Result<C2> {
        self.generator.eval(x, self.alpha())
    }
}

/// Conjugated generator x ↦ B(x+α)^{−1}A(x)B(x), evaluated pointwise.
pub fn conjugate(c: &Cocycle, b: MatrixMap) -> Cocycle {
    Cocycle {
        frequency: c.frequency.clone(),
        generator: Generator::Conjugated { inner: Box::new(c.generator.clone()), b },
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferProduct {
    pub n: u64,
    pub x: Complex64,
    pub product: Mat2C,
    /// Σ ln|det A(x + jα)|, the determinant carried separately from the entries
    pub log_det: f64,
    pub renormalizations: u64,
}

impl TransferProduct {
    pub fn log_norm(&self) -> f64 {
        self.product.log_norm()
    }
}

/// A_n(x) = A(x+(n−1)α)⋯A(x), with snapshots at every n in `ns` (ascending).
pub fn transfer_ladder(c: &Cocycle, x: Complex64, ns: &[u64]) -> Result<Vec<TransferProduct>> {
    if ns.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("ladder must be ascending".into()));
    }
    let mut out = Vec::with_capacity(ns.len());
    let mut m = Mat2C::identity();
    let mut log_det = 0.0;
    let mut renorm = 0;
    let mut j = 0u64;
    for &n in ns {
        while j < n {
            let a = c.eval(c.shift(x, j as i64))?;
            log_det += det2(&a).norm().ln();
            let before = m.log_scale;
            m.left_mul(&a);
            if m.log_scale != before {
                renorm += 1;
            }
            j += 1;
        }
        out.push(TransferProduct { n, x, product: m, log_det, renormalizations: renorm });
    }
    Ok(out)
}

pub fn transfer(c: &Cocycle, x: Complex64, n: u64) -> Result<TransferProduct> {
    Ok(transfer_ladder(c, x, &[n])?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::FrequencySpec;
    use crate::linalg::mat2::{identity2, mul2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden() -> Arc<CfExpansion> {
        Arc::new(CfExpansion::new(&FrequencySpec::golden(), 40).unwrap())
    }

    fn amo(lambda: f64, e: f64) -> Cocycle {
        let cfg = OperatorConfig::new(lambda, (*golden()).clone(), 0.0, Potential::almost_mathieu());
        Cocycle::schrodinger(&cfg, e)
    }

    #[test]
    fn free_rotation_has_period_four() {
        let t = transfer(&amo(0.0, 0.0), c(0.3, 0.0), 4).unwrap();
        assert!(t.product.rel_diff(&Mat2C::identity()) < 1e-15);
        let t0 = transfer(&amo(0.7, 0.2), c(0.3, 0.0), 0).unwrap();
        assert_eq!(t0.product, Mat2C::identity());
        assert_eq!(t0.product.log_scale, 0.0);
    }

    #[test]
    fn cocycle_identity_on_random_triples() {
        let co = amo(0.8, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(1..300u64);
            let m = rng.gen_range(1..300u64);
            let x = c(rng.gen(), rng.gen_range(-0.05..0.05));
            let whole = transfer(&co, x, n + m).unwrap().product;
            let first = transfer(&co, x, m).unwrap().product;
            let second = transfer(&co, co.shift(x, m as i64), n).unwrap().product;
            assert!(whole.rel_diff(&second.mul(&first)) < 1e-8);
        }
    }

    #[test]
    fn determinant_track_is_exact_for_schrodinger() {
        let t = transfer(&amo(0.3, 0.5), c(0.1, 0.0), 10_000).unwrap();
        assert!(t.log_det.abs() < 1e-10);
        let bare = [[c(0.5 - 2.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        assert_eq!(det2(&bare), c(1.0, 0.0));
    }

    #[test]
    fn strip_and_conjugation_errors() {
        let f = Generator::Fourier {
            entries: Box::new([[FourierSeries(vec![(0, c(1.0, 0.0))]), FourierSeries::default()], [FourierSeries::default(), FourierSeries(vec![(0, c(1.0, 0.0))])]]),
            rho: 0.2,
        };
        let co = Cocycle::new(golden(), f);
        assert!(matches!(transfer(&co, c(0.0, 0.3), 3), Err(Error::StripExceeded { .. })));
        let zero: MatrixMap = Arc::new(|_| [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]]);
        let bad = conjugate(&amo(0.5, 0.0), zero);
        assert!(matches!(transfer(&bad, c(0.2, 0.0), 2), Err(Error::SingularConjugacy { .. })));
    }

    #[test]
    fn conjugation_by_identity_and_rotation() {
        let id: MatrixMap = Arc::new(|_| identity2());
        let base = amo(0.6, 0.3);
        let conj = conjugate(&base, id);
        let x = c(0.4, 0.0);
        let a = transfer(&base, x, 25).unwrap().product;
        let b = transfer(&conj, x, 25).unwrap().product;
        assert!(a.rel_diff(&b) < 1e-14);

        // constant rotations commute with a constant rotation generator
        let g = 0.37 * 2.0 * PI;
        let rot = |t: f64| [[c(t.cos(), 0.0), c(-t.sin(), 0.0)], [c(t.sin(), 0.0), c(t.cos(), 0.0)]];
        let r = rot(1.1);
        let gen = Generator::Fourier {
            entries: Box::new([
                [FourierSeries(vec![(0, r[0][0])]), FourierSeries(vec![(0, r[0][1])])],
                [FourierSeries(vec![(0, r[1][0])]), FourierSeries(vec![(0, r[1][1])])],
            ]),
            rho: f64::INFINITY,
        };
        let co = Cocycle::new(golden(), gen);
        let rc = conjugate(&co, Arc::new(move |_| rot(g)));
        let m1 = rc.eval(x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m1[i][j] - r[i][j]).norm() < 1e-15);
            }
        }
        assert!((mul2(&r, &rot(-1.1))[0][0] - c(1.0, 0.0)).norm() < 1e-15);
    }
}
