use num_complex::Complex64;

use super::cocycle::{Cocycle, Generator};
use crate::error::{Error, Result};
use crate::linalg::mat2::{adjoint2, hermitian_eigen2, mul2};
use crate::linalg::Mat2C;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PkEntry {
    pub k: usize,
    /// ‖P_(k)‖
    pub norm: f64,
    /// ‖P_(k)^{−1}‖
    pub inv_norm: f64,
    pub log_det: f64,
    pub trace: f64,
    /// ε_k = 1/(2√det P_(k))
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PkChecks {
    pub positive_definite: bool,
    pub norm_monotone: bool,
    pub det_monotone: bool,
    pub det_over_norm_monotone: bool,
    pub trace_bound: bool,
    pub eps_decreasing: bool,
}

impl PkChecks {
    pub fn all(&self) -> bool {
        self.positive_definite
            && self.norm_monotone
            && self.det_monotone
            && self.det_over_norm_monotone
            && self.trace_bound
            && self.eps_decreasing
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PkSequence {
    pub x: f64,
    pub energy: f64,
    pub entries: Vec<PkEntry>,
    pub checks: PkChecks,
    /// set once the accumulation had to move to a rescaled representation
    pub escalated: bool,
}

const RESCALE_AT: f64 = 1e100;

/// P_(k) = Σ_{j≤k} A*_{2j−1}(x+α) A_{2j−1}(x+α), accumulated incrementally.
pub fn pk_sequence(c: &Cocycle, x: f64, k_max: usize) -> Result<PkSequence> {
    let energy = match &c.generator {
        Generator::Schrodinger { energy, .. } => energy.re,
        _ => return Err(Error::InvalidArgument("P_(k) needs a Schrödinger generator".into())),
    };
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let y = c.shift(Complex64::new(x, 0.0), 1);
    let step = |m: &mut Mat2C, j: i64| -> Result<()> {
        m.left_mul(&c.eval(c.shift(y, j))?);
        Ok(())
    };
    // P = e^{σ}·[[p, q], [q̄, r]], det P = e^{2σ}·d
    let (mut p, mut q, mut r, mut d, mut sigma) = (0.0f64, Complex64::default(), 0.0f64, 0.0f64, 0.0f64);
    let mut a = Mat2C::identity();
    let mut n = 0i64;
    let mut entries = Vec::with_capacity(k_max);
    let mut checks = PkChecks { positive_definite: true, trace_bound: true, ..Default::default() };
    let mut escalated = false;
    for k in 1..=k_max {
        let target = (2 * k - 1) as i64;
        while n < target {
            step(&mut a, n)?;
            n += 1;
        }
        let m = mul2(&adjoint2(&a.entries), &a.entries);
        let f = (2.0 * a.log_scale - sigma).exp();
        let (m11, m12, m22) = (m[0][0].re * f, m[0][1] * f, m[1][1].re * f);
        // Cauchy–Binet: det(P + M) = det P + det M + tr(adj(P) M)
        // det A_n = 1 for Schrödinger generators; reading it off the entries would cancel
        let det_m = (-2.0 * sigma).exp();
        d += det_m + r * m11 + p * m22 - 2.0 * (q * m12.conj()).re;
        p += m11;
        r += m22;
        q += m12;
        if p.max(r) > RESCALE_AT {
            let s = p.max(r);
            p /= s;
            r /= s;
            q /= s;
            d /= s * s;
            sigma += s.ln();
            escalated = true;
        }
        let herm = [[Complex64::new(p, 0.0), q], [q.conj(), Complex64::new(r, 0.0)]];
        let (lmax, _) = hermitian_eigen2(&herm);
        let lmin = d / lmax;
        if !(d > 0.0 && lmin > 0.0) {
            checks.positive_definite = false;
        }
        let log_det = 2.0 * sigma + d.ln();
        let trace = (p + r) * sigma.exp();
        if trace < 2.0 * k as f64 {
            checks.trace_bound = false;
        }
        entries.push(PkEntry {
            k,
            norm: lmax * sigma.exp(),
            inv_norm: 1.0 / (lmin * sigma.exp()),
            log_det,
            trace,
            eps: 0.5 * (-0.5 * log_det).exp(),
        });
    }
    let mono = |f: &dyn Fn(&PkEntry) -> f64| entries.windows(2).all(|w| f(&w[1]) >= f(&w[0]));
    checks.norm_monotone = mono(&|e| e.norm);
    checks.det_monotone = mono(&|e| e.log_det);
    checks.det_over_norm_monotone = mono(&|e| e.log_det - e.norm.ln());
    checks.eps_decreasing = entries.windows(2).all(|w| w[1].eps < w[0].eps);
    Ok(PkSequence { x, energy, entries, checks, escalated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfExpansion, FrequencySpec};
    use crate::operators::{OperatorConfig, Potential};

    fn amo(lambda: f64, e: f64) -> Cocycle {
        let cf = CfExpansion::new(&FrequencySpec::golden(), 40).unwrap();
        Cocycle::schrodinger(&OperatorConfig::new(lambda, cf, 0.0, Potential::almost_mathieu()), e)
    }

    #[test]
    fn rotation_algebra() {
        let s = pk_sequence(&amo(0.0, 0.0), 0.3, 50).unwrap();
        for e in &s.entries {
            let k = e.k as f64;
            assert_eq!(e.norm, k);
            assert_eq!(e.trace, 2.0 * k);
            assert!((e.log_det - 2.0 * k.ln()).abs() < 1e-14);
            assert!((e.eps - 0.5 / k).abs() < 1e-15 / k);
            assert!((e.norm - 1.0 / e.inv_norm).abs() < 1e-12);
        }
        assert!(s.checks.all());
    }

    #[test]
    fn amo_tracks_are_monotone() {
        let cfg = OperatorConfig::new(0.2, CfExpansion::new(&FrequencySpec::golden(), 40).unwrap(), 0.0, Potential::almost_mathieu());
        for e in [-1.3, 0.1, 1.7] {
            let s = pk_sequence(&Cocycle::schrodinger(&cfg, e), 0.0, 300).unwrap();
            assert!(s.checks.all(), "E={e}: {:?}", s.checks);
        }
    }

    #[test]
    fn cauchy_binet_matches_direct_determinant() {
        let s = pk_sequence(&amo(0.7, 0.4), 0.2, 5).unwrap();
        let c = amo(0.7, 0.4);
        let y = c.shift(Complex64::new(0.2, 0.0), 1);
        let mut sum = [[Complex64::default(); 2]; 2];
        for j in 1..=5u64 {
            let a = super::super::cocycle::transfer(&c, y, 2 * j - 1).unwrap().product.to_c2();
            let m = mul2(&adjoint2(&a), &a);
            for i in 0..2 {
                for l in 0..2 {
                    sum[i][l] += m[i][l];
                }
            }
        }
        let det = (sum[0][0] * sum[1][1] - sum[0][1] * sum[1][0]).re;
        assert!((s.entries[4].log_det - det.ln()).abs() < 1e-10);
    }

    #[test]
    fn large_growth_escalates() {
        // off the spectrum P_(k) is numerically rank one; only the norm track is meaningful
        let s = pk_sequence(&amo(0.0, 40.0), 0.0, 40).unwrap();
        assert!(s.escalated);
        assert!(s.checks.norm_monotone && s.checks.trace_bound);
        assert!(s.entries.iter().all(|e| e.norm.is_finite()));
    }
}
