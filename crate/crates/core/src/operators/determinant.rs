use num_complex::Complex64;

use super::block::{truncate, BlockKind, OperatorConfig, Window};
use crate::error::{Error, Result};

/// A determinant as ln|det| and a unit-modulus phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
}

/// P_N(θ) = det((Ȟ_θ − E) restricted to [0, N−1]) by pivoted LU.
pub fn det_pn(cfg_dual: &OperatorConfig, theta: f64, energy: f64, n: usize) -> Result<LogDet> {
    if cfg_dual.lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let w = Window::new(0, n as i64 - 1)?;
    let mut a = truncate(&cfg_dual.with_phase(theta), &w, BlockKind::DualScaled)?.matrix;
    for i in 0..n {
        a[(i, i)] -= Complex64::new(energy, 0.0);
    }
    let lu = a.lu();
    let sign: f64 = lu.p().determinant();
    let u = lu.u();
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(sign, 0.0);
    for i in 0..n {
        let d = u[(i, i)];
        let r = d.norm();
        if r == 0.0 {
            return Ok(LogDet { log_abs: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) });
        }
        log_abs += r.ln();
        phase *= d / r;
    }
    Ok(LogDet { log_abs, phase })
}

/// θ ∈ A_{N,r}: evaluates P_N at θ − (N−1)α/2, where the cosine variable of
/// Q_N equals θ, and tests ln|P_N| ≤ (N+1)r.
pub fn membership_a(cfg_dual: &OperatorConfig, n: usize, r: f64, theta: f64, energy: f64) -> Result<bool> {
    let shift = 0.5 * (n as f64 - 1.0) * cfg_dual.alpha();
    let d = det_pn(cfg_dual, theta - shift, energy, n)?;
    Ok(d.log_abs <= (n as f64 + 1.0) * r)
}
