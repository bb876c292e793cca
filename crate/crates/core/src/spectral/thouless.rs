use crate::cocycles::{lyapunov_finite, Cocycle};
use crate::error::{Error, Result};
use crate::operators::OperatorConfig;

use super::ids::truncation_eigenvalues;

/// Eigenvalues closer than this to E make the log-potential meaningless.
pub const COLLISION_DISTANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThoulessResidual {
    pub energy: f64,
    pub n: usize,
    pub n_l: u64,
    /// L_{n_L}(E) from the transfer matrices
    pub lyapunov: f64,
    /// (1/N)Σ ln|E − E_i|, averaged over the phases
    pub log_potential: f64,
    pub residual: f64,
    pub closest_eigenvalue: f64,
}

/// |L_{n_L}(E) − ∫ln|E − E′|dN_N(E′)| with N_N the phase-averaged counting measure
/// of the truncation on [0, N−1]; `grid` phases j/grid for the Lyapunov mean.
pub fn thouless_residual(
    cfg: &OperatorConfig,
    energy: f64,
    n: usize,
    n_l: u64,
    phase_avg: usize,
    grid: usize,
) -> Result<ThoulessResidual> {
    if n == 0 || phase_avg == 0 {
        return Err(Error::InvalidArgument("need N >= 1 and at least one phase".into()));
    }
    let mut acc = 0.0;
    let mut closest = f64::INFINITY;
    for j in 0..phase_avg {
        let ev = truncation_eigenvalues(cfg, j as f64 / phase_avg as f64, n)?;
        for e in ev {
            let d = (energy - e).abs();
            closest = closest.min(d);
            acc += d.ln();
        }
    }
    if closest < COLLISION_DISTANCE {
        return Err(Error::AtomCollision { energy, distance: closest });
    }
    let log_potential = acc / (n * phase_avg) as f64;
    let lyapunov = lyapunov_finite(&Cocycle::schrodinger(cfg, energy), n_l, grid)?.l_n.value;
    Ok(ThoulessResidual {
        energy,
        n,
        n_l,
        lyapunov,
        log_potential,
        residual: (lyapunov - log_potential).abs(),
        closest_eigenvalue: closest,
    })
}
