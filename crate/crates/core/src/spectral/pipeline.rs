use num_complex::Complex64;

use super::weyl::{psi, weyl_m_plus};
use crate::cocycles::{pk_sequence, Cocycle, PkSequence};
use crate::error::Result;
use crate::operators::OperatorConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineRow {
    pub k: usize,
    pub eps: f64,
    /// ψ(m⁺(E + iε_k))
    pub psi: f64,
    /// 2ε_k‖P_(k)‖
    pub two_eps_norm: f64,
    /// ψ / (2ε_k‖P_(k)‖)
    pub ratio: f64,
    /// ψ·ε_k^{1/2}
    pub holder_stat: f64,
    /// ‖P_(k)‖·‖P_(k)^{−1}‖³
    pub norm_cube_ratio: f64,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PkPipeline {
    pub sequence: PkSequence,
    pub rows: Vec<PipelineRow>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub holder_stat_max: f64,
    /// min over k of ε_{k+1}/ε_k
    pub eps_ratio_min: f64,
}

/// Scale ladder ε_k from P_(k) at phase x, and the Weyl-function statistics on it.
pub fn pk_epsilon_pipeline(cfg: &OperatorConfig, x: f64, energy: f64, k_max: usize, tol: f64) -> Result<PkPipeline> {
    let at_x = cfg.with_phase(x);
    let seq = pk_sequence(&Cocycle::schrodinger(&at_x, energy), x, k_max)?;
    let mut rows = Vec::with_capacity(seq.entries.len());
    for e in &seq.entries {
        let w = weyl_m_plus(&at_x, Complex64::new(energy, e.eps), tol)?;
        let p = psi(w.m)?;
        let two = 2.0 * e.eps * e.norm;
        rows.push(PipelineRow {
            k: e.k,
            eps: e.eps,
            psi: p,
            two_eps_norm: two,
            ratio: p / two,
            holder_stat: p * e.eps.sqrt(),
            norm_cube_ratio: e.norm * e.inv_norm.powi(3),
            depth: w.depth,
        });
    }
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let holder_stat_max = rows.iter().map(|r| r.holder_stat).fold(0.0, f64::max);
    let eps_ratio_min = rows.windows(2).map(|w| w[1].eps / w[0].eps).fold(f64::INFINITY, f64::min);
    Ok(PkPipeline { sequence: seq, rows, ratio_min, ratio_max, holder_stat_max, eps_ratio_min })
}
