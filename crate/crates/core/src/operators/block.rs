use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::potential::Potential;
use crate::diophantine::CfExpansion;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct OperatorConfig {
    pub lambda: f64,
    pub frequency: Arc<CfExpansion>,
    /// x for H, θ for the dual
    pub phase: f64,
    pub potential: Arc<Potential>,
}

impl OperatorConfig {
    pub fn new(lambda: f64, frequency: CfExpansion, phase: f64, potential: Potential) -> Self {
        OperatorConfig { lambda, frequency: Arc::new(frequency), phase, potential: Arc::new(potential) }
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        OperatorConfig { phase, ..self.clone() }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        OperatorConfig { lambda, ..self.clone() }
    }

    pub fn alpha(&self) -> f64 {
        self.frequency.alpha_f64()
    }

    /// frac(phase + nα)
    pub fn orbit(&self, n: i64) -> f64 {
        self.frequency.orbit(self.phase, n)
    }

    /// λ v(x + nα)
    pub fn site_potential(&self, n: i64) -> f64 {
        self.lambda * self.potential.eval_real(self.orbit(n))
    }

    pub(crate) fn check_window(&self, w: &Window) -> Result<()> {
        let lim = self.frequency.k_limit();
        let far = w.x1.unsigned_abs().max(w.x2.unsigned_abs());
        if far > lim as u64 {
            return Err(Error::DepthInsufficient { k: far.to_string(), q_depth: self.frequency.q_depth().to_string() });
        }
        Ok(())
    }
}

/// Integer interval [x1, x2], endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub x1: i64,
    pub x2: i64,
}

impl Window {
    pub fn new(x1: i64, x2: i64) -> Result<Self> {
        if x1 > x2 {
            return Err(Error::InvalidArgument(format!("window [{x1}, {x2}] is empty")));
        }
        Ok(Window { x1, x2 })
    }

    /// [−n, n]
    pub fn centered(n: i64) -> Self {
        Window { x1: -n, x2: n }
    }

    pub fn len(&self) -> usize {
        (self.x2 - self.x1 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.x1 <= x && x <= self.x2
    }

    /// Position of site x inside the window.
    pub fn index(&self, x: i64) -> Option<usize> {
        self.contains(x).then(|| (x - self.x1) as usize)
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.x1..=self.x2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Schrodinger,
    Dual,
    DualScaled,
}

impl BlockKind {
    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::Schrodinger => "schrodinger",
            BlockKind::Dual => "dual",
            BlockKind::DualScaled => "dual-scaled",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatrixBlock {
    pub kind: BlockKind,
    pub window: Window,
    pub matrix: DMatrix<Complex64>,
    pub config: OperatorConfig,
}

/// Diagonal of the Schrödinger truncation, λ v(x + nα) for n in the window.
pub fn schrodinger_diagonal(cfg: &OperatorConfig, w: &Window) -> Vec<f64> {
    w.sites().map(|n| cfg.site_potential(n)).collect()
}

/// 2cos 2π(θ + nα) for n in the window.
pub fn dual_cosines(cfg: &OperatorConfig, w: &Window) -> Vec<f64> {
    w.sites().map(|n| 2.0 * (2.0 * PI * cfg.orbit(n)).cos()).collect()
}

/// Real symmetric tridiagonal form (diagonal, off-diagonal) of the Schrödinger truncation.
pub fn schrodinger_tridiagonal(cfg: &OperatorConfig, w: &Window) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.check_window(w)?;
    Ok((schrodinger_diagonal(cfg, w), vec![1.0; w.len() - 1]))
}

/// Tridiagonal form of the unscaled dual when v has degree ≤ 1. A complex v̂_1 is
/// replaced by |v̂_1|, a diagonal unitary change that keeps eigenvalues and |φ|.
pub fn dual_tridiagonal(cfg: &OperatorConfig, w: &Window) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    cfg.check_window(w)?;
    let p = &cfg.potential;
    if p.degree() > 1 {
        return Ok(None);
    }
    let v0 = cfg.lambda * p.coefficient(0).re;
    let diag = dual_cosines(cfg, w).into_iter().map(|c| c + v0).collect();
    let b = cfg.lambda * p.coefficient(1).norm();
    Ok(Some((diag, vec![b; w.len() - 1])))
}

pub fn truncate(cfg: &OperatorConfig, w: &Window, kind: BlockKind) -> Result<MatrixBlock> {
    cfg.check_window(w)?;
    let n = w.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut m = DMatrix::from_element(n, n, zero);
    match kind {
        BlockKind::Schrodinger => {
            for (i, d) in schrodinger_diagonal(cfg, w).into_iter().enumerate() {
                m[(i, i)] = Complex64::new(d, 0.0);
                if i + 1 < n {
                    m[(i, i + 1)] = Complex64::new(1.0, 0.0);
                    m[(i + 1, i)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        BlockKind::Dual | BlockKind::DualScaled => {
            let scaled = kind == BlockKind::DualScaled;
            if scaled && cfg.lambda == 0.0 {
                return Err(Error::LambdaZero);
            }
            // dual: cos + λ v̂ ; scaled: cos/λ + v̂
            let (cos_factor, band_factor) = if scaled { (1.0 / cfg.lambda, 1.0) } else { (1.0, cfg.lambda) };
            let p = &cfg.potential;
            let kv = p.degree();
            for (i, cs) in dual_cosines(cfg, w).into_iter().enumerate() {
                m[(i, i)] = Complex64::new(cs * cos_factor + band_factor * p.coefficient(0).re, 0.0);
                for d in 1..=kv.min(n - 1 - i) {
                    // row i + d, column i carries v̂_d; the mirror is its conjugate
                    let z = p.coefficient(d as i64) * band_factor;
                    m[(i + d, i)] = z;
                    m[(i, i + d)] = z.conj();
                }
            }
        }
    }
    Ok(MatrixBlock { kind, window: *w, matrix: m, config: cfg.clone() })
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Condition numbers above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e13;

/// Resolvent (B − E)^{-1} of a block, with a 1-norm condition estimate.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    pub window: Window,
    pub inverse: DMatrix<Complex64>,
    pub condition: f64,
}

impl GreenFunction {
    pub fn new(b: &MatrixBlock, e: Complex64) -> Result<Self> {
        let n = b.window.len();
        let mut a = b.matrix.clone();
        for i in 0..n {
            a[(i, i)] -= e;
        }
        let a_norm = norm1(&a);
        let inv = a.clone().lu().try_inverse().ok_or(Error::SingularBlock { condition: f64::INFINITY })?;
        let condition = a_norm * norm1(&inv);
        if !condition.is_finite() || condition > SINGULAR_CONDITION {
            return Err(Error::SingularBlock { condition });
        }
        Ok(GreenFunction { window: b.window, inverse: inv, condition })
    }

    /// G(x, y) with window-global site labels.
    pub fn entry(&self, x: i64, y: i64) -> Result<Complex64> {
        let (i, j) = match (self.window.index(x), self.window.index(y)) {
            (Some(i), Some(j)) => (i, j),
            _ => return Err(Error::InvalidArgument(format!("({x}, {y}) outside {:?}", self.window))),
        };
        Ok(self.inverse[(i, j)])
    }
}

/// Single resolvent entry; returns the value and the condition estimate.
pub fn green(b: &MatrixBlock, e: Complex64, x: i64, y: i64) -> Result<(Complex64, f64)> {
    let g = GreenFunction::new(b, e)?;
    Ok((g.entry(x, y)?, g.condition))
}
