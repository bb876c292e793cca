use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::tridiag;
use crate::operators::{schrodinger_tridiagonal, OperatorConfig, Window};

pub const MAX_HALF_WIDTH: i64 = 5000;

/// Spectral measure of a finitely supported vector (or a sum of several) for
/// the Dirichlet truncation on [−N, N].
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureApprox {
    pub half_width: i64,
    pub vectors: Vec<Vec<(i64, Complex64)>>,
    /// (E_i, w_i), sorted by energy
    pub atoms: Vec<(f64, f64)>,
    pub total: f64,
}

/// Declared spectral resolution 4π/N of a truncation of half-width N.
pub fn resolution_floor(half_width: i64) -> f64 {
    4.0 * PI / half_width as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalMass {
    pub value: f64,
    pub below_resolution: bool,
}

impl MeasureApprox {
    pub fn resolution_floor(&self) -> f64 {
        resolution_floor(self.half_width)
    }

    /// Mass of [a, b).
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let lo = self.atoms.partition_point(|&(e, _)| e < a);
        let hi = self.atoms.partition_point(|&(e, _)| e < b);
        self.atoms[lo..hi.max(lo)].iter().map(|a| a.1).sum()
    }

    pub fn mass_below_or_at(&self, e: f64) -> f64 {
        let hi = self.atoms.partition_point(|&(x, _)| x <= e);
        self.atoms[..hi].iter().map(|a| a.1).sum()
    }
}

/// μ = Σ_f μ^f from one eigensolve tracking the rows of every support.
pub fn truncation_measure_sum(cfg: &OperatorConfig, fs: &[Vec<(i64, Complex64)>], n: i64) -> Result<MeasureApprox> {
    if n < 1 || n > MAX_HALF_WIDTH {
        return Err(Error::InvalidArgument(format!("N must lie in [1, {MAX_HALF_WIDTH}], got {n}")));
    }
    let mut sites: Vec<i64> = fs.iter().flatten().map(|&(k, _)| k).collect();
    sites.sort_unstable();
    sites.dedup();
    if let Some(&far) = sites.iter().max_by_key(|k| k.abs()) {
        if 2 * far.abs() > n {
            return Err(Error::SupportTooWide { n: far.unsigned_abs() as usize });
        }
    }
    let w = Window::centered(n);
    let (d, e) = schrodinger_tridiagonal(cfg, &w)?;
    let rows: Vec<usize> = sites.iter().map(|&k| w.index(k).expect("support inside window")).collect();
    let t = tridiag::eigen_tracked(&d, &e, &rows);
    let row_of = |k: i64| sites.binary_search(&k).unwrap();
    let atoms: Vec<(f64, f64)> = t
        .values
        .iter()
        .enumerate()
        .map(|(j, &ev)| {
            let wgt: f64 = fs
                .iter()
                .map(|f| f.iter().map(|&(k, a)| a.conj() * t.rows[row_of(k)][j]).sum::<Complex64>().norm_sqr())
                .sum();
            (ev, wgt)
        })
        .collect();
    let total = atoms.iter().map(|a| a.1).sum();
    Ok(MeasureApprox { half_width: n, vectors: fs.to_vec(), atoms, total })
}

pub fn truncation_measure(cfg: &OperatorConfig, f: &[(i64, Complex64)], n: i64) -> Result<MeasureApprox> {
    truncation_measure_sum(cfg, &[f.to_vec()], n)
}

/// μ_x = μ^{e_{−1}} + μ^{e_0}.
pub fn mu_x(cfg: &OperatorConfig, n: i64) -> Result<MeasureApprox> {
    let one = Complex64::new(1.0, 0.0);
    truncation_measure_sum(cfg, &[vec![(-1, one)], vec![(0, one)]], n)
}

/// μ[E − ε, E + ε), flagged when ε is below the resolution floor.
pub fn measure_interval(m: &MeasureApprox, e: f64, eps: f64) -> Result<IntervalMass> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    Ok(IntervalMass { value: m.mass(e - eps, e + eps), below_resolution: eps < m.resolution_floor() })
}
