use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::block::Window;
use crate::error::{Error, Result};

const DEGENERATE_GAP: f64 = 1e-12;

/// ln max_i Π_{j≠i} |x − c_j|/|c_i − c_j|
fn log_lagrange_max(c: &[f64], x: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (i, &ci) in c.iter().enumerate() {
        let mut s = 0.0;
        for (j, &cj) in c.iter().enumerate() {
            if j != i {
                s += (x - cj).abs().ln() - (ci - cj).abs().ln();
            }
        }
        best = best.max(s);
    }
    best
}

fn golden_max(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = log_lagrange_max(c, x1);
    let mut f2 = log_lagrange_max(c, x2);
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = log_lagrange_max(c, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = log_lagrange_max(c, x1);
        }
    }
    f1.max(f2)
}

/// Smallest ξ for which {θ_j} is ξ-uniform, estimated on an M-point grid of
/// [−1, 1] with golden-section refinement around the best grid point.
pub fn uniformity_xi(thetas: &[f64], grid: usize) -> Result<f64> {
    if thetas.len() < 2 {
        return Err(Error::InvalidArgument("need at least two phases".into()));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid must contain at least the two endpoints".into()));
    }
    let c: Vec<f64> = thetas.iter().map(|t| (2.0 * PI * t).cos()).collect();
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if (c[i] - c[j]).abs() <= DEGENERATE_GAP {
                return Err(Error::Degenerate(i, j));
            }
        }
    }
    let k = (c.len() - 1) as f64;
    let h = 2.0 / (grid - 1) as f64;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for g in 0..grid {
        let x = if g + 1 == grid { 1.0 } else { -1.0 + g as f64 * h };
        let f = log_lagrange_max(&c, x);
        if f > best.0 {
            best = (f, g);
        }
    }
    let xg = -1.0 + best.1 as f64 * h;
    let refined = golden_max(&c, (xg - h).max(-1.0), (xg + h).min(1.0));
    Ok(best.0.max(refined) / k)
}

/// The two windows built around a resonance; together they hold 6sq_n sites.
pub fn resonant_intervals(k: i64, n_j: i64, q_n: &BigInt, s: i64) -> Result<(Window, Window)> {
    let sq = (BigInt::from(s) * q_n).to_i64();
    let bad = |sq: String| Error::SelectionViolated { s, sq, k };
    if s < 1 {
        return Err(bad((BigInt::from(s) * q_n).to_string()));
    }
    let sq = sq.ok_or_else(|| bad((BigInt::from(s) * q_n).to_string()))?;
    if sq < 1 || 8 * sq > k {
        return Err(bad(sq.to_string()));
    }
    let i1 = if n_j < 0 { Window::new(-2 * sq + 1, 0)? } else { Window::new(0, 2 * sq - 1)? };
    let i2 = Window::new(k - 2 * sq + 1, k + 2 * sq)?;
    Ok((i1, i2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_cases() {
        let xi = uniformity_xi(&[0.0, 0.25], 101).unwrap();
        assert!((xi - 2f64.ln()).abs() < 1e-12);
        let anti = uniformity_xi(&[0.0, 0.5], 101).unwrap();
        assert!(anti.abs() < 1e-12);
        assert!(matches!(uniformity_xi(&[0.1, 0.9], 11), Err(Error::Degenerate(0, 1))));
    }

    fn chebyshev(k: usize) -> Vec<f64> {
        (0..=k).map(|j| (2 * j + 1) as f64 / (4.0 * (k + 1) as f64)).collect()
    }

    #[test]
    fn chebyshev_nodes_beat_the_lebesgue_bound() {
        let mut prev = f64::INFINITY;
        for k in [4usize, 8, 16, 32] {
            let xi = uniformity_xi(&chebyshev(k), 4001).unwrap();
            // each Lagrange basis polynomial is bounded by the Lebesgue constant
            let lebesgue = 2.0 / PI * ((k + 1) as f64).ln() + 1.0;
            assert!(xi <= lebesgue.ln() / k as f64 + 1e-12, "k={k}");
            assert!(xi < prev);
            prev = xi;
        }
    }

    #[test]
    fn permutation_and_reflection_invariance() {
        let t = [0.03, 0.17, 0.29, 0.41];
        let a = uniformity_xi(&t, 2001).unwrap();
        let b = uniformity_xi(&[0.29, 0.03, 0.41, 0.17], 2001).unwrap();
        let c = uniformity_xi(&[-0.03, -0.17, -0.29, -0.41], 2001).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn interval_shapes() {
        let q = BigInt::from(5);
        let (i1, i2) = resonant_intervals(100, -3, &q, 2).unwrap();
        assert_eq!((i1.x1, i1.x2), (-19, 0));
        assert_eq!((i2.x1, i2.x2), (81, 120));
        assert_eq!(i1.len() + i2.len(), 60);
        let (j1, _) = resonant_intervals(100, 4, &q, 2).unwrap();
        assert_eq!((j1.x1, j1.x2), (0, 19));
        assert!(matches!(resonant_intervals(100, 1, &q, 3), Err(Error::SelectionViolated { .. })));
        assert!(matches!(resonant_intervals(100, 1, &q, 0), Err(Error::SelectionViolated { .. })));
    }
}
