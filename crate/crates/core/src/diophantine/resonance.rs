//! ε₀-resonances of a phase and the small-divisor tables around them.

use num_bigint::BigInt;

use super::cf::{beta_estimate, CfExpansion};
use super::ext::ExtReal;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Resonance {
    pub k: i64,
    /// ‖2θ − kα‖
    pub gap: ExtReal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceSequence {
    pub theta: ExtReal,
    pub eps0: f64,
    pub k_max: i64,
    /// n_0 = 0 first, then by |k|; at equal |k| the positive one leads.
    pub entries: Vec<Resonance>,
}

impl ResonanceSequence {
    pub fn ks(&self) -> Vec<i64> {
        self.entries.iter().map(|r| r.k).collect()
    }
}

fn check_range(cf: &CfExpansion, k: i64) -> Result<()> {
    if k > cf.k_limit() {
        return Err(Error::DepthInsufficient { k: k.to_string(), q_depth: cf.q_depth().to_string() });
    }
    Ok(())
}

/// Phase θ as an extended real at the expansion's working precision.
pub fn phase_ext(cf: &CfExpansion, theta: f64) -> ExtReal {
    ExtReal::from_f64(theta, cf.working_bits())
}

/// All k with |k| ≤ K_max, ‖2θ−kα‖ ≤ e^{−ε₀|k|} and ‖2θ−kα‖ minimal over |j| ≤ |k|.
pub fn resonances(theta: &ExtReal, cf: &CfExpansion, eps0: f64, k_max: i64) -> Result<ResonanceSequence> {
    if !(eps0 > 0.0) {
        return Err(Error::InvalidArgument(format!("eps0 must be positive, got {eps0}")));
    }
    if k_max < 0 {
        return Err(Error::InvalidArgument("K_max must be >= 0".into()));
    }
    check_range(cf, k_max)?;
    let alpha = cf.alpha();
    let two_theta = theta.double().frac();
    let g0 = two_theta.dist_to_int();
    let mut running = g0.clone();
    let mut entries = vec![Resonance { k: 0, gap: g0 }];
    let mut plus = two_theta.clone();
    let mut minus = two_theta;
    for m in 1..=k_max {
        plus = plus.sub(alpha).frac();
        minus = minus.add(alpha).frac();
        let gp = plus.dist_to_int();
        let gm = minus.dist_to_int();
        for g in [&gp, &gm] {
            if g.cmp_value(&running).is_lt() {
                running = g.clone();
            }
        }
        let threshold = -eps0 * m as f64;
        for (k, g) in [(m, gp), (-m, gm)] {
            if g.cmp_value(&running).is_le() && g.ln() <= threshold {
                entries.push(Resonance { k, gap: g });
            }
        }
    }
    Ok(ResonanceSequence { theta: theta.clone(), eps0, k_max, entries })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorRow {
    pub k: i64,
    pub k_alpha: f64,
    /// ‖2θ − kα‖
    pub minus: f64,
    /// ‖2θ + kα‖
    pub plus: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallDivisorProfile {
    pub rows: Vec<DivisorRow>,
    pub beta_hat: f64,
    /// min over the rows of ‖kα‖·e^{2β̂k}
    pub c_fit: f64,
    pub c_witness: i64,
}

/// Table of ‖kα‖ and ‖2θ ∓ kα‖ for 1 ≤ k ≤ K. `beta` overrides β̂.
pub fn small_divisor_profile(cf: &CfExpansion, theta: f64, k_max: i64, beta: Option<f64>) -> Result<SmallDivisorProfile> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    check_range(cf, k_max)?;
    let beta_hat = match beta {
        Some(b) => b,
        None => beta_estimate(cf).map(|b| b.beta_hat).unwrap_or(0.0),
    };
    let alpha = cf.alpha();
    let two_theta = phase_ext(cf, theta).double().frac();
    let mut acc = ExtReal::zero(cf.working_bits());
    let (mut minus, mut plus) = (two_theta.clone(), two_theta);
    let mut rows = Vec::with_capacity(k_max as usize);
    let mut best = (f64::INFINITY, 1);
    for k in 1..=k_max {
        acc = acc.add(alpha).frac();
        minus = minus.sub(alpha).frac();
        plus = plus.add(alpha).frac();
        let ka = acc.dist_to_int().to_f64();
        let c = ka * (2.0 * beta_hat * k as f64).exp();
        if c < best.0 {
            best = (c, k);
        }
        rows.push(DivisorRow {
            k,
            k_alpha: ka,
            minus: minus.dist_to_int().to_f64(),
            plus: plus.dist_to_int().to_f64(),
        });
    }
    Ok(SmallDivisorProfile { rows, beta_hat, c_fit: best.0, c_witness: best.1 })
}

/// ‖2θ − kα‖ for a single k, computed directly.
pub fn phase_gap(cf: &CfExpansion, theta: &ExtReal, k: i64) -> ExtReal {
    theta.double().sub(&cf.alpha().mul_int(&BigInt::from(k))).dist_to_int()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::FrequencySpec;

    fn golden() -> CfExpansion {
        CfExpansion::new(&FrequencySpec::golden(), 40).unwrap()
    }

    #[test]
    fn half_alpha_is_an_exact_resonance() {
        let cf = golden();
        let theta = cf.alpha().half();
        let r = resonances(&theta, &cf, 0.5, 100).unwrap();
        assert_eq!(r.entries[1].k, 1);
        assert!(r.entries[1].gap.is_zero());
        assert_eq!(r.entries.len(), 2);
    }

    #[test]
    fn huge_threshold_leaves_only_zero() {
        let cf = golden();
        let r = resonances(&phase_ext(&cf, 0.3), &cf, 10.0, 1000).unwrap();
        assert_eq!(r.ks(), vec![0]);
    }

    #[test]
    fn quarter_phase_matches_brute_force() {
        let cf = golden();
        let theta = phase_ext(&cf, 0.25);
        let eps0 = 0.1;
        let kmax = 10_000;
        let r = resonances(&theta, &cf, eps0, kmax).unwrap();
        // brute force in f64 is too coarse near the threshold, so recompute
        // each gap exactly and take the running minimum from scratch
        let gap = |k: i64| phase_gap(&cf, &theta, k);
        let mut expect = vec![0];
        let mut best = gap(0);
        for m in 1..=kmax {
            let (gp, gm) = (gap(m), gap(-m));
            for g in [&gp, &gm] {
                if g.cmp_value(&best).is_lt() {
                    best = g.clone();
                }
            }
            for (k, g) in [(m, gp), (-m, gm)] {
                if g.cmp_value(&best).is_le() && g.ln() <= -eps0 * m as f64 {
                    expect.push(k);
                }
            }
        }
        assert_eq!(r.ks(), expect);
        assert!(r.ks().len() > 2);
        let ks = r.ks();
        assert!(ks.windows(2).all(|w| w[0].abs() <= w[1].abs()));
    }

    #[test]
    fn zero_phase_columns_coincide() {
        let cf = golden();
        let p = small_divisor_profile(&cf, 0.0, 100, None).unwrap();
        for row in &p.rows {
            assert_eq!(row.k_alpha, row.minus);
        }
        let q5 = cf.q_i64(5).unwrap() as usize;
        assert!((p.rows[q5 - 1].k_alpha - cf.gaps()[5].to_f64()).abs() < 1e-16);
        let zero = small_divisor_profile(&cf, 0.0, 100, Some(0.0)).unwrap();
        let min = zero.rows.iter().map(|r| r.k_alpha).fold(f64::INFINITY, f64::min);
        assert_eq!(zero.c_fit, min);
        assert!(min > 0.0);
    }
}
