//! Continued-fraction expansions with exact convergents.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ext::{ln_big, ExtReal};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 256;

/// How a frequency is handed to us. Every form ends up as a quotient stream.
#[derive(Clone, Debug, PartialEq)]
pub enum FrequencySpec {
    /// Finite prefix a_1..a_L, completed with an all-ones tail.
    Stream(Vec<BigUint>),
    Periodic { head: Vec<BigUint>, cycle: Vec<BigUint> },
    /// offset + scale·√d
    Quadratic { d: BigUint, offset: BigRational, scale: BigRational },
    /// Decimal `0.xxxx` (radius from the digit count and `precision_bits`)
    /// or an exact `p/q`.
    Decimal { text: String, precision_bits: u32 },
}

impl FrequencySpec {
    /// (√5 − 1)/2
    pub fn golden() -> Self {
        FrequencySpec::Quadratic {
            d: BigUint::from(5u32),
            offset: BigRational::new((-1).into(), 2.into()),
            scale: BigRational::new(1.into(), 2.into()),
        }
    }

    /// √2 − 1
    pub fn silver() -> Self {
        FrequencySpec::Quadratic {
            d: BigUint::from(2u32),
            offset: BigRational::from_integer((-1).into()),
            scale: BigRational::from_integer(1.into()),
        }
    }

    pub fn stream<I: IntoIterator<Item = u64>>(a: I) -> Self {
        FrequencySpec::Stream(a.into_iter().map(BigUint::from).collect())
    }

    pub fn decimal(text: &str) -> Self {
        FrequencySpec::Decimal { text: text.to_string(), precision_bits: DEFAULT_PRECISION }
    }
}

enum Step {
    Quotient(BigUint),
    /// The value is exactly rational and the expansion has ended.
    Terminated,
    /// The input interval straddles a quotient boundary. `near_integer` is
    /// set when the complete quotient is pinned to a tiny interval around an
    /// integer, which means the input is indistinguishable from a rational.
    Ambiguous { near_integer: Option<BigUint> },
}

/// Complete quotient (P + √D)/Q with Q | D − P².
struct Surd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    sqrt_d: BigInt,
}

impl Surd {
    fn floor(&self) -> BigInt {
        let num = &self.p + &self.sqrt_d;
        if self.q.is_positive() {
            num.div_floor(&self.q)
        } else {
            -(num.div_floor(&(-&self.q))) - 1
        }
    }

    /// Removes the integer part a and inverts.
    fn advance(&mut self, a: &BigInt) {
        let p1 = a * &self.q - &self.p;
        let q1 = (&self.d - &p1 * &p1) / &self.q;
        self.p = p1;
        self.q = q1;
    }
}

enum Source {
    Surd(Surd),
    Listed { head: Vec<BigUint>, cycle: Vec<BigUint>, pos: usize },
    /// Complete quotient known to lie in [lo, hi]; `hi = None` is +∞.
    Interval { lo: BigRational, hi: Option<BigRational>, started: bool },
}

fn rat_floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

impl Source {
    fn next(&mut self) -> Step {
        match self {
            Source::Surd(s) => {
                let a = s.floor();
                s.advance(&a);
                Step::Quotient(a.to_biguint().expect("surd quotients are positive"))
            }
            Source::Listed { head, cycle, pos } => {
                let a = if *pos < head.len() {
                    head[*pos].clone()
                } else {
                    cycle[(*pos - head.len()) % cycle.len()].clone()
                };
                *pos += 1;
                Step::Quotient(a)
            }
            Source::Interval { lo, hi, started } => {
                if !*started {
                    // lo, hi bracket α itself; the first complete quotient is 1/α
                    *started = true;
                    let h = hi.clone().expect("finite input interval");
                    let new_hi = if lo.is_zero() { None } else { Some(lo.recip()) };
                    *lo = h.recip();
                    *hi = new_hi;
                }
                let Some(h) = hi.clone() else {
                    return Step::Terminated;
                };
                let a = rat_floor(lo);
                let a_rat = BigRational::from_integer(a.clone());
                let exact = *lo == h;
                if exact {
                    let rem = &h - &a_rat;
                    if rem.is_zero() {
                        // last quotient; next call terminates
                        *lo = BigRational::zero();
                        *hi = None;
                        return match a.to_biguint() {
                            Some(q) if !q.is_zero() => Step::Quotient(q),
                            _ => Step::Terminated,
                        };
                    }
                    let r = rem.recip();
                    *lo = r.clone();
                    *hi = Some(r);
                    return Step::Quotient(a.to_biguint().unwrap());
                }
                let a1 = &a_rat + BigRational::one();
                if *lo > a_rat && h < a1 {
                    let new_lo = (&h - &a_rat).recip();
                    let new_hi = (&*lo - &a_rat).recip();
                    *lo = new_lo;
                    *hi = Some(new_hi);
                    Step::Quotient(a.to_biguint().unwrap())
                } else {
                    let width = &h - &*lo;
                    let tiny = BigRational::new(BigInt::one(), BigInt::one() << 20);
                    let m = rat_floor(&h);
                    let near = (width < tiny && BigRational::from_integer(m.clone()) >= *lo)
                        .then(|| m.to_biguint())
                        .flatten();
                    Step::Ambiguous { near_integer: near }
                }
            }
        }
    }
}

fn parse_decimal(text: &str, precision_bits: u32) -> Result<(BigRational, BigRational)> {
    let t = text.trim();
    let bad = || Error::InvalidFrequency(format!("cannot parse decimal `{text}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok((BigRational::new(n, d), BigRational::zero()));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if !frac.chars().all(|c| c.is_ascii_digit()) || !(int.is_empty() || int == "0") || frac.is_empty() {
        return Err(bad());
    }
    let digits = frac.len();
    let num: BigInt = frac.parse().map_err(|_| bad())?;
    let ten = BigInt::from(10u32).pow(digits as u32);
    let center = BigRational::new(num, ten.clone());
    let from_digits = BigRational::new(BigInt::one(), ten * 2);
    let from_bits = BigRational::new(BigInt::one(), BigInt::one() << precision_bits);
    let r = if from_digits > from_bits { from_digits } else { from_bits };
    Ok((center, r))
}

fn rat_to_big(r: &BigRational) -> (BigInt, BigInt) {
    (r.numer().clone(), r.denom().clone())
}

/// Reference fraction with a bound on its distance to α.
#[derive(Clone, Debug)]
struct Reference {
    num: BigInt,
    den: BigInt,
    err_ulps: BigUint,
}

#[derive(Clone, Debug)]
pub struct CfExpansion {
    quotients: Vec<BigUint>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    gaps: Vec<ExtReal>,
    alpha: ExtReal,
    reference: Reference,
    precision: u32,
    alpha_hi: f64,
    alpha_lo: f64,
}

fn push_convergent(p: &mut Vec<BigInt>, q: &mut Vec<BigInt>, a: &BigUint) {
    let a = BigInt::from(a.clone());
    let n = p.len();
    p.push(&a * &p[n - 1] + &p[n - 2]);
    q.push(&a * &q[n - 1] + &q[n - 2]);
}

fn build_source(spec: &FrequencySpec) -> Result<(Source, Option<(BigRational, BigRational)>)> {
    match spec {
        FrequencySpec::Stream(a) => {
            check_quotients(a)?;
            if a.is_empty() {
                return Err(Error::InvalidFrequency("empty quotient stream".into()));
            }
            Ok((Source::Listed { head: a.clone(), cycle: vec![BigUint::one()], pos: 0 }, None))
        }
        FrequencySpec::Periodic { head, cycle } => {
            check_quotients(head)?;
            check_quotients(cycle)?;
            if cycle.is_empty() {
                return Err(Error::InvalidFrequency("empty period".into()));
            }
            Ok((Source::Listed { head: head.clone(), cycle: cycle.clone(), pos: 0 }, None))
        }
        FrequencySpec::Quadratic { d, offset, scale } => {
            let d = BigInt::from(d.clone());
            let s = d.sqrt();
            if &s * &s == d || d < BigInt::from(2) {
                return Err(Error::InvalidFrequency(format!("d = {d} must not be a perfect square")));
            }
            if scale.is_zero() {
                return Err(Error::InvalidFrequency("scale must be nonzero".into()));
            }
            // α = (A + C√d)/L
            let l = offset.denom().lcm(scale.denom());
            let a = offset.numer() * (&l / offset.denom());
            let c = scale.numer() * (&l / scale.denom());
            let big_d = &c * &c * &d;
            let (mut p, mut q) = if c.is_positive() { (a, l) } else { (-a, -l) };
            let mut dd = big_d;
            if !(&dd - &p * &p).is_multiple_of(&q) {
                let qa = q.abs();
                p *= &qa;
                dd *= &qa * &qa;
                q *= &qa;
            }
            let sqrt_d = dd.sqrt();
            let mut surd = Surd { p, q, d: dd, sqrt_d };
            let a0 = surd.floor();
            if !a0.is_zero() {
                return Err(Error::InvalidFrequency(format!("value has integer part {a0}, expected 0 < α < 1")));
            }
            surd.advance(&a0);
            Ok((Source::Surd(surd), None))
        }
        FrequencySpec::Decimal { text, precision_bits } => {
            let (c, r) = parse_decimal(text, *precision_bits)?;
            let lo = &c - &r;
            let hi = &c + &r;
            if !lo.is_positive() || hi >= BigRational::one() {
                return Err(Error::InvalidFrequency(format!("`{text}` is not inside (0, 1)")));
            }
            let src = Source::Interval { lo, hi: Some(hi), started: false };
            Ok((src, Some((c, r))))
        }
    }
}

fn check_quotients(a: &[BigUint]) -> Result<()> {
    if a.iter().any(|x| x.is_zero()) {
        return Err(Error::InvalidFrequency("partial quotients must be >= 1".into()));
    }
    Ok(())
}

fn rational_error(mut prefix: Vec<BigUint>, last: Option<BigUint>) -> Error {
    if let Some(m) = last {
        if m == BigUint::one() && !prefix.is_empty() {
            *prefix.last_mut().unwrap() += 1u32;
        } else if !m.is_zero() {
            prefix.push(m);
        }
    }
    Error::RationalInput { quotients: prefix.iter().map(|x| x.to_string()).collect() }
}

impl CfExpansion {
    pub fn new(spec: &FrequencySpec, depth: usize) -> Result<Self> {
        Self::with_precision(spec, depth, DEFAULT_PRECISION)
    }

    pub fn with_precision(spec: &FrequencySpec, depth: usize, precision: u32) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be >= 1".into()));
        }
        if precision < 53 {
            return Err(Error::InvalidArgument("precision must be at least 53 bits".into()));
        }
        let (mut src, interval) = build_source(spec)?;
        let exact_rational = matches!(&interval, Some((_, r)) if r.is_zero());
        let mut quotients = Vec::with_capacity(depth);
        while quotients.len() < depth {
            match src.next() {
                Step::Quotient(a) => quotients.push(a),
                Step::Terminated => return Err(rational_error(quotients, None)),
                Step::Ambiguous { near_integer: Some(m) } => return Err(rational_error(quotients, Some(m))),
                Step::Ambiguous { near_integer: None } => {
                    return Err(Error::PrecisionExhausted { safe_depth: quotients.len() })
                }
            }
        }
        // seeds (p_{-1}, q_{-1}) = (1, 0) and (p_0, q_0) = (0, 1)
        let mut p = vec![BigInt::one(), BigInt::zero()];
        let mut q = vec![BigInt::zero(), BigInt::one()];
        for a in &quotients {
            push_convergent(&mut p, &mut q, a);
        }
        // drop the (p_{-1}, q_{-1}) seed so index k holds p_k, q_k
        p.remove(0);
        q.remove(0);
        let qn_bits = q[depth].bits() as u32;
        let bits = precision.max(2 * qn_bits + 64);

        let reference = match interval {
            Some((c, r)) => {
                if exact_rational {
                    // a finite exact expansion must extend beyond the requested depth
                    match src.next() {
                        Step::Quotient(_) => {}
                        _ => return Err(rational_error(quotients, None)),
                    }
                }
                let (num, den) = rat_to_big(&c);
                let scaled = &r * BigRational::from_integer(BigInt::one() << bits);
                let err = scaled.ceil().to_integer().to_biguint().unwrap_or_default();
                Reference { num, den, err_ulps: err }
            }
            None => {
                // continue the stream until |α − p/q| < 1/(q q') ≤ 2^-(bits+2)
                let mut pp = vec![p[depth - 1].clone(), p[depth].clone()];
                let mut qq = vec![q[depth - 1].clone(), q[depth].clone()];
                loop {
                    let a = match src.next() {
                        Step::Quotient(a) => a,
                        _ => unreachable!("surd and listed sources never terminate"),
                    };
                    push_convergent(&mut pp, &mut qq, &a);
                    let n = qq.len();
                    if (&qq[n - 1] * &qq[n - 2]).bits() as u32 >= bits + 3 {
                        break;
                    }
                }
                let n = qq.len();
                Reference { num: pp[n - 2].clone(), den: qq[n - 2].clone(), err_ulps: BigUint::one() }
            }
        };
        let alpha = ExtReal::from_ratio(&reference.num, &reference.den, bits).with_extra_radius(&reference.err_ulps);
        let alpha_hi = alpha.to_f64();
        let alpha_lo = alpha.sub(&ExtReal::from_f64(alpha_hi, bits)).to_f64();
        let mut cf = CfExpansion {
            quotients,
            p,
            q,
            gaps: Vec::new(),
            alpha,
            reference,
            precision,
            alpha_hi,
            alpha_lo,
        };
        cf.gaps = (0..depth).map(|k| cf.dist_unchecked(&cf.q[k].clone())).collect();
        Ok(cf)
    }

    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    /// a_1..a_n
    pub fn quotients(&self) -> &[BigUint] {
        &self.quotients
    }

    /// p_0..p_n
    pub fn numerators(&self) -> &[BigInt] {
        &self.p
    }

    /// q_0..q_n
    pub fn denominators(&self) -> &[BigInt] {
        &self.q
    }

    pub fn q(&self, k: usize) -> &BigInt {
        &self.q[k]
    }

    pub fn p(&self, k: usize) -> &BigInt {
        &self.p[k]
    }

    /// q_k as i64 when it fits.
    pub fn q_i64(&self, k: usize) -> Option<i64> {
        self.q[k].to_i64()
    }

    /// Δ_k = ‖q_k α‖ for k = 0..n−1.
    pub fn gaps(&self) -> &[ExtReal] {
        &self.gaps
    }

    pub fn alpha(&self) -> &ExtReal {
        &self.alpha
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha_hi
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn working_bits(&self) -> u32 {
        self.alpha.bits()
    }

    pub fn q_depth(&self) -> &BigInt {
        &self.q[self.depth()]
    }

    fn check_k(&self, k: &BigInt) -> Result<()> {
        if k.is_zero() {
            return Err(Error::InvalidArgument("k must be nonzero".into()));
        }
        if k.magnitude() >= self.q_depth().magnitude() {
            return Err(Error::DepthInsufficient { k: k.to_string(), q_depth: self.q_depth().to_string() });
        }
        Ok(())
    }

    /// Largest |k| served without `DepthInsufficient`, clamped to i64.
    pub fn k_limit(&self) -> i64 {
        (self.q_depth() - BigInt::one()).to_i64().unwrap_or(i64::MAX)
    }

    fn dist_unchecked(&self, k: &BigInt) -> ExtReal {
        let r = self.reference.num.clone() * k;
        let r = r.mod_floor(&self.reference.den);
        let other = &self.reference.den - &r;
        let d = if other < r { other } else { r };
        let bits = self.working_bits();
        let err = &self.reference.err_ulps * k.magnitude();
        ExtReal::from_ratio(&d, &self.reference.den, bits).with_extra_radius(&err)
    }

    /// ‖kα‖ through modular arithmetic against the reference fraction.
    pub fn norm_dist(&self, k: &BigInt) -> Result<ExtReal> {
        self.check_k(k)?;
        Ok(self.dist_unchecked(k))
    }

    pub fn norm_dist_i64(&self, k: i64) -> Result<ExtReal> {
        self.norm_dist(&BigInt::from(k))
    }

    /// ‖kα‖ by multiplying the fixed-point α and rounding.
    pub fn norm_dist_direct(&self, k: &BigInt) -> Result<ExtReal> {
        self.check_k(k)?;
        Ok(self.alpha.mul_int(k).dist_to_int())
    }

    /// frac(x + nα) with α split into two doubles, so large n stays accurate.
    pub fn orbit(&self, x: f64, n: i64) -> f64 {
        let nf = n as f64;
        let hi = self.alpha_hi * nf;
        let err = self.alpha_hi.mul_add(nf, -hi);
        let hi_frac = hi - hi.floor();
        let t = hi_frac + (err + self.alpha_lo * nf) + x;
        let f = t - t.floor();
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }

    /// Checks the recurrence, the determinant identity, monotone q and the
    /// two-sided gap bracket 1/(2q_{k+1}) ≤ Δ_k ≤ 1/q_{k+1}. At k = 0 with
    /// a_1 = 1 the lower bound is false (Δ_0 = 1 − α < 1/2), so it is skipped.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let n = self.depth();
        if self.p[0] != BigInt::zero() || self.q[0] != BigInt::one() {
            return Err("bad seeds".into());
        }
        for k in 1..=n {
            let a = BigInt::from(self.quotients[k - 1].clone());
            let (pm2, qm2) = if k >= 2 { (self.p[k - 2].clone(), self.q[k - 2].clone()) } else { (BigInt::one(), BigInt::zero()) };
            if self.p[k] != &a * &self.p[k - 1] + pm2 || self.q[k] != &a * &self.q[k - 1] + qm2 {
                return Err(format!("recurrence fails at k = {k}"));
            }
            let det = &self.p[k] * &self.q[k - 1] - &self.p[k - 1] * &self.q[k];
            if det.abs() != BigInt::one() {
                return Err(format!("|p_k q_(k-1) - p_(k-1) q_k| != 1 at k = {k}"));
            }
            if k >= 2 && self.q[k] <= self.q[k - 1] {
                return Err(format!("q not increasing at k = {k}"));
            }
        }
        for k in 0..n {
            let q1 = &self.q[k + 1];
            let g = &self.gaps[k];
            let lower_applies = k > 0 || !self.quotients[0].is_one();
            let lower_ok = !lower_applies || g.certainly_ge_ratio(&BigInt::one(), &(q1 * 2));
            if !lower_ok || !g.certainly_le_ratio(&BigInt::one(), q1) {
                return Err(format!("gap bracket not certified at k = {k}"));
            }
        }
        Ok(())
    }
}

/// Finite-depth running profile of ln q_{n+1}/q_n.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaEstimate {
    /// max of ln q_{n+1}/q_n over the upper half n ≥ ⌊depth/2⌋
    pub beta_hat: f64,
    /// max over all n
    pub sup_all: f64,
    /// ln q_{n+1}/q_n for n = 0..depth−1
    pub terms: Vec<f64>,
    /// tail_sup[n] = max over m ≥ n of terms[m]
    pub tail_sup: Vec<f64>,
    pub depth_used: usize,
}

pub fn beta_estimate(cf: &CfExpansion) -> Result<BetaEstimate> {
    let n = cf.depth();
    if n < 2 {
        return Err(Error::InvalidArgument("beta estimate needs depth >= 2".into()));
    }
    let terms: Vec<f64> = (0..n)
        .map(|k| ln_big(cf.q[k + 1].magnitude()) / super::ext::big_to_f64(&cf.q[k]))
        .collect();
    let mut tail_sup = terms.clone();
    for k in (0..n - 1).rev() {
        tail_sup[k] = tail_sup[k].max(tail_sup[k + 1]);
    }
    Ok(BetaEstimate {
        beta_hat: tail_sup[n / 2],
        sup_all: tail_sup[0],
        terms,
        tail_sup,
        depth_used: n,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcReport {
    pub holds: bool,
    /// minimizer of ‖kα‖·|k|^τ over 1 ≤ k ≤ K
    pub witness: i64,
    pub witness_value: f64,
}

/// Scans ‖kα‖ > κ|k|^{−τ} for 0 < |k| ≤ K; negative k mirror positive ones.
pub fn dc_check(cf: &CfExpansion, kappa: f64, tau: f64, k_max: i64) -> Result<DcReport> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    cf.check_k(&BigInt::from(k_max))?;
    let mut acc = ExtReal::zero(cf.working_bits());
    let mut holds = true;
    let mut best = (f64::INFINITY, 1);
    for k in 1..=k_max {
        acc = acc.add(&cf.alpha).frac();
        let d = acc.dist_to_int();
        let val = d.to_f64();
        let lower = val - d.radius_f64();
        let kt = (k as f64).powf(tau);
        if lower * kt <= kappa {
            holds = false;
        }
        if val * kt < best.0 {
            best = (val * kt, k);
        }
    }
    Ok(DcReport { holds, witness: best.1, witness_value: best.0 })
}
