use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real trigonometric polynomial stored by its coefficients v̂_0..v̂_K;
/// negative modes are the conjugates, so v is real on the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    coeffs: Vec<Complex64>,
    rho: f64,
    c_v: f64,
    sigma: f64,
}

const DEFAULT_SIGMA: f64 = 0.5;

impl Potential {
    pub fn new(coeffs: Vec<Complex64>, rho: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPotential("empty coefficient table".into()));
        }
        if coeffs[0].im != 0.0 {
            return Err(Error::InvalidPotential(format!("v̂_0 must be real, got {}", coeffs[0])));
        }
        if coeffs.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidPotential(format!("strip width must be positive, got {rho}")));
        }
        let mut p = Potential { coeffs, rho, c_v: 0.0, sigma: DEFAULT_SIGMA };
        p.c_v = p.fitted_constant(DEFAULT_SIGMA);
        Ok(p)
    }

    /// v(x) = 2cos 2πx
    pub fn almost_mathieu() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], f64::INFINITY).unwrap()
    }

    /// v̂_{±k} = a (real), everything else zero: v = 2a cos 2πkx.
    pub fn single_mode(k: usize, a: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] += Complex64::new(a, 0.0);
        Self::new(coeffs, f64::INFINITY).unwrap()
    }

    /// Parses lines `k re im` (k ≥ 0); `#` starts a comment.
    pub fn parse_table(text: &str, rho: f64) -> Result<Self> {
        let mut entries: Vec<(usize, Complex64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidPotential(format!("line {}: expected `k re im`, got `{line}`", lineno + 1));
            if parts.len() != 3 {
                return Err(bad());
            }
            let k: usize = parts[0].parse().map_err(|_| bad())?;
            let re: f64 = parts[1].parse().map_err(|_| bad())?;
            let im: f64 = parts[2].parse().map_err(|_| bad())?;
            if entries.iter().any(|(j, _)| *j == k) {
                return Err(Error::InvalidPotential(format!("line {}: mode {k} listed twice", lineno + 1)));
            }
            entries.push((k, Complex64::new(re, im)));
        }
        let kmax = entries.iter().map(|e| e.0).max().ok_or_else(|| Error::InvalidPotential("no coefficients".into()))?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); kmax + 1];
        for (k, z) in entries {
            coeffs[k] = z;
        }
        Self::new(coeffs, rho)
    }

    fn fitted_constant(&self, sigma: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, z)| z.norm() * (2.0 * sigma * k as f64).exp())
            .fold(0.0, f64::max)
    }

    /// Re-derives C_v for a new σ.
    pub fn with_decay(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidPotential(format!("sigma must be positive, got {sigma}")));
        }
        self.sigma = sigma;
        self.c_v = self.fitted_constant(sigma);
        Ok(self)
    }

    /// Installs a user certificate after checking it against the table.
    pub fn with_certificate(mut self, c_v: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidPotential(format!("sigma must be positive, got {sigma}")));
        }
        let need = self.fitted_constant(sigma);
        if need > c_v * (1.0 + 1e-12) {
            return Err(Error::InvalidPotential(format!("certificate C_v = {c_v} below required {need}")));
        }
        self.c_v = c_v;
        self.sigma = sigma;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// (C_v, σ) with |v̂_k| ≤ C_v e^{−2σ|k|}.
    pub fn certificate(&self) -> (f64, f64) {
        (self.c_v, self.sigma)
    }

    /// C_v e^{−2σK}/(1 − e^{−2σ})
    pub fn truncation_error_bound(&self) -> f64 {
        let q = (-2.0 * self.sigma).exp();
        self.c_v * q.powi(self.degree() as i32) / (1.0 - q)
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        let a = k.unsigned_abs() as usize;
        match self.coeffs.get(a) {
            None => Complex64::new(0.0, 0.0),
            Some(z) if k < 0 => z.conj(),
            Some(z) => *z,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Σ_k v̂_k e^{2πikx} in the strip |Im x| < ρ.
    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        if x.im.abs() >= self.rho {
            return Err(Error::StripExceeded { im: x.im.abs(), rho: self.rho });
        }
        if x.im == 0.0 {
            return Ok(Complex64::new(self.eval_real(x.re), 0.0));
        }
        let mut s = self.coeffs[0];
        for (k, z) in self.coeffs.iter().enumerate().skip(1) {
            let w = Complex64::new(0.0, 2.0 * PI * k as f64) * x;
            s += z * w.exp() + z.conj() * (-w).exp();
        }
        Ok(s)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        let mut s = self.coeffs[0].re;
        for (k, z) in self.coeffs.iter().enumerate().skip(1) {
            let (sn, cs) = (2.0 * PI * k as f64 * x).sin_cos();
            s += 2.0 * (z.re * cs - z.im * sn);
        }
        s
    }

    /// Upper bound for sup |v| on the real line.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs[0].norm() + 2.0 * self.coeffs.iter().skip(1).map(|z| z.norm()).sum::<f64>()
    }

    /// a_k = Σ_{|j|≥|k|, jk≥0} |j v̂_j|; at k = 0 both sides count.
    pub fn tail_weight(&self, k: i64) -> f64 {
        let a = k.unsigned_abs() as usize;
        let one_side: f64 = self.coeffs.iter().enumerate().skip(a.max(1)).map(|(j, z)| j as f64 * z.norm()).sum();
        if k == 0 {
            2.0 * one_side
        } else {
            one_side
        }
    }
}
