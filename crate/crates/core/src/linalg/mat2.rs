//! 2×2 complex matrices, plain and log-scaled.

use num_complex::Complex64;

pub type C2 = [[Complex64; 2]; 2];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> C2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn mul2(a: &C2, b: &C2) -> C2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn det2(a: &C2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn adjoint2(a: &C2) -> C2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Inverse, or `None` when the determinant vanishes.
pub fn inv2(a: &C2) -> Option<C2> {
    let d = det2(a);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

pub fn max_abs2(a: &C2) -> f64 {
    a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frob2_sq(a: &C2) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// Largest and smallest singular values.
pub fn singular_values2(a: &C2) -> (f64, f64) {
    let f = frob2_sq(a);
    let d = det2(a).norm();
    let disc = (0.25 * f * f - d * d).max(0.0).sqrt();
    let smax = (0.5 * f + disc).sqrt();
    let smin = if smax > 0.0 { d / smax } else { 0.0 };
    (smax, smin)
}

/// Eigenvalues (max, min) of a Hermitian 2×2 matrix, the small one via det/max.
pub fn hermitian_eigen2(a: &C2) -> (f64, f64) {
    let p = a[0][0].re;
    let q = a[1][1].re;
    let b = a[0][1].norm();
    let mean = 0.5 * (p + q);
    let rad = (0.5 * (p - q)).hypot(b);
    let lmax = mean + rad;
    let det = p * q - b * b;
    let lmin = if mean > 0.0 && lmax > 0.0 { det / lmax } else { mean - rad };
    (lmax, lmin)
}

/// e^{log_scale} · entries. Each product renormalizes so the largest entry has modulus one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub entries: C2,
    pub log_scale: f64,
}

impl Mat2C {
    pub fn identity() -> Self {
        Mat2C { entries: identity2(), log_scale: 0.0 }
    }

    pub fn from_c2(entries: C2) -> Self {
        let mut m = Mat2C { entries, log_scale: 0.0 };
        m.renormalize();
        m
    }

    pub fn renormalize(&mut self) {
        let m = max_abs2(&self.entries);
        if m > 0.0 && m.is_finite() && m != 1.0 {
            for z in self.entries.iter_mut().flatten() {
                *z /= m;
            }
            self.log_scale += m.ln();
        }
    }

    /// self ← a · self
    pub fn left_mul(&mut self, a: &C2) {
        self.entries = mul2(a, &self.entries);
        self.renormalize();
    }

    pub fn mul(&self, o: &Mat2C) -> Mat2C {
        let mut m = Mat2C { entries: mul2(&self.entries, &o.entries), log_scale: self.log_scale + o.log_scale };
        m.renormalize();
        m
    }

    /// ln ‖·‖ with the spectral norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + singular_values2(&self.entries).0.ln()
    }

    /// ln |det| of the represented matrix.
    pub fn log_abs_det(&self) -> f64 {
        2.0 * self.log_scale + det2(&self.entries).norm().ln()
    }

    /// Represented matrix as plain entries; may overflow.
    pub fn to_c2(&self) -> C2 {
        let s = self.log_scale.exp();
        let mut out = self.entries;
        for z in out.iter_mut().flatten() {
            *z *= s;
        }
        out
    }

    /// Relative distance between two represented matrices,
    /// ‖A − B‖_F / max(‖A‖_F, ‖B‖_F).
    pub fn rel_diff(&self, o: &Mat2C) -> f64 {
        let base = self.log_scale.max(o.log_scale);
        let sa = (self.log_scale - base).exp();
        let sb = (o.log_scale - base).exp();
        let mut num = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let a = self.entries[i][j] * sa;
                let b = o.entries[i][j] * sb;
                num += (a - b).norm_sqr();
                na += a.norm_sqr();
                nb += b.norm_sqr();
            }
        }
        (num / f64::max(na, nb)).sqrt()
    }
}
