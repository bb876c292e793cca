//! Symmetric tridiagonal eigenproblems.
//!
//! Implicit QL with Wilkinson shifts (the tql1/tql2 pair from EISPACK via
//! JAMA). The rotations act on rows of Z independently, so any subset of
//! eigenvector rows can be followed at O(n·|rows|) per sweep.

/// Eigenvalues ascending together with selected eigenvector rows.
#[derive(Clone, Debug)]
pub struct TrackedEigen {
    pub values: Vec<f64>,
    /// matrix row indices that were tracked
    pub row_index: Vec<usize>,
    /// `rows[r][j]` is component `row_index[r]` of eigenvector `j`
    pub rows: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 60;

fn ql(d: &mut [f64], off: &[f64], mut z: Option<&mut [Vec<f64>]>) {
    let n = d.len();
    if n == 0 {
        return;
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have length n - 1");
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            for _ in 0..MAX_SWEEPS {
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for row in z.iter_mut() {
                            let h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

fn sort_order(d: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    idx
}

/// Eigenvalues of the symmetric tridiagonal matrix, ascending.
pub fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let mut d = diag.to_vec();
    ql(&mut d, off, None);
    d.sort_by(f64::total_cmp);
    d
}

/// Eigenvalues plus the eigenvector components at `rows`.
pub fn eigen_tracked(diag: &[f64], off: &[f64], rows: &[usize]) -> TrackedEigen {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            assert!(r < n, "tracked row {r} outside dimension {n}");
            let mut v = vec![0.0; n];
            v[r] = 1.0;
            v
        })
        .collect();
    ql(&mut d, off, Some(&mut z));
    let order = sort_order(&d);
    let values = order.iter().map(|&j| d[j]).collect();
    let rows_sorted = z.iter().map(|row| order.iter().map(|&j| row[j]).collect()).collect();
    TrackedEigen { values, row_index: rows.to_vec(), rows: rows_sorted }
}

/// Full decomposition; `vectors[j]` is the j-th eigenvector.
pub fn eigen_full(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = diag.len();
    let all: Vec<usize> = (0..n).collect();
    let t = eigen_tracked(diag, off, &all);
    let mut vectors = vec![vec![0.0; n]; n];
    for (r, row) in t.rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            vectors[j][r] = v;
        }
    }
    (t.values, vectors)
}

/// Unit eigenvector for the eigenvalue estimate `mu` by inverse iteration,
/// with the tridiagonal LU done under partial pivoting (LAPACK dgttrf/dgttrs).
pub fn inverse_iteration(diag: &[f64], off: &[f64], mu: f64) -> Vec<f64> {
    let n = diag.len();
    if n <= 1 {
        return vec![1.0; n];
    }
    let scale = diag.iter().chain(off).fold(mu.abs(), |a, &b| a.max(b.abs())).max(1.0);
    let tiny = f64::EPSILON * scale;
    let mut d: Vec<f64> = diag.iter().map(|&x| x - mu).collect();
    let mut du = off.to_vec();
    let mut dl = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n - 1];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            let t = du[i];
            du[i] = d[i + 1];
            d[i + 1] = t - f * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let solve = |b: &mut Vec<f64>| {
        for i in 0..n - 1 {
            if swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    };
    // deterministic start with no special orthogonality
    let mut x: Vec<f64> = (0..n).map(|i| 0.5 + (i as f64 * 0.618_033_988_749_895).fract()).collect();
    for _ in 0..3 {
        solve(&mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_chain_closed_form() {
        let n = 50;
        let ev = eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]);
        for (j, e) in ev.iter().enumerate() {
            let exact = -2.0 * (PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-13, "{j}: {e} vs {exact}");
        }
    }

    #[test]
    fn tracked_rows_match_full_vectors() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() * 1.5).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 1.0 + 0.1 * (i as f64).cos()).collect();
        let (vals, vecs) = eigen_full(&diag, &off);
        let t = eigen_tracked(&diag, &off, &[3, 17]);
        assert_eq!(vals, t.values);
        for j in 0..n {
            assert!((vecs[j][3] - t.rows[0][j]).abs() < 1e-14);
            assert!((vecs[j][17] - t.rows[1][j]).abs() < 1e-14);
            // residual of T v = λ v
            let v = &vecs[j];
            for i in 0..n {
                let mut tv = diag[i] * v[i];
                if i > 0 {
                    tv += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += off[i] * v[i + 1];
                }
                assert!((tv - vals[j] * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_iteration_matches_ql_vectors() {
        let n = 80;
        let diag: Vec<f64> = (0..n).map(|i| 3.0 * (i as f64 * 1.3).cos()).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 1.0 + 0.3 * (i as f64 * 0.4).sin()).collect();
        let (vals, vecs) = eigen_full(&diag, &off);
        for j in [0, 11, 40, 79] {
            let v = inverse_iteration(&diag, &off, vals[j]);
            let dot: f64 = v.iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-10, "{j}: {dot}");
        }
        assert_eq!(inverse_iteration(&[2.0], &[], 2.0), vec![1.0]);
    }

    #[test]
    fn sturm_agrees_with_ql() {
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * (i as f64 * 0.618).cos()).collect();
        let off = vec![1.0; n - 1];
        let ev = eigenvalues(&diag, &off);
        for x in [-3.0, -1.0, 0.1, 0.5, 2.2, 5.0] {
            let c = ev.iter().filter(|&&e| e < x).count();
            assert_eq!(sturm_count(&diag, &off, x), c);
        }
    }

    #[test]
    fn one_by_one() {
        assert_eq!(eigenvalues(&[4.0], &[]), vec![4.0]);
        let t = eigen_tracked(&[4.0], &[], &[0]);
        assert_eq!(t.rows[0], vec![1.0]);
    }
}
