//! Eigenvalues only: Householder reduction to tridiagonal form followed by
//! implicit QL iterations. Used for spectra of large Gram matrices where the
//! Jacobi solver's per-sweep cost dominates.

use super::jacobi::{check_symmetric, sym_eigen};
use super::Matrix;
use crate::error::{Error, Result};

/// Matrices up to this order go through the Jacobi solver.
pub const JACOBI_MAX_DIM: usize = 32;
const MAX_QL_ITERATIONS: usize = 64;

/// Descending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    if a.rows() <= JACOBI_MAX_DIM {
        return Ok(sym_eigen(a)?.values);
    }
    let (diag, off) = householder_tridiagonal(a);
    tridiagonal_eigenvalues(&diag, &off)
}

/// Reduces a symmetric matrix to tridiagonal form `(diag, off)`, where
/// `off[i]` couples rows `i` and `i + 1`.
fn householder_tridiagonal(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut w: Vec<f64> = a.as_slice().to_vec();
    // symmetrize so the lower triangle is authoritative
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (w[i * n + j] + w[j * n + i]);
            w[i * n + j] = s;
            w[j * n + i] = s;
        }
    }
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let start = k + 1;
        let m = n - start;
        let x0 = w[start * n + k];
        let mut sq = 0.0;
        for i in start..n {
            let x = w[i * n + k];
            sq += x * x;
        }
        let xnorm = sq.sqrt();
        if xnorm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let alpha = if x0 >= 0.0 { -xnorm } else { xnorm };
        for (idx, i) in (start..n).enumerate() {
            v[idx] = w[i * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|x| x * x).sum();
        off[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // p = beta * B v over the trailing block
        for (r, i) in (start..n).enumerate() {
            let row = &w[i * n + start..i * n + n];
            let s: f64 = row.iter().zip(&v[..m]).map(|(a, b)| a * b).sum();
            p[r] = beta * s;
        }
        let kk = 0.5 * beta * v[..m].iter().zip(&p[..m]).map(|(a, b)| a * b).sum::<f64>();
        for r in 0..m {
            p[r] -= kk * v[r];
        }
        // B -= v pᵀ + p vᵀ
        for (r, i) in (start..n).enumerate() {
            let vr = v[r];
            let pr = p[r];
            let row = &mut w[i * n + start..i * n + n];
            for (c, b) in row.iter_mut().enumerate() {
                *b -= vr * p[c] + pr * v[c];
            }
        }
    }
    if n >= 2 {
        off[n - 2] = w[(n - 1) * n + (n - 2)];
    }
    let diag = (0..n).map(|i| w[i * n + i]).collect();
    (diag, off)
}

/// Descending eigenvalues of the symmetric tridiagonal matrix with main
/// diagonal `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NumericFailure(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
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
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}
