use super::Matrix;
use crate::error::{invalid, Error, Result};

/// Largest tolerated relative asymmetry `‖a − aᵀ‖_F / ‖a‖_F`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Sweeps stop once the off-diagonal Frobenius norm falls below this fraction of `‖a‖_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `a = V Λ Vᵀ` with eigenvalues in descending order.
///
/// Column `j` of `vectors` is the unit eigenvector belonging to `values[j]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

pub(crate) fn check_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(invalid(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(invalid(format!(
            "matrix is not symmetric (relative asymmetry {asym:.3e})"
        )));
    }
    Ok(())
}

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
///
/// The input is symmetrized as `(a + aᵀ)/2` after the asymmetry check. Each sweep
/// visits every `(p, q)` pair once and annihilates `a_pq` with a plane rotation.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    check_symmetric(a)?;
    let n = a.rows();
    let mut w = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (w.get(i, j) + w.get(j, i));
            w.set(i, j, s);
            w.set(j, i, s);
        }
    }
    let mut v = Matrix::identity(n);
    let scale = w.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOL * scale;

    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        if off_diagonal_norm(&w) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&w) > threshold {
        return Err(Error::NumericFailure(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.get(j, j).total_cmp(&w.get(i, i)));
    let values = order.iter().map(|&i| w.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, dst, v.get(k, src));
        }
    }
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = w.get(i, j);
            acc += 2.0 * x * x;
        }
    }
    acc.sqrt()
}

fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = w.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = w.get(p, p);
    let aqq = w.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = w.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = w.get(k, p);
        let akq = w.get(k, q);
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        w.set(k, p, new_kp);
        w.set(p, k, new_kp);
        w.set(k, q, new_kq);
        w.set(q, k, new_kq);
    }
    w.set(p, p, app - t * apq);
    w.set(q, q, aqq + t * apq);
    w.set(p, q, 0.0);
    w.set(q, p, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}
