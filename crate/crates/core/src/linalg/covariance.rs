use serde::{Deserialize, Serialize};

use super::{axpy, dot, sym_eigenvalues, Matrix};
use crate::error::{invalid, Error, Result};

/// Eigenvalues in `[-NEGATIVE_CLAMP · trace, 0)` are round-off and clamp to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;

/// Spectral summary of an uncentered empirical covariance `Ĉ = (1/n) Σ xᵢxᵢᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSummary {
    pub dim: usize,
    pub trace: f64,
    /// Descending eigenvalues, zero-padded to `dim` when the rank is smaller.
    pub spectrum: Vec<f64>,
    pub lambda_max: f64,
    pub rank: usize,
}

impl CovarianceSummary {
    /// Builds a summary from raw eigenvalues; `trace` is the directly computed trace.
    pub fn from_spectrum(dim: usize, mut spectrum: Vec<f64>, trace: f64) -> Result<Self> {
        spectrum.sort_by(|a, b| b.total_cmp(a));
        let floor = -NEGATIVE_CLAMP * trace.max(0.0);
        for v in spectrum.iter_mut() {
            if *v < 0.0 {
                if *v < floor && *v < -f64::EPSILON {
                    return Err(Error::NumericFailure(format!(
                        "covariance eigenvalue {v:.3e} below clamp floor {floor:.3e}"
                    )));
                }
                *v = 0.0;
            }
        }
        if spectrum.len() < dim {
            spectrum.resize(dim, 0.0);
        }
        let lambda_max = spectrum.first().copied().unwrap_or(0.0);
        let rank = spectrum
            .iter()
            .filter(|&&v| v > RANK_TOL * lambda_max && v > 0.0)
            .count();
        Ok(Self {
            dim,
            trace,
            spectrum,
            lambda_max,
            rank,
        })
    }

    /// `λ_max / tr`, or 0 for a zero covariance.
    pub fn ratio(&self) -> f64 {
        if self.trace > 0.0 {
            self.lambda_max / self.trace
        } else {
            0.0
        }
    }
}

fn check_data(data: &Matrix) -> Result<()> {
    if data.rows() == 0 || data.cols() == 0 {
        return Err(invalid(format!(
            "covariance needs a non-empty sample, got {}x{}",
            data.rows(),
            data.cols()
        )));
    }
    Ok(())
}

/// The d×d matrix `(1/n) XᵀX`.
pub fn covariance_matrix(data: &Matrix) -> Result<Matrix> {
    check_data(data)?;
    let (n, d) = (data.rows(), data.cols());
    let mut c = Matrix::zeros(d, d);
    for row in data.row_iter() {
        for (i, &xi) in row.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, row, c.row_mut(i));
            }
        }
    }
    Ok(c.scaled(1.0 / n as f64))
}

/// Summary of the uncentered covariance of the rows of `data`.
///
/// Formed in feature space when `d ≤ n`, otherwise through the n×n Gram
/// matrix `XXᵀ/n`, which carries the same nonzero spectrum.
pub fn covariance(data: &Matrix) -> Result<CovarianceSummary> {
    check_data(data)?;
    let (n, d) = (data.rows(), data.cols());
    let trace = data.row_iter().map(|r| dot(r, r)).sum::<f64>() / n as f64;
    let spectrum = if d <= n {
        sym_eigenvalues(&covariance_matrix(data)?)?
    } else {
        sym_eigenvalues(&data.gram().scaled(1.0 / n as f64))?
    };
    CovarianceSummary::from_spectrum(d, spectrum, trace)
}

/// Subtracts the column mean from every row.
pub fn center(data: &Matrix) -> Result<Matrix> {
    if data.rows() == 0 {
        return Err(invalid("cannot center an empty sample"));
    }
    let n = data.rows() as f64;
    let mut mean = vec![0.0; data.cols()];
    for r in data.row_iter() {
        axpy(1.0 / n, r, &mut mean);
    }
    let mut out = data.clone();
    for i in 0..out.rows() {
        for (x, m) in out.row_mut(i).iter_mut().zip(&mean) {
            *x -= m;
        }
    }
    Ok(out)
}
