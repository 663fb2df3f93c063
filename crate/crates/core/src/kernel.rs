//! Gaussian kernel Gram matrices and the spectra of kernel-space covariances.
//!
//! The kernel is `κ(x, y) = exp(−‖x − y‖² / σ²)`, with `σ²` (not `2σ²`) in the
//! denominator. For any kernel the nonzero eigenvalues of the feature-space
//! covariance `Ĉ(ψ(x))` are those of `K / n`.

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, sym_eigenvalues, CovarianceSummary, Matrix};

pub const DEFAULT_GRAM_CAP: usize = 5000;

/// A symmetric kernel matrix `K_ij = κ(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Matrix,
    /// `σ` for Gaussian grams, `None` for grams supplied directly.
    kernel_width: Option<f64>,
}

impl GramMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(invalid(format!(
                "gram matrix must be square and non-empty, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        if entries.asymmetry() > 1e-10 {
            return Err(invalid("gram matrix is not symmetric"));
        }
        Ok(Self {
            entries,
            kernel_width: None,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn kernel_width(&self) -> Option<f64> {
        self.kernel_width
    }

    /// `εᵀ K ε`.
    pub fn quadratic_form(&self, eps: &[f64]) -> f64 {
        self.entries
            .row_iter()
            .zip(eps)
            .map(|(row, &e)| if e == 0.0 { 0.0 } else { e * dot(row, eps) })
            .sum()
    }
}

pub fn gaussian_gram(data: &Matrix, sigma: f64) -> Result<GramMatrix> {
    gaussian_gram_with_cap(data, sigma, DEFAULT_GRAM_CAP)
}

pub fn gaussian_gram_with_cap(data: &Matrix, sigma: f64, cap: usize) -> Result<GramMatrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("kernel width must be positive, got {sigma}")));
    }
    let n = data.rows();
    if n == 0 {
        return Err(invalid("gram matrix of an empty sample"));
    }
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "dense gram matrix",
            needed: (n as u128) * (n as u128),
            budget: (cap as u64) * (cap as u64),
        });
    }
    let inv = 1.0 / (sigma * sigma);
    let mut k = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            let d2 = squared_distance(data.row(i), data.row(j));
            let v = (-d2 * inv).exp();
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    Ok(GramMatrix {
        entries: k,
        kernel_width: Some(sigma),
    })
}

/// Degree-1 polynomial (linear) kernel `K = X Xᵀ`; its feature map is the identity.
pub fn linear_gram(data: &Matrix) -> Result<GramMatrix> {
    GramMatrix::new(data.gram())
}

/// Covariance summary of `Ĉ(ψ(x))` from the gram matrix: eigenvalues of `K/n`,
/// restricted to the nonzero ones, and trace `(1/n) Σ K_ii`.
pub fn kernel_cov_summary(gram: &GramMatrix) -> Result<CovarianceSummary> {
    let n = gram.n();
    let scaled = gram.entries.scaled(1.0 / n as f64);
    let trace = scaled.trace();
    let spectrum = sym_eigenvalues(&scaled)?;
    let mut summary = CovarianceSummary::from_spectrum(n, spectrum, trace)?;
    summary.spectrum.retain(|&v| v > 0.0);
    if summary.spectrum.is_empty() {
        summary.spectrum.push(0.0);
    }
    Ok(summary)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `Δ = min_{i≠j} ‖x_i − x_j‖`.
pub fn min_pairwise_distance(data: &Matrix) -> Result<f64> {
    let n = data.rows();
    if n < 2 {
        return Err(invalid(format!("pairwise distance needs n >= 2, got {n}")));
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in 0..i {
            best = best.min(squared_distance(data.row(i), data.row(j)));
        }
    }
    Ok(best.sqrt())
}

/// Upper bound `1/n + exp(−Δ²/σ²)` on `λ_max(K)/n` for a Gaussian gram.
pub fn gaussian_lambda_bound(n: usize, delta: f64, sigma: f64) -> f64 {
    1.0 / n as f64 + (-(delta * delta) / (sigma * sigma)).exp()
}
