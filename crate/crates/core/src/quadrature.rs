//! Gauss–Hermite rules for expectations under standard normal noise.

use crate::error::{invalid, Error, Result};
use crate::linalg::tridiagonal_eigenvalues;
use crate::oracles::Budget;

const NEWTON_ITERATIONS: usize = 100;

/// Nodes and weights integrating against the standard normal density.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// `q`-point rule, exact for polynomials of degree `< 2q`.
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(invalid("quadrature needs at least one node"));
        }
        let (x, w) = physicists_rule(q)?;
        // ∫ f(x) e^{−x²} dx  →  E f(Z) with Z = √2 x
        let scale = std::f64::consts::PI.sqrt();
        Ok(Self {
            nodes: x.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
            weights: w.iter().map(|v| v / scale).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    /// Tensor-product expectation of `f` over `dim` independent normals.
    pub fn tensor_expectation(&self, dim: usize, budget: Budget, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
        let q = self.len();
        let points = (q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        budget.check("tensor-product quadrature", points)?;
        let mut idx = vec![0usize; dim];
        let mut x: Vec<f64> = vec![self.nodes[0]; dim];
        let mut total = 0.0;
        loop {
            let w: f64 = idx.iter().map(|&i| self.weights[i]).product();
            if w > 0.0 {
                total += w * f(&x);
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == dim {
                    return Ok(total);
                }
                idx[pos] += 1;
                if idx[pos] < q {
                    x[pos] = self.nodes[idx[pos]];
                    break;
                }
                idx[pos] = 0;
                x[pos] = self.nodes[0];
                pos += 1;
            }
        }
    }
}

/// Roots and weights for the weight `e^{−x²}`: roots from the eigenvalues of
/// the Jacobi matrix, polished by Newton's method on the orthonormal Hermite
/// recurrence, which also yields the weights.
fn physicists_rule(q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let off: Vec<f64> = (1..q).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut x = tridiagonal_eigenvalues(&vec![0.0; q], &off)?;
    x.sort_by(f64::total_cmp);
    let mut w = vec![0.0; q];
    for (xi, wi) in x.iter_mut().zip(w.iter_mut()) {
        let mut z = *xi;
        let mut pp = derivative_ratio(z, q).1;
        for _ in 0..NEWTON_ITERATIONS {
            let (p, d) = derivative_ratio(z, q);
            pp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        if !z.is_finite() || !pp.is_finite() {
            return Err(Error::NumericFailure(format!("Hermite root near {xi} diverged")));
        }
        *xi = z;
        *wi = 2.0 / (pp * pp);
    }
    Ok((x, w))
}

/// Orthonormal Hermite polynomial of degree `q` at `z` and its derivative.
fn derivative_ratio(z: f64, q: usize) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..q {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * q as f64).sqrt() * p2)
}
