use super::SupResult;
use crate::error::{invalid, Result};
use crate::kernel::GramMatrix;
use crate::linalg::{dot, dot_many};

/// `max_m √(εᵀ K_m ε)`: the dual group norm of `Σ εᵢ ψ(xᵢ)`.
pub fn mkl_sup(signs: &[f64], grams: &[GramMatrix]) -> Result<SupResult> {
    if grams.is_empty() {
        return Err(invalid("mkl supremum needs at least one gram matrix"));
    }
    if let Some(g) = grams.iter().find(|g| g.n() != signs.len()) {
        return Err(invalid(format!(
            "gram of size {} does not match {} signs",
            g.n(),
            signs.len()
        )));
    }
    let best = grams
        .iter()
        .map(|g| g.quadratic_form(signs).max(0.0).sqrt())
        .fold(0.0, f64::max);
    Ok(SupResult::exact(best))
}

/// Relative diagonal tolerance at which the pivoted Cholesky factorization stops.
const PIVOT_TOL: f64 = 1e-14;

/// Low-rank factor `K ≈ L Lᵀ` from diagonally pivoted Cholesky, with the
/// trace of the (PSD) remainder kept to certify an upper bracket.
#[derive(Debug, Clone)]
pub struct MklFactors {
    n: usize,
    /// Columns of `L`, each of length `n`.
    columns: Vec<Vec<f64>>,
    residual_trace: f64,
}

impl MklFactors {
    pub fn new(gram: &GramMatrix) -> Result<Self> {
        let k = gram.entries();
        let n = gram.n();
        let mut diag: Vec<f64> = (0..n).map(|i| k.get(i, i)).collect();
        let scale = diag.iter().cloned().fold(0.0, f64::max);
        let tol = PIVOT_TOL * scale;
        let mut used = vec![false; n];
        let mut columns: Vec<Vec<f64>> = Vec::new();

        for _ in 0..n {
            let (p, &dp) = match diag
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .max_by(|a, b| a.1.total_cmp(b.1))
            {
                Some(x) => x,
                None => break,
            };
            if dp <= tol {
                break;
            }
            let root = dp.sqrt();
            let mut col = vec![0.0; n];
            for i in 0..n {
                if used[i] || i == p {
                    continue;
                }
                let mut v = k.get(i, p);
                for c in &columns {
                    v -= c[i] * c[p];
                }
                col[i] = v / root;
            }
            col[p] = root;
            used[p] = true;
            for i in 0..n {
                if !used[i] {
                    diag[i] = (diag[i] - col[i] * col[i]).max(0.0);
                }
            }
            diag[p] = 0.0;
            columns.push(col);
        }
        let residual_trace = (0..n).filter(|&i| !used[i]).map(|i| diag[i]).sum();
        Ok(Self {
            n,
            columns,
            residual_trace,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    /// `(‖Lᵀε‖², ‖Lᵀε‖² + ‖ε‖²·tr(R))`, a bracket around `εᵀKε`.
    pub fn quadratic_bracket(&self, eps: &[f64]) -> (f64, f64) {
        let q: f64 = self
            .columns
            .iter()
            .map(|c| {
                let s = dot(c, eps);
                s * s
            })
            .sum();
        (q, q + dot(eps, eps) * self.residual_trace)
    }
}

pub(super) fn factored_sup(factors: &[MklFactors], signs: &[f64]) -> SupResult {
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    for f in factors {
        let (q, u) = f.quadratic_bracket(signs);
        lo = lo.max(q.sqrt());
        hi = hi.max(u.sqrt());
    }
    finish(factors, lo, hi)
}

fn finish(factors: &[MklFactors], lo: f64, hi: f64) -> SupResult {
    if factors.iter().all(|f| f.residual_trace == 0.0) {
        SupResult::exact(lo)
    } else {
        SupResult::bracket(lo, hi)
    }
}

/// Same values as [`factored_sup`] on each packed sign vector. Each factor
/// column is applied to the whole batch while it is in cache.
pub(super) fn factored_sup_batch(factors: &[MklFactors], signs: &[f64], out: &mut Vec<SupResult>) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime
            unsafe { batch_avx2(factors, signs, out) };
            return;
        }
    }
    batch_body(factors, signs, out);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn batch_avx2(factors: &[MklFactors], signs: &[f64], out: &mut Vec<SupResult>) {
    batch_body(factors, signs, out);
}

/// Factor columns evaluated together in the batched kernel.
const BLOCK: usize = 4;

#[inline(always)]
fn batch_body(factors: &[MklFactors], signs: &[f64], out: &mut Vec<SupResult>) {
    let n = factors[0].n.max(1);
    let batch: Vec<&[f64]> = signs.chunks_exact(n).collect();
    let mut lo = vec![0.0f64; batch.len()];
    let mut hi = vec![0.0f64; batch.len()];
    let mut q = vec![0.0f64; batch.len()];
    for f in factors {
        q.iter_mut().for_each(|v| *v = 0.0);
        let mut cols = f.columns.chunks_exact(BLOCK);
        for block in &mut cols {
            let rows: [&[f64]; BLOCK] = std::array::from_fn(|r| &block[r][..]);
            for (qb, eps) in q.iter_mut().zip(&batch) {
                // same left-to-right accumulation as the single-vector path
                for s in dot_many(rows, eps) {
                    *qb += s * s;
                }
            }
        }
        for c in cols.remainder() {
            for (qb, eps) in q.iter_mut().zip(&batch) {
                let s = dot(c, eps);
                *qb += s * s;
            }
        }
        for (b, eps) in batch.iter().enumerate() {
            let u = q[b] + dot(eps, eps) * f.residual_trace;
            lo[b] = lo[b].max(q[b].sqrt());
            hi[b] = hi[b].max(u.sqrt());
        }
    }
    out.extend(lo.iter().zip(&hi).map(|(&l, &h)| finish(factors, l, h)));
}
