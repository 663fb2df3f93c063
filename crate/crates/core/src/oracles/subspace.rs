//! Multitask subspace learning: `sup_S Σ_t ‖P_S u_t‖` over `K`-dimensional subspaces.
//!
//! No closed form is available for `K < min(T, d)`, so the oracle returns a
//! bracket. The lower end is the best objective found by alternating
//! maximization; the upper end is `min(√(T Σ_{j≤K} λ_j(U)), Σ_t ‖u_t‖)` with
//! `U = Σ_t u_t u_tᵀ`, both of which dominate every feasible objective.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SupResult;
use crate::data::MultitaskDataset;
use crate::error::{invalid, Result};
use crate::linalg::{axpy, dot, norm, sym_eigen, Matrix};

const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceOptions {
    /// Starts per stage: one eigen-initialized frame plus `restarts - 1` random frames.
    pub restarts: usize,
    pub max_iterations: usize,
    pub relative_tol: f64,
    /// Floor on `‖P_S u_t‖` when forming reweighting coefficients.
    pub weight_floor: f64,
    pub seed: u64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iterations: 100,
            relative_tol: 1e-9,
            weight_floor: 1e-12,
            seed: DEFAULT_SEED,
        }
    }
}

/// Orthonormal frame stored as basis vectors.
type Frame = Vec<Vec<f64>>;

pub fn subspace_sup(
    signs: &[f64],
    data: &MultitaskDataset,
    k: usize,
    options: &SubspaceOptions,
) -> Result<SupResult> {
    if k == 0 || k > data.dim() {
        return Err(invalid(format!(
            "subspace dimension K = {k} must lie in 1..={}",
            data.dim()
        )));
    }
    let u = data.task_sums(signs)?;
    Ok(subspace_bracket(&u, k, options))
}

/// Relative eigenvalue cutoff for the span of the `u_t`.
const SPAN_TOL: f64 = 1e-12;

/// Certified upper end `min(√(T·Σ_{j≤k} λ_j(Σ_t u_t u_tᵀ)), Σ_t ‖u_t‖)`.
pub fn subspace_upper(u: &[Vec<f64>], k: usize) -> f64 {
    let t = u.len();
    let d = u.first().map_or(0, |v| v.len());
    let total: f64 = u.iter().map(|v| norm(v)).sum();
    if total == 0.0 || k >= d || k >= t {
        return total;
    }
    let eig = sym_eigen(&outer_sum(u, None)).expect("outer-product sum is symmetric");
    upper_from(&eig.values, t, k, total)
}

fn upper_from(values: &[f64], t: usize, k: usize, total: f64) -> f64 {
    let top: f64 = values.iter().take(k).map(|v| v.max(0.0)).sum();
    (t as f64 * top).sqrt().min(total)
}

/// Bracket for `sup_{dim S = k} Σ_t ‖P_S u_t‖`; exact whenever `k ≥ min(T, d)`.
///
/// The search runs in coordinates of `span{u_t}`: some optimal subspace lies
/// in the span, so nothing is lost, and every frame found there is feasible.
pub fn subspace_bracket(u: &[Vec<f64>], k: usize, options: &SubspaceOptions) -> SupResult {
    let t = u.len();
    let d = u.first().map_or(0, |v| v.len());
    let total: f64 = u.iter().map(|v| norm(v)).sum();
    if total == 0.0 || k >= d || k >= t {
        // a k-dimensional subspace can contain every u_t
        return SupResult::exact(total);
    }
    let eig = sym_eigen(&outer_sum(u, None)).expect("outer-product sum is symmetric");
    let upper = upper_from(&eig.values, t, k, total);

    let cutoff = SPAN_TOL * eig.values[0].max(0.0);
    let r = eig.values.iter().take_while(|&&v| v > cutoff).count().max(1);
    let basis: Frame = (0..r).map(|j| eig.vector(j)).collect();
    let c: Vec<Vec<f64>> = u.iter().map(|ut| basis.iter().map(|q| dot(q, ut)).collect()).collect();
    if k >= r {
        let reduced: f64 = c.iter().map(|v| norm(v)).sum();
        return SupResult::bracket(reduced.min(upper), upper);
    }

    let mut best_frame: Frame = Vec::new();
    let mut best = 0.0;
    for stage in 1..=k {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut starts: Vec<Frame> = Vec::with_capacity(options.restarts + 1);
        // the eigen-init frame is the leading coordinate axes of the span basis
        starts.push(
            (0..stage)
                .map(|j| {
                    let mut e = vec![0.0; r];
                    e[j] = 1.0;
                    e
                })
                .collect(),
        );
        for _ in 1..options.restarts {
            starts.push(random_frame(r, stage, &mut rng));
        }
        if !best_frame.is_empty() {
            starts.push(extend_frame(&best_frame, &c));
        }
        let mut stage_best = (f64::NEG_INFINITY, Vec::new());
        for start in starts {
            let (obj, frame) = ascend(&c, start, options);
            if obj > stage_best.0 {
                stage_best = (obj, frame);
            }
        }
        best = stage_best.0;
        best_frame = stage_best.1;
    }
    SupResult::bracket(best.min(upper), upper)
}

fn objective(u: &[Vec<f64>], frame: &Frame) -> f64 {
    u.iter().map(|ut| projected_norm(ut, frame)).sum()
}

fn projected_norm(v: &[f64], frame: &Frame) -> f64 {
    frame.iter().map(|q| dot(q, v).powi(2)).sum::<f64>().sqrt()
}

fn project(v: &[f64], frame: &Frame) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for q in frame {
        axpy(dot(q, v), q, &mut out);
    }
    out
}

/// `Σ_t w_t u_t u_tᵀ` (unit weights when `weights` is `None`).
fn outer_sum(u: &[Vec<f64>], weights: Option<&[f64]>) -> Matrix {
    let d = u[0].len();
    let mut m = Matrix::zeros(d, d);
    for (idx, ut) in u.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[idx]);
        for i in 0..d {
            let a = w * ut[i];
            if a != 0.0 {
                axpy(a, ut, m.row_mut(i));
            }
        }
    }
    m
}

fn top_frame(m: &Matrix, k: usize) -> Frame {
    let eig = sym_eigen(m).expect("iteration matrices are symmetric");
    (0..k).map(|j| eig.vector(j)).collect()
}

/// Alternating maximization from `frame`; returns the best objective and frame.
///
/// Each round tries two candidate frames and keeps the better one:
/// the top eigenspace of `Σ_t u_t u_tᵀ / ‖P u_t‖`, and the top eigenspace of
/// `sym(Σ_t u_t z_tᵀ)` with `z_t = P u_t / ‖P u_t‖`. The second step never
/// decreases the objective, since `Σ ⟨z_t, P' u_t⟩ ≤ Σ ‖P' u_t‖`.
fn ascend(u: &[Vec<f64>], mut frame: Frame, options: &SubspaceOptions) -> (f64, Frame) {
    let k = frame.len();
    let d = u[0].len();
    let mut obj = objective(u, &frame);
    for _ in 0..options.max_iterations {
        let norms: Vec<f64> = u.iter().map(|ut| projected_norm(ut, &frame)).collect();

        let weights: Vec<f64> = norms.iter().map(|n| 1.0 / n.max(options.weight_floor)).collect();
        let reweighted = top_frame(&outer_sum(u, Some(&weights)), k);

        let mut sym = Matrix::zeros(d, d);
        for (ut, &n) in u.iter().zip(&norms) {
            if n <= options.weight_floor {
                continue;
            }
            let z = project(ut, &frame);
            for i in 0..d {
                for j in 0..d {
                    let v = sym.get(i, j) + 0.5 * (ut[i] * z[j] + z[i] * ut[j]) / n;
                    sym.set(i, j, v);
                }
            }
        }
        let bilinear = top_frame(&sym, k);

        let (cand_obj, cand) = [reweighted, bilinear]
            .into_iter()
            .map(|f| (objective(u, &f), f))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("two candidates");
        if cand_obj <= obj * (1.0 + options.relative_tol) {
            if cand_obj > obj {
                obj = cand_obj;
                frame = cand;
            }
            break;
        }
        obj = cand_obj;
        frame = cand;
    }
    (obj, frame)
}

fn random_frame(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Frame {
    let raw: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    orthonormalize(raw, d)
}

/// Adds the top direction of the residual `(I − P) U (I − P)` to `frame`.
fn extend_frame(frame: &Frame, u: &[Vec<f64>]) -> Frame {
    let d = u[0].len();
    let residuals: Vec<Vec<f64>> = u
        .iter()
        .map(|ut| {
            let p = project(ut, frame);
            ut.iter().zip(&p).map(|(a, b)| a - b).collect()
        })
        .collect();
    let mut candidates = frame.clone();
    candidates.push(top_frame(&outer_sum(&residuals, None), 1).remove(0));
    orthonormalize(candidates, d)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass; degenerate
/// vectors are replaced by standard basis vectors.
fn orthonormalize(vectors: Vec<Vec<f64>>, d: usize) -> Frame {
    let want = vectors.len();
    let mut out: Frame = Vec::with_capacity(want);
    let fallback = (0..d).map(|i| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    });
    for mut v in vectors.into_iter().chain(fallback) {
        if out.len() == want {
            break;
        }
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}
