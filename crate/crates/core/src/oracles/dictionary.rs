//! Dictionary-learning classes with polyhedral task-weight norms.
//!
//! For per-task sums `u_t = Σᵢ ε_{ti} x_{ti}` and a dictionary of unit atoms,
//! the linear objective is maximized at an extreme point of the weight ball:
//!
//! * sparsity norm: each task picks one atom `φ_t` and a sign `σ_t`, giving
//!   `Σ_k ‖Σ_{t:φ_t=k} σ_t u_t‖`. Signs in different blocks are independent,
//!   so the value is a maximum over partitions of the tasks into at most `K`
//!   blocks of the sum of per-block sharing values;
//! * sharing norm: all tasks use one atom with signs `v_t`, giving
//!   `max_v ‖Σ_t v_t u_t‖`.

use super::{Budget, SupResult};
use crate::data::MultitaskDataset;
use crate::error::{invalid, Result};
use crate::linalg::{axpy, norm};

pub(super) fn sharing_cost(t: usize) -> u128 {
    1u128 << t.saturating_sub(1).min(120)
}

/// Leaf count of the per-subset sign enumeration plus the partition DP.
pub(super) fn sparsity_cost(t: usize, k: usize) -> u128 {
    let t = t.min(75) as u32;
    3u128.pow(t) * (k.min(t as usize) as u128 + 1)
}

/// `max_{v ∈ {±1}^T} ‖Σ_t v_t u_t‖`, walking sign patterns in Gray-code order
/// with `v_0 = +1` fixed (the norm is invariant under a global flip).
pub fn sharing_value(u: &[Vec<f64>]) -> f64 {
    let t = u.len();
    if t == 0 {
        return 0.0;
    }
    let mut acc: Vec<f64> = vec![0.0; u[0].len()];
    for ut in u {
        axpy(1.0, ut, &mut acc);
    }
    let mut signs = vec![1.0; t];
    let mut best = norm(&acc);
    let patterns = 1u64 << (t - 1);
    for step in 1..patterns {
        // bit that flips between Gray codes step-1 and step
        let bit = step.trailing_zeros() as usize + 1;
        signs[bit] = -signs[bit];
        axpy(2.0 * signs[bit], &u[bit], &mut acc);
        best = best.max(norm(&acc));
    }
    best
}

/// Sharing value of every subset of tasks, indexed by bitmask.
fn subset_sharing_values(u: &[Vec<f64>]) -> Vec<f64> {
    let t = u.len();
    let d = u.first().map_or(0, |v| v.len());
    let mut h = vec![0.0; 1 << t];
    let mut levels = vec![vec![0.0; d]; t + 1];

    fn walk(u: &[Vec<f64>], level: usize, mask: usize, any: bool, levels: &mut [Vec<f64>], h: &mut [f64]) {
        if level == u.len() {
            if any {
                let v = norm(&levels[level]);
                if v > h[mask] {
                    h[mask] = v;
                }
            }
            return;
        }
        let (head, tail) = levels.split_at_mut(level + 1);
        let cur = &head[level];
        let next = &mut tail[0];

        next.copy_from_slice(cur);
        walk(u, level + 1, mask, any, levels, h);

        let (head, tail) = levels.split_at_mut(level + 1);
        let next = &mut tail[0];
        next.copy_from_slice(&head[level]);
        axpy(1.0, &u[level], next);
        walk(u, level + 1, mask | (1 << level), true, levels, h);

        if any {
            let (head, tail) = levels.split_at_mut(level + 1);
            let next = &mut tail[0];
            next.copy_from_slice(&head[level]);
            axpy(-1.0, &u[level], next);
            walk(u, level + 1, mask | (1 << level), true, levels, h);
        }
    }

    walk(u, 0, 0, false, &mut levels, &mut h);
    h
}

/// Supremum for the sparsity-norm dictionary class with `k` atoms.
pub fn sparsity_value(u: &[Vec<f64>], k: usize) -> f64 {
    let t = u.len();
    if t == 0 || k == 0 {
        return 0.0;
    }
    let h = subset_sharing_values(u);
    let full = (1usize << t) - 1;
    let mut prev = h.clone();
    for _ in 2..=k.min(t) {
        let mut cur = prev.clone();
        for s in 1..=full {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            // proper subsets B ⊊ S that contain the lowest task of S
            let mut sub = rest;
            loop {
                let block = low | sub;
                if block != s {
                    let v = h[block] + prev[s ^ block];
                    if v > cur[s] {
                        cur[s] = v;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        prev = cur;
    }
    prev[full]
}

fn check_signs(signs: &[f64], data: &MultitaskDataset) -> Result<()> {
    if signs.len() != data.total_samples() {
        return Err(invalid(format!(
            "expected {} signs, got {}",
            data.total_samples(),
            signs.len()
        )));
    }
    Ok(())
}

pub fn dict_sparsity_sup(
    signs: &[f64],
    data: &MultitaskDataset,
    k: usize,
    budget: Budget,
) -> Result<SupResult> {
    if k == 0 {
        return Err(invalid("dictionary size K must be at least 1"));
    }
    check_signs(signs, data)?;
    budget.check("sparsity-norm enumeration", sparsity_cost(data.task_count(), k))?;
    let u = data.task_sums(signs)?;
    Ok(SupResult::exact(sparsity_value(&u, k)))
}

/// The atom index `k*` of the extreme point is immaterial since every atom
/// ranges over the same unit ball, so `k` only enters through validation.
pub fn dict_sharing_sup(
    signs: &[f64],
    data: &MultitaskDataset,
    k: usize,
    budget: Budget,
) -> Result<SupResult> {
    if k == 0 {
        return Err(invalid("dictionary size K must be at least 1"));
    }
    check_signs(signs, data)?;
    budget.check("sharing-norm enumeration", sharing_cost(data.task_count()))?;
    let u = data.task_sums(signs)?;
    Ok(SupResult::exact(sharing_value(&u)))
}
