//! Monte-Carlo estimation of Rademacher and Gaussian complexities.
//!
//! Trials run in parallel; each trial draws from its own stream (see
//! [`crate::rng`]) and results are reduced in trial order, so the output is
//! bit-identical regardless of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::MultitaskDataset;
use crate::error::{invalid, Result};
use crate::oracles::{Budget, ClassSpec, SupOracle, SupResult};
use crate::rng::{fill_noise, trial_rng};
use crate::variant::Variant;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_TAIL_TRIALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    /// `normalizer ×` the average supremum.
    pub mean: f64,
    /// Standard error of `mean`, in the same normalized units.
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub variant: Variant,
    /// `2 / (nT)`.
    pub normalizer: f64,
}

/// Estimate of a complexity. `upper` is present when the oracle only
/// brackets the supremum; `estimate` then averages the certified lower ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub estimate: RademacherEstimate,
    pub upper: Option<RademacherEstimate>,
}

impl ComplexityEstimate {
    /// The estimate to compare against upper bounds: the upper bracket when
    /// available, since it is certified to dominate the true supremum.
    pub fn conservative(&self) -> &RademacherEstimate {
        self.upper.as_ref().unwrap_or(&self.estimate)
    }
}

/// Trials drawn and evaluated together; oracles with a batched path reuse
/// their data across the chunk.
const TRIAL_CHUNK: usize = 64;

/// Raw oracle results for trials `0..trials`, in trial order.
pub fn sample_oracle<O: SupOracle + ?Sized>(oracle: &O, trials: usize, seed: u64, variant: Variant) -> Vec<SupResult> {
    let len = oracle.sign_count();
    let chunks: Vec<Vec<SupResult>> = (0..trials.div_ceil(TRIAL_CHUNK))
        .into_par_iter()
        .map_init(
            || vec![0.0; len * TRIAL_CHUNK],
            |buf, c| {
                let first = c * TRIAL_CHUNK;
                let count = TRIAL_CHUNK.min(trials - first);
                let signs = &mut buf[..len * count];
                for (k, slot) in signs.chunks_exact_mut(len.max(1)).enumerate().take(count) {
                    fill_noise(variant, &mut trial_rng(seed, (first + k) as u64), slot);
                }
                let mut out = Vec::with_capacity(count);
                if len == 0 {
                    out.extend((0..count).map(|_| oracle.evaluate(&[])));
                } else {
                    oracle.evaluate_batch(signs, &mut out);
                }
                out
            },
        )
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Mean and standard error (`sample std / √count`) of `values`.
pub fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = values.clone().count();
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (count - 1) as f64).sqrt() / (count as f64).sqrt())
}

fn summarize(values: impl Iterator<Item = f64> + Clone, trials: usize, seed: u64, variant: Variant, normalizer: f64) -> RademacherEstimate {
    let (mean, stderr) = mean_stderr(values);
    RademacherEstimate {
        mean: normalizer * mean,
        stderr: normalizer * stderr,
        trials,
        seed,
        variant,
        normalizer,
    }
}

/// Estimates `normalizer · E sup` for an arbitrary oracle.
pub fn estimate_oracle<O: SupOracle + ?Sized>(
    oracle: &O,
    normalizer: f64,
    trials: usize,
    seed: u64,
    variant: Variant,
) -> Result<ComplexityEstimate> {
    if trials < 2 {
        return Err(invalid(format!("need at least 2 trials, got {trials}")));
    }
    let samples = sample_oracle(oracle, trials, seed, variant);
    let estimate = summarize(samples.iter().map(|s| s.value), trials, seed, variant, normalizer);
    let upper = (!samples.iter().all(|s| s.exact))
        .then(|| summarize(samples.iter().map(|s| s.upper), trials, seed, variant, normalizer));
    Ok(ComplexityEstimate { estimate, upper })
}

/// `(2/(nT)) E sup_{f∈F} Σ_{t,i} ε_{ti} f(x_{ti})` for the class `spec` on `data`.
pub fn estimate_complexity(
    spec: &ClassSpec,
    data: &MultitaskDataset,
    trials: usize,
    seed: u64,
    variant: Variant,
) -> Result<ComplexityEstimate> {
    estimate_complexity_with_budget(spec, data, trials, seed, variant, Budget::from_env()?)
}

pub fn estimate_complexity_with_budget(
    spec: &ClassSpec,
    data: &MultitaskDataset,
    trials: usize,
    seed: u64,
    variant: Variant,
    budget: Budget,
) -> Result<ComplexityEstimate> {
    let oracle = spec.oracle(data, budget)?;
    estimate_oracle(&oracle, normalizer(data), trials, seed, variant)
}

/// `2 / (nT)`.
pub fn normalizer(data: &MultitaskDataset) -> f64 {
    2.0 / data.total_samples() as f64
}

/// Un-normalized supremum values per trial (lower bracket ends for
/// bracketing oracles).
pub fn sample_sup_distribution(
    spec: &ClassSpec,
    data: &MultitaskDataset,
    trials: usize,
    seed: u64,
    variant: Variant,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(invalid("need at least 1 trial"));
    }
    let oracle = spec.oracle(data, Budget::from_env()?)?;
    Ok(sample_oracle(&oracle, trials, seed, variant)
        .into_iter()
        .map(|s| s.value)
        .collect())
}
