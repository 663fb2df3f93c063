//! Empirical checks of tail inequalities and of the union-of-classes lemma.
//!
//! A tail check draws samples of `F`, estimates `Pr{F > mean + s}` on a grid of
//! `s`, and counts grid points where the empirical tail exceeds the
//! theoretical one by more than a binomial slack.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{covariance, norm, Matrix};
use crate::mc::{mean_stderr, sample_oracle};
use crate::oracles::{exact_expectation, Budget, FiniteClass, DEFAULT_EXACT_SIGN_BITS};
use crate::quadrature::GaussHermite;
use crate::rng::{fill_normals, fill_signs, trial_rng};
use crate::variant::Variant;

pub const S_GRID_POINTS: usize = 32;
pub const S_GRID_LOW: f64 = 0.1;
pub const S_GRID_HIGH: f64 = 4.0;
/// Coordinate resamples per coordinate when estimating difference functionals.
pub const PROBES_PER_COORDINATE: usize = 64;
pub const LIPSCHITZ_PROBES: usize = 1000;
pub const SLACK_RULE: &str = "empirical > theoretical + 4*sqrt(p(1-p)/trials) + 1/trials";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheckReport {
    pub label: String,
    /// Scale `v` (or `A`, `B`, `L`) the grid and the theoretical curve use.
    pub scale: f64,
    pub mean: f64,
    pub s_grid: Vec<f64>,
    pub empirical_tail: Vec<f64>,
    pub theoretical_tail: Vec<f64>,
    pub slack: Vec<f64>,
    pub trials: usize,
    pub violations: usize,
    pub slack_rule: String,
}

impl TailCheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `4√(p̂(1−p̂)/trials) + 1/trials`.
pub fn binomial_slack(p: f64, trials: usize) -> f64 {
    let t = trials as f64;
    4.0 * (p * (1.0 - p) / t).sqrt() + 1.0 / t
}

/// 32 evenly spaced points from `0.1·scale` to `4·scale`.
pub fn s_grid(scale: f64) -> Vec<f64> {
    let step = (S_GRID_HIGH - S_GRID_LOW) / (S_GRID_POINTS - 1) as f64;
    (0..S_GRID_POINTS)
        .map(|i| scale * (S_GRID_LOW + step * i as f64))
        .collect()
}

/// Builds a report for samples of `F` against `theoretical(s)`. A zero scale
/// is only accepted for constant samples, in which case a unit grid is used.
pub fn tail_report(
    label: &str,
    samples: &[f64],
    scale: f64,
    theoretical: impl Fn(f64) -> f64,
) -> Result<TailCheckReport> {
    if samples.is_empty() {
        return Err(invalid("tail check needs at least one sample"));
    }
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(invalid(format!("tail scale must be finite and non-negative, got {scale}")));
    }
    let trials = samples.len();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    // deviations within round-off of the mean count as zero
    let tol = 1e-12 * samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut dev: Vec<f64> = samples
        .iter()
        .map(|v| if (v - mean).abs() <= tol { 0.0 } else { v - mean })
        .collect();
    let grid_scale = if scale > 0.0 {
        scale
    } else if dev.iter().all(|d| *d == 0.0) {
        1.0
    } else {
        return Err(invalid(format!(
            "{label}: zero scale with non-constant samples"
        )));
    };
    dev.sort_by(f64::total_cmp);
    let s_grid = s_grid(grid_scale);
    let mut empirical_tail = Vec::with_capacity(S_GRID_POINTS);
    let mut theoretical_tail = Vec::with_capacity(S_GRID_POINTS);
    let mut slack = Vec::with_capacity(S_GRID_POINTS);
    let mut violations = 0;
    for &s in &s_grid {
        let above = trials - dev.partition_point(|d| *d <= s);
        let p = above as f64 / trials as f64;
        let th = theoretical(s);
        let sl = binomial_slack(p, trials);
        if p > th + sl {
            violations += 1;
        }
        empirical_tail.push(p);
        theoretical_tail.push(th);
        slack.push(sl);
    }
    Ok(TailCheckReport {
        label: label.to_string(),
        scale: grid_scale,
        mean,
        s_grid,
        empirical_tail,
        theoretical_tail,
        slack,
        trials,
        violations,
        slack_rule: SLACK_RULE.to_string(),
    })
}

/// Tail of the supremum of a linear process indexed by a set of radius
/// `sup_norm`: `exp(−s²/(8v²))` for signs, `exp(−s²/(2v²))` for normals.
pub fn tail_check_supremum(samples: &[f64], sup_norm: f64, variant: Variant) -> Result<TailCheckReport> {
    let v = sup_norm;
    if !(v > 0.0) {
        return Err(invalid(format!("sup norm must be positive, got {v}")));
    }
    let denom = variant.tail_denominator();
    tail_report(&format!("supremum/{variant}"), samples, v, |s| {
        (-s * s / (denom * v * v)).exp()
    })
}

/// Which difference functional drives a bounded-difference check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceFunctional {
    /// `A² = ‖Σ_k (sup_k F − inf_k F)²‖_∞`, tail `exp(−2s²/A²)`.
    Range,
    /// `B² = ‖Σ_k (F − inf_k F)²‖_∞`, tail `exp(−s²/(2B²))`.
    LowerDeviation,
}

impl DifferenceFunctional {
    pub fn theoretical(self, s: f64, squared: f64) -> f64 {
        match self {
            DifferenceFunctional::Range => (-2.0 * s * s / squared).exp(),
            DifferenceFunctional::LowerDeviation => (-s * s / (2.0 * squared)).exp(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            DifferenceFunctional::Range => "bounded-difference/range",
            DifferenceFunctional::LowerDeviation => "bounded-difference/lower-deviation",
        }
    }
}

/// Function on a product space with iid coordinates drawn by `sampler`.
pub struct ProductFunction<F, S> {
    pub dim: usize,
    pub f: F,
    pub sampler: S,
}

impl<F, S> ProductFunction<F, S>
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = (self.sampler)(rng);
        }
    }

    /// Per-coordinate `(inf_k F, sup_k F)` at `x` over resampled values.
    fn coordinate_ranges(&self, x: &[f64], replacements: &[Vec<f64>]) -> Vec<(f64, f64)> {
        let fx = (self.f)(x);
        let mut y = x.to_vec();
        (0..self.dim)
            .map(|k| {
                let (mut lo, mut hi) = (fx, fx);
                for &r in &replacements[k] {
                    y[k] = r;
                    let v = (self.f)(&y);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                y[k] = x[k];
                (lo, hi)
            })
            .collect()
    }

    fn functional_at(&self, which: DifferenceFunctional, x: &[f64], replacements: &[Vec<f64>]) -> f64 {
        let fx = (self.f)(x);
        self.coordinate_ranges(x, replacements)
            .into_iter()
            .map(|(lo, hi)| match which {
                DifferenceFunctional::Range => (hi - lo).powi(2),
                DifferenceFunctional::LowerDeviation => (fx - lo).powi(2),
            })
            .sum()
    }

    /// Probe estimate of `A²` or `B²`: the functional is evaluated with
    /// [`PROBES_PER_COORDINATE`] replacement values per coordinate and
    /// maximized by coordinate ascent over the base point from several
    /// random starts. The estimate can only undershoot the true value.
    pub fn estimate_functional(&self, which: DifferenceFunctional, seed: u64) -> f64 {
        const STARTS: u64 = 8;
        const MAX_SWEEPS: usize = 32;
        (0..STARTS)
            .into_par_iter()
            .map(|start| {
                let mut rng = trial_rng(seed, start);
                let replacements: Vec<Vec<f64>> = (0..self.dim)
                    .map(|_| (0..PROBES_PER_COORDINATE).map(|_| (self.sampler)(&mut rng)).collect())
                    .collect();
                let mut x = vec![0.0; self.dim];
                self.draw(&mut rng, &mut x);
                let mut best = self.functional_at(which, &x, &replacements);
                for _ in 0..MAX_SWEEPS {
                    let before = best;
                    for k in 0..self.dim {
                        let keep = x[k];
                        let mut best_value = keep;
                        for &r in &replacements[k] {
                            x[k] = r;
                            let v = self.functional_at(which, &x, &replacements);
                            if v > best {
                                best = v;
                                best_value = r;
                            }
                        }
                        x[k] = best_value;
                    }
                    if best <= before {
                        break;
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Samples `F` at `trials` independent points, in trial order.
    pub fn samples(&self, trials: usize, seed: u64) -> Vec<f64> {
        (0..trials)
            .into_par_iter()
            .map_init(
                || vec![0.0; self.dim],
                |buf, j| {
                    self.draw(&mut trial_rng(seed, j as u64), buf);
                    (self.f)(buf)
                },
            )
            .collect()
    }
}

/// Bounded-difference tail check. `squared` supplies `A²` or `B²` in closed
/// form; when `None` it is estimated by probing.
pub fn bounded_difference_check<F, S>(
    function: &ProductFunction<F, S>,
    which: DifferenceFunctional,
    squared: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<TailCheckReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let sq = match squared {
        Some(v) if v >= 0.0 && v.is_finite() => v,
        Some(v) => return Err(invalid(format!("difference functional must be non-negative, got {v}"))),
        None => function.estimate_functional(which, seed ^ 0xD1FF),
    };
    let samples = function.samples(trials, seed);
    if sq == 0.0 {
        // constant F is the only way to have vanishing differences
        return tail_report(which.label(), &samples, 0.0, |_| 1.0);
    }
    tail_report(which.label(), &samples, sq.sqrt(), |s| which.theoretical(s, sq))
}

/// Checks `|f(x) − f(y)| ≤ L‖x − y‖` on random pairs of normal vectors, half
/// of them nearby pairs to probe local slopes.
pub fn check_lipschitz(f: impl Fn(&[f64]) -> f64, dim: usize, lipschitz: f64, probes: usize, seed: u64) -> Result<()> {
    let mut rng = trial_rng(seed, u64::MAX);
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for p in 0..probes {
        fill_normals(&mut rng, &mut x);
        fill_normals(&mut rng, &mut y);
        if p % 2 == 1 {
            let h: f64 = rng.random_range(1e-4..1e-1);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = xi + h * *yi;
            }
        }
        let gap = (f(&x) - f(&y)).abs();
        let dist = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if gap > lipschitz * dist * (1.0 + 1e-9) + 1e-12 {
            return Err(invalid(format!(
                "declared Lipschitz constant {lipschitz} falsified: |f(x)-f(y)| = {gap} at distance {dist}"
            )));
        }
    }
    Ok(())
}

/// Gaussian concentration of a Lipschitz function: `exp(−s²/(2L²))`.
pub fn gaussian_lipschitz_check(
    f: impl Fn(&[f64]) -> f64 + Sync,
    dim: usize,
    lipschitz: f64,
    trials: usize,
    seed: u64,
) -> Result<TailCheckReport> {
    if !(lipschitz > 0.0) {
        return Err(invalid(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    check_lipschitz(&f, dim, lipschitz, LIPSCHITZ_PROBES, seed)?;
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |buf, j| {
                fill_normals(&mut trial_rng(seed, j as u64), buf);
                f(buf)
            },
        )
        .collect();
    let l = lipschitz;
    tail_report("gaussian-lipschitz", &samples, l, |s| (-s * s / (2.0 * l * l)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceVerdict {
    pub trials: usize,
    /// Empirical `E‖Σ εᵢ xᵢ‖` and its standard error.
    pub mean_norm: f64,
    pub mean_norm_stderr: f64,
    /// `√(n·tr Ĉ)`.
    pub bound: f64,
    /// Empirical `E‖Σ εᵢ xᵢ‖²` and its standard error.
    pub second_moment: f64,
    pub second_moment_stderr: f64,
    /// `n·tr Ĉ`, the exact second moment.
    pub exact_second_moment: f64,
    pub bound_holds: bool,
    pub second_moment_matches: bool,
}

impl TraceVerdict {
    pub fn passed(&self) -> bool {
        self.bound_holds && self.second_moment_matches
    }
}

/// Checks `E‖Σ εᵢ xᵢ‖ ≤ √(n tr Ĉ)` (within 3 stderr) and
/// `E‖Σ εᵢ xᵢ‖² = n tr Ĉ` (within 4 stderr).
pub fn trace_inequality_check(data: &Matrix, trials: usize, seed: u64) -> Result<TraceVerdict> {
    if trials < 2 {
        return Err(invalid("trace check needs at least 2 trials"));
    }
    let n = data.rows();
    let exact = n as f64 * covariance(data)?.trace;
    let norms: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, j| {
                fill_signs(&mut trial_rng(seed, j as u64), buf);
                norm(&data.weighted_row_sum(buf))
            },
        )
        .collect();
    let (mean_norm, se1) = mean_stderr(norms.iter().copied());
    let (second, se2) = mean_stderr(norms.iter().map(|v| v * v));
    let bound = exact.sqrt();
    // round-off allowance for deterministic cases with zero spread
    let tol1 = 1e-12 * bound.max(1.0);
    let tol2 = 1e-12 * exact.max(1.0);
    Ok(TraceVerdict {
        trials,
        mean_norm,
        mean_norm_stderr: se1,
        bound,
        second_moment: second,
        second_moment_stderr: se2,
        exact_second_moment: exact,
        bound_holds: mean_norm <= bound + 3.0 * se1 + tol1,
        second_moment_matches: (second - exact).abs() <= 4.0 * se2 + tol2,
    })
}

/// How the expectations in a union-lemma check are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LemmaMode {
    /// Enumerate all `2ⁿ` sign vectors (Rademacher only).
    Exact,
    /// Tensor-product Gauss–Hermite rule with `nodes` points per coordinate
    /// (Gaussian only).
    Quadrature { nodes: usize },
    /// Monte-Carlo with common random numbers; 3 stderr slack.
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub variant: Variant,
    pub mode: LemmaMode,
    pub class_count: usize,
    pub sup_norm: f64,
    pub union_expectation: f64,
    pub class_expectations: Vec<f64>,
    /// `max_m E_m + c·v·√(ln M)`.
    pub bound: f64,
    /// Statistical allowance added to the bound (0 for exact and quadrature).
    pub allowance: f64,
    pub small_class_warning: bool,
    pub passed: bool,
}

/// Verifies `E sup_{∪A_m} ≤ max_m E sup_{A_m} + c·v·√(ln M)` on finite sets.
pub fn lemma_main_check(sets: &[FiniteClass], variant: Variant, mode: LemmaMode, budget: Budget) -> Result<LemmaVerdict> {
    let union = FiniteClass::union(sets)?;
    let v = union.sup_norm();
    let dim = union.dim();
    let (union_e, class_e, allowance) = match (mode, variant) {
        (LemmaMode::Exact, Variant::Rademacher) => {
            let bits = (budget.0.max(1) as f64).log2().floor().min(DEFAULT_EXACT_SIGN_BITS as f64) as u32;
            let u = exact_expectation(&union, bits)?.value;
            let c = sets
                .iter()
                .map(|s| exact_expectation(s, bits).map(|r| r.value))
                .collect::<Result<Vec<_>>>()?;
            (u, c, 0.0)
        }
        (LemmaMode::Quadrature { nodes }, Variant::Gaussian) => {
            let rule = GaussHermite::new(nodes)?;
            let u = rule.tensor_expectation(dim, budget, |g| union.sup(g))?;
            let c = sets
                .iter()
                .map(|s| rule.tensor_expectation(dim, budget, |g| s.sup(g)))
                .collect::<Result<Vec<_>>>()?;
            (u, c, 0.0)
        }
        (LemmaMode::MonteCarlo { trials, seed }, _) => {
            if trials < 2 {
                return Err(invalid("need at least 2 trials"));
            }
            // per-trial suprema of every set share the same noise
            let joint = (dim, |g: &[f64]| union.sup(g));
            let u_samples = sample_oracle(&joint, trials, seed, variant);
            let (u, _) = mean_stderr(u_samples.iter().map(|s| s.value));
            let mut class_e = Vec::with_capacity(sets.len());
            let mut best = (f64::NEG_INFINITY, 0.0);
            for s in sets {
                let one = (dim, |g: &[f64]| s.sup(g));
                let samples = sample_oracle(&one, trials, seed, variant);
                let diffs = u_samples.iter().zip(&samples).map(|(a, b)| a.value - b.value);
                let (m, _) = mean_stderr(samples.iter().map(|r| r.value));
                let (_, se_diff) = mean_stderr(diffs);
                class_e.push(m);
                if m > best.0 {
                    best = (m, se_diff);
                }
            }
            (u, class_e, 3.0 * best.1)
        }
        (mode, variant) => {
            return Err(Error::InvalidInput(format!(
                "lemma check mode {mode:?} does not support the {variant} variant"
            )))
        }
    };
    let m = sets.len();
    let max_class = class_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bound = max_class + variant.lemma_constant() * v * (m as f64).ln().sqrt();
    let tol = 1e-12 * union_e.abs().max(v).max(1.0);
    Ok(LemmaVerdict {
        variant,
        mode,
        class_count: m,
        sup_norm: v,
        union_expectation: union_e,
        class_expectations: class_e,
        bound,
        allowance,
        small_class_warning: m < 4,
        passed: union_e <= bound + allowance + tol,
    })
}
