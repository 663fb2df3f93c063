//! Closed-form complexity bounds built from covariance summaries.
//!
//! Every family bound has the shape `𝔖 + c·𝔚·√(L / n)` where `𝔖` is the
//! largest single-class complexity, `𝔚` the weak parameter, `L` the log of
//! the (effective) number of classes and `c = 8` (Rademacher) or `4` (Gaussian).

use serde::{Deserialize, Serialize};

use crate::data::MultitaskDataset;
use crate::error::{invalid, Result};
use crate::kernel::{kernel_cov_summary, GramMatrix};
use crate::linalg::{covariance, CovarianceSummary, Matrix};
use crate::oracles::{ClassSpec, Family};
use crate::variant::Variant;

/// Number of log-spaced points in the covering-radius grid.
pub const ETA_GRID_POINTS: usize = 64;
pub const ETA_GRID_MIN: f64 = 1e-4;
pub const ETA_GRID_MAX: f64 = 3.9;

/// Result of the union-of-classes inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaBound {
    pub value: f64,
    /// Set when fewer than four classes are combined; the constant is then
    /// used outside the range it was stated for.
    pub small_class_warning: bool,
}

/// `max_m E_m + c·v·√(ln M)` for expectations of suprema over `M` sets whose
/// points have norm at most `sup_norm`.
pub fn lemma_main_bound(class_expectations: &[f64], sup_norm: f64, variant: Variant) -> Result<LemmaBound> {
    if class_expectations.is_empty() {
        return Err(invalid("need at least one class expectation"));
    }
    if !(sup_norm >= 0.0) || !sup_norm.is_finite() {
        return Err(invalid(format!("sup norm must be finite and non-negative, got {sup_norm}")));
    }
    let m = class_expectations.len();
    let best = class_expectations.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(LemmaBound {
        value: best + variant.lemma_constant() * sup_norm * (m as f64).ln().sqrt(),
        small_class_warning: m < 4,
    })
}

/// `𝔖 + 8𝔚√(ln M / n)`. `class_count` is real-valued so that `M = e` style
/// arguments work.
pub fn corollary_bound(strong: f64, weak: f64, class_count: f64, n: usize) -> f64 {
    corollary_bound_with(strong, weak, class_count.ln(), n, Variant::Rademacher)
}

/// [`corollary_bound`] with an explicit `ln M` and noise variant.
pub fn corollary_bound_with(strong: f64, weak: f64, ln_class_count: f64, n: usize, variant: Variant) -> f64 {
    strong + variant.weak_constant() * weak * (ln_class_count.max(0.0) / n as f64).sqrt()
}

/// `R + √(9 ln(2/δ) / (2n))`.
pub fn generalization_gap(complexity: f64, n: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("confidence δ = {delta} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    Ok(complexity + (9.0 * (2.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Bound on `E√λ_max(Ĉ)` for iid samples with `‖X‖ ≤ 1` in terms of the
/// true covariance's `λ_max`.
pub fn expected_lambda_bound(true_lambda_max: f64, n: usize, dim: usize) -> f64 {
    let r = dim.min(n).max(1) as f64;
    true_lambda_max.max(0.0).sqrt() + 4.0 * ((r.ln() + 1.0) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub name: String,
    pub value: f64,
}

/// Covering-radius details for the subspace bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaChoice {
    /// Radius used in the reported bound (grid optimum or caller-fixed).
    pub eta: f64,
    pub fixed: bool,
    /// `√(K/d)`.
    pub default_eta: f64,
    /// Full bound evaluated at `default_eta`.
    pub bound_at_default_eta: f64,
    /// `𝔖 + c√(Kλ ln(16d/K)/n)`, the closed form quoted for `η = √(K/d)`.
    pub closed_form_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: Family,
    pub variant: Variant,
    pub n: usize,
    pub tasks: usize,
    pub strong: f64,
    pub weak: f64,
    /// Log of the class count (`ln M`, or the effective count for the
    /// dictionary families); kept in log form since counts overflow.
    pub ln_class_count: f64,
    pub bound: f64,
    pub terms: Vec<BoundTerm>,
    /// `max_m √(tr(Ĉ_m) ln M / n)`, the trace-only comparator, for mkl and
    /// projection families.
    pub trace_comparator: Option<f64>,
    pub eta: Option<EtaChoice>,
}

impl BoundReport {
    fn from_terms(
        family: Family,
        variant: Variant,
        n: usize,
        tasks: usize,
        weak: f64,
        ln_class_count: f64,
        terms: Vec<(&str, f64)>,
    ) -> Self {
        let strong = terms[0].1;
        let bound = terms.iter().map(|t| t.1).sum();
        Self {
            family,
            variant,
            n,
            tasks,
            strong,
            weak,
            ln_class_count,
            bound,
            terms: terms
                .into_iter()
                .map(|(name, value)| BoundTerm {
                    name: name.to_string(),
                    value,
                })
                .collect(),
            trace_comparator: None,
            eta: None,
        }
    }

    /// Sum of the per-term values.
    pub fn reconstructed(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }
}

/// Bound for a union of `M` linear classes given their covariance summaries.
pub fn union_bound(
    family: Family,
    summaries: &[CovarianceSummary],
    n: usize,
    variant: Variant,
) -> Result<BoundReport> {
    if summaries.is_empty() {
        return Err(invalid("need at least one class"));
    }
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let nf = n as f64;
    let ln_m = (summaries.len() as f64).ln();
    let max_trace = summaries.iter().map(|s| s.trace).fold(0.0, f64::max);
    let max_lambda = summaries.iter().map(|s| s.lambda_max).fold(0.0, f64::max);
    let strong = 2.0 * (max_trace / nf).sqrt();
    let weak = max_lambda.sqrt();
    let weak_term = variant.weak_constant() * (max_lambda * ln_m / nf).sqrt();
    let mut report = BoundReport::from_terms(
        family,
        variant,
        n,
        1,
        weak,
        ln_m,
        vec![("strong", strong), ("weak", weak_term)],
    );
    report.trace_comparator = Some((max_trace * ln_m / nf).sqrt());
    Ok(report)
}

pub fn mkl_bound(grams: &[GramMatrix], variant: Variant) -> Result<BoundReport> {
    let n = grams
        .first()
        .ok_or_else(|| invalid("mkl bound needs at least one gram matrix"))?
        .n();
    if let Some(g) = grams.iter().find(|g| g.n() != n) {
        return Err(invalid(format!("gram sizes differ: {} vs {n}", g.n())));
    }
    let summaries = grams.iter().map(kernel_cov_summary).collect::<Result<Vec<_>>>()?;
    union_bound(Family::Mkl, &summaries, n, variant)
}

/// Covariance summaries of `P_m x` for each operator.
pub fn projected_covariances(data: &Matrix, projections: &[Matrix]) -> Result<Vec<CovarianceSummary>> {
    projections
        .iter()
        .enumerate()
        .map(|(m, p)| {
            if p.rows() != data.cols() || p.cols() != data.cols() {
                return Err(invalid(format!(
                    "operator {m} is {}x{}, data dimension is {}",
                    p.rows(),
                    p.cols(),
                    data.cols()
                )));
            }
            covariance(&data.map_rows(p)?)
        })
        .collect()
}

pub fn structured_sparsity_bound(data: &Matrix, projections: &[Matrix], variant: Variant) -> Result<BoundReport> {
    if projections.is_empty() {
        return Err(invalid("projection bound needs at least one operator"));
    }
    let summaries = projected_covariances(data, projections)?;
    union_bound(Family::Projection, &summaries, data.rows(), variant)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("dictionary size K must be at least 1"));
    }
    Ok(())
}

pub fn dict_sparsity_bound(data: &MultitaskDataset, k: usize, variant: Variant) -> Result<BoundReport> {
    check_k(k)?;
    let (n, t) = (data.n() as f64, data.task_count() as f64);
    let pooled = data.pooled_covariance()?;
    let mean_lambda = data
        .task_covariances()?
        .iter()
        .map(|c| c.lambda_max)
        .sum::<f64>()
        / t;
    let ln_2k = (2.0 * k as f64).ln();
    let strong = 2.0 * (k as f64 * pooled.trace / (n * t)).sqrt();
    let weak_term = variant.weak_constant() * (mean_lambda * ln_2k / n).sqrt();
    Ok(BoundReport::from_terms(
        Family::DictSparsity,
        variant,
        data.n(),
        data.task_count(),
        mean_lambda.sqrt(),
        t * ln_2k,
        vec![("strong", strong), ("weak", weak_term)],
    ))
}

pub fn dict_sharing_bound(data: &MultitaskDataset, k: usize, variant: Variant) -> Result<BoundReport> {
    check_k(k)?;
    let (n, t) = (data.n() as f64, data.task_count() as f64);
    let pooled = data.pooled_covariance()?;
    let per_task_log = 2f64.ln() + (k as f64).ln() / t;
    let strong = 2.0 * (pooled.trace / (n * t)).sqrt();
    let weak_term = variant.weak_constant() * (pooled.lambda_max / n * per_task_log).sqrt();
    Ok(BoundReport::from_terms(
        Family::DictSharing,
        variant,
        data.n(),
        data.task_count(),
        pooled.lambda_max.sqrt(),
        t * per_task_log,
        vec![("strong", strong), ("weak", weak_term)],
    ))
}

/// 64 log-spaced radii in `[1e-4, 3.9]`, plus `extra` when it lies in `(0, 4)`.
pub fn eta_grid(extra: Option<f64>) -> Vec<f64> {
    let (lo, hi) = (ETA_GRID_MIN.ln(), ETA_GRID_MAX.ln());
    let step = (hi - lo) / (ETA_GRID_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..ETA_GRID_POINTS)
        .map(|i| (lo + step * i as f64).exp())
        .collect();
    if let Some(e) = extra.filter(|e| *e > 0.0 && *e < 4.0) {
        grid.push(e);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

pub fn subspace_bound(
    data: &MultitaskDataset,
    k: usize,
    eta: Option<f64>,
    variant: Variant,
) -> Result<BoundReport> {
    check_k(k)?;
    let d = data.dim();
    if k > d {
        return Err(invalid(format!("subspace dimension K = {k} exceeds d = {d}")));
    }
    if let Some(e) = eta {
        if !(e > 0.0) {
            return Err(invalid(format!("covering radius η = {e} must be positive")));
        }
        if e >= 4.0 {
            return Err(invalid(format!("covering radius η = {e} must be below 4")));
        }
    }
    let (n, t, kf) = (data.n() as f64, data.task_count() as f64, k as f64);
    let pooled = data.pooled_covariance()?;
    let (tr, lambda) = (pooled.trace, pooled.lambda_max);
    let c = variant.weak_constant();

    let strong = 2.0 * (kf * tr / (n * t)).sqrt();
    let covering = |e: f64| 2.0 * e * (tr / n).sqrt();
    let weak_term = |e: f64| c * (kf * lambda * (4.0 / e).ln() / n).sqrt();
    let total = |e: f64| covering(e) + weak_term(e);

    let default_eta = (kf / d as f64).sqrt();
    let chosen = match eta {
        Some(e) => e,
        None => eta_grid(Some(default_eta))
            .into_iter()
            .min_by(|a, b| total(*a).total_cmp(&total(*b)))
            .expect("grid is non-empty"),
    };

    let mut report = BoundReport::from_terms(
        Family::Subspace,
        variant,
        data.n(),
        data.task_count(),
        lambda.sqrt(),
        kf * t * (4.0 / chosen).ln(),
        vec![
            ("strong", strong),
            ("covering", covering(chosen)),
            ("weak", weak_term(chosen)),
        ],
    );
    report.eta = Some(EtaChoice {
        eta: chosen,
        fixed: eta.is_some(),
        default_eta,
        bound_at_default_eta: strong + total(default_eta),
        closed_form_bound: strong + c * (kf * lambda * (16.0 * d as f64 / kf).ln() / n).sqrt(),
    });
    Ok(report)
}

/// Dispatches to the family bound for `spec`.
pub fn family_bound(
    spec: &ClassSpec,
    data: &MultitaskDataset,
    eta: Option<f64>,
    variant: Variant,
) -> Result<BoundReport> {
    spec.validate(data)?;
    match spec {
        ClassSpec::Mkl { grams } => mkl_bound(grams, variant),
        ClassSpec::Projection { projections } => structured_sparsity_bound(data.task(0), projections, variant),
        ClassSpec::DictSparsity { k } => dict_sparsity_bound(data, *k, variant),
        ClassSpec::DictSharing { k } => dict_sharing_bound(data, *k, variant),
        ClassSpec::Subspace { k } => subspace_bound(data, *k, eta, variant),
    }
}
