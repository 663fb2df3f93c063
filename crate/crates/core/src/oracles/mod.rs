//! Inner suprema `sup_{f∈F} Σ εᵢ f(xᵢ)` for a fixed sign (or Gaussian) vector.
//!
//! Every function class here is a unit ball of some norm composed with linear
//! features, so each supremum reduces to a dual-norm evaluation or a maximum
//! over finitely many extreme points. The free functions take raw inputs and
//! validate them; [`ClassOracle`] precomputes what can be shared between the
//! many sign vectors of a Monte-Carlo run.
//!
//! Signs for multitask classes are laid out task-major: `ε_{ti}` lives at
//! index `t·n + i`.

mod dictionary;
mod exact;
mod finite;
mod mkl;
mod projection;
mod subspace;

pub use dictionary::{dict_sharing_sup, dict_sparsity_sup, sharing_value, sparsity_value};
pub use exact::{exact_expectation, DEFAULT_EXACT_SIGN_BITS};
pub use finite::FiniteClass;
pub use mkl::{mkl_sup, MklFactors};
pub use projection::projection_sup;
pub use subspace::{subspace_bracket, subspace_sup, subspace_upper, SubspaceOptions};

use serde::{Deserialize, Serialize};

use crate::data::MultitaskDataset;
use crate::error::{invalid, Result};
use crate::kernel::GramMatrix;
use crate::linalg::Matrix;

/// Default cap on inner evaluations of an enumerating oracle.
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "RADBOUND_BUDGET";

/// Cap on the number of inner evaluations an exact oracle may spend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Reads `RADBOUND_BUDGET`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map(Budget)
                .map_err(|_| invalid(format!("{BUDGET_ENV}={v:?} is not a positive integer"))),
            Err(_) => Ok(Self::default()),
        }
    }

    pub(crate) fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.0 as u128 {
            return Err(crate::error::Error::ResourceLimit {
                what,
                needed,
                budget: self.0,
            });
        }
        Ok(())
    }
}

/// A supremum value, or a certified bracket `[value, upper]` around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub upper: f64,
    pub exact: bool,
}

impl SupResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            upper: value,
            exact: true,
        }
    }

    pub fn bracket(lower: f64, upper: f64) -> Self {
        Self {
            value: lower,
            upper: upper.max(lower),
            exact: false,
        }
    }
}

/// A supremum evaluator over a fixed sample.
pub trait SupOracle: Sync {
    /// Length of the sign vectors the oracle consumes.
    fn sign_count(&self) -> usize;

    fn evaluate(&self, signs: &[f64]) -> SupResult;

    /// Evaluates consecutive sign vectors of length `sign_count` packed in
    /// `signs`, appending one result per vector. Must agree with `evaluate`.
    fn evaluate_batch(&self, signs: &[f64], out: &mut Vec<SupResult>) {
        let len = self.sign_count().max(1);
        out.extend(signs.chunks_exact(len).map(|s| self.evaluate(s)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Mkl,
    Projection,
    DictSparsity,
    DictSharing,
    Subspace,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Mkl => "mkl",
            Family::Projection => "projection",
            Family::DictSparsity => "dict_sparsity",
            Family::DictSharing => "dict_sharing",
            Family::Subspace => "subspace",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Descriptor of a function-class family together with its parameters.
#[derive(Debug, Clone)]
pub enum ClassSpec {
    /// Group-norm unit ball over `M` kernel feature spaces.
    Mkl { grams: Vec<GramMatrix> },
    /// Infimal-convolution norm generated by symmetric operators `P_1..P_M`.
    Projection { projections: Vec<Matrix> },
    /// Dictionary of `k` unit atoms with the sparsity norm on task weights.
    DictSparsity { k: usize },
    /// Dictionary of `k` unit atoms with the sharing norm on task weights.
    DictSharing { k: usize },
    /// Orthonormal dictionary of `k` atoms (a `k`-dimensional subspace).
    Subspace { k: usize },
}

impl ClassSpec {
    pub fn family(&self) -> Family {
        match self {
            ClassSpec::Mkl { .. } => Family::Mkl,
            ClassSpec::Projection { .. } => Family::Projection,
            ClassSpec::DictSparsity { .. } => Family::DictSparsity,
            ClassSpec::DictSharing { .. } => Family::DictSharing,
            ClassSpec::Subspace { .. } => Family::Subspace,
        }
    }

    /// `M` for mkl/projection, `K` for the dictionary families.
    pub fn size(&self) -> usize {
        match self {
            ClassSpec::Mkl { grams } => grams.len(),
            ClassSpec::Projection { projections } => projections.len(),
            ClassSpec::DictSparsity { k } | ClassSpec::DictSharing { k } | ClassSpec::Subspace { k } => {
                *k
            }
        }
    }

    /// Checks the descriptor against a dataset.
    pub fn validate(&self, data: &MultitaskDataset) -> Result<()> {
        match self {
            ClassSpec::Mkl { grams } => {
                if grams.is_empty() {
                    return Err(invalid("mkl class needs at least one gram matrix"));
                }
                if data.task_count() != 1 {
                    return Err(invalid("mkl class is single-task"));
                }
                if let Some(g) = grams.iter().find(|g| g.n() != data.n()) {
                    return Err(invalid(format!(
                        "gram of size {} does not match n = {}",
                        g.n(),
                        data.n()
                    )));
                }
            }
            ClassSpec::Projection { projections } => {
                if projections.is_empty() {
                    return Err(invalid("projection class needs at least one operator"));
                }
                if data.task_count() != 1 {
                    return Err(invalid("projection class is single-task"));
                }
                projection::check_projections(projections, data.dim())?;
            }
            ClassSpec::DictSparsity { k } | ClassSpec::DictSharing { k } => {
                if *k == 0 {
                    return Err(invalid("dictionary size K must be at least 1"));
                }
            }
            ClassSpec::Subspace { k } => {
                if *k == 0 || *k > data.dim() {
                    return Err(invalid(format!(
                        "subspace dimension K = {k} must lie in 1..={}",
                        data.dim()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Prepares an evaluator for repeated sign vectors on `data`.
    pub fn oracle(&self, data: &MultitaskDataset, budget: Budget) -> Result<ClassOracle> {
        self.validate(data)?;
        Ok(match self {
            ClassSpec::Mkl { grams } => ClassOracle::Mkl(
                grams.iter().map(MklFactors::new).collect::<Result<Vec<_>>>()?,
            ),
            ClassSpec::Projection { projections } => ClassOracle::Projection {
                data: data.task(0).clone(),
                projections: projections.clone(),
            },
            ClassSpec::DictSparsity { k } => {
                budget.check("sparsity-norm enumeration", dictionary::sparsity_cost(data.task_count(), *k))?;
                ClassOracle::DictSparsity {
                    data: data.clone(),
                    k: *k,
                }
            }
            ClassSpec::DictSharing { .. } => {
                budget.check("sharing-norm enumeration", dictionary::sharing_cost(data.task_count()))?;
                ClassOracle::DictSharing { data: data.clone() }
            }
            ClassSpec::Subspace { k } => ClassOracle::Subspace {
                data: data.clone(),
                k: *k,
                options: SubspaceOptions::default(),
            },
        })
    }
}

/// Evaluator for one [`ClassSpec`] on a fixed dataset.
#[derive(Debug, Clone)]
pub enum ClassOracle {
    Mkl(Vec<MklFactors>),
    Projection { data: Matrix, projections: Vec<Matrix> },
    DictSparsity { data: MultitaskDataset, k: usize },
    DictSharing { data: MultitaskDataset },
    Subspace { data: MultitaskDataset, k: usize, options: SubspaceOptions },
}

impl SupOracle for ClassOracle {
    fn sign_count(&self) -> usize {
        match self {
            ClassOracle::Mkl(f) => f[0].n(),
            ClassOracle::Projection { data, .. } => data.rows(),
            ClassOracle::DictSparsity { data, .. }
            | ClassOracle::DictSharing { data }
            | ClassOracle::Subspace { data, .. } => data.total_samples(),
        }
    }

    fn evaluate(&self, signs: &[f64]) -> SupResult {
        match self {
            ClassOracle::Mkl(factors) => mkl::factored_sup(factors, signs),
            ClassOracle::Projection { data, projections } => {
                projection::sup_from_sum(&data.weighted_row_sum(signs), projections)
            }
            ClassOracle::DictSparsity { data, k } => {
                let u = data.task_sums(signs).expect("sign count checked by caller");
                SupResult::exact(sparsity_value(&u, *k))
            }
            ClassOracle::DictSharing { data } => {
                let u = data.task_sums(signs).expect("sign count checked by caller");
                SupResult::exact(sharing_value(&u))
            }
            ClassOracle::Subspace { data, k, options } => {
                let u = data.task_sums(signs).expect("sign count checked by caller");
                subspace_bracket(&u, *k, options)
            }
        }
    }

    fn evaluate_batch(&self, signs: &[f64], out: &mut Vec<SupResult>) {
        match self {
            ClassOracle::Mkl(factors) => mkl::factored_sup_batch(factors, signs, out),
            _ => {
                let len = self.sign_count().max(1);
                out.extend(signs.chunks_exact(len).map(|s| self.evaluate(s)));
            }
        }
    }
}

/// Any closure over sign vectors acts as an exact oracle.
impl<F> SupOracle for (usize, F)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn sign_count(&self) -> usize {
        self.0
    }

    fn evaluate(&self, signs: &[f64]) -> SupResult {
        SupResult::exact((self.1)(signs))
    }
}
