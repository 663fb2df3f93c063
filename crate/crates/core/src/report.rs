//! Command execution and report emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{family_bound, generalization_gap, projected_covariances, BoundReport};
use crate::concentration::{tail_check_supremum, TailCheckReport};
use crate::data::MultitaskDataset;
use crate::error::{invalid, Result};
use crate::io::load_dataset;
use crate::kernel::{gaussian_gram, gaussian_lambda_bound, kernel_cov_summary, min_pairwise_distance};
use crate::linalg::{CovarianceSummary, Matrix};
use crate::mc::{estimate_complexity_with_budget, sample_oracle, ComplexityEstimate, DEFAULT_TAIL_TRIALS, DEFAULT_TRIALS};
use crate::oracles::{Budget, ClassSpec, Family};
use crate::variant::Variant;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Verify,
    Mc,
    KernelSpectrum,
    ConcCheck,
}

impl Command {
    pub fn default_trials(self) -> usize {
        match self {
            Command::ConcCheck => DEFAULT_TAIL_TRIALS,
            _ => DEFAULT_TRIALS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: PathBuf,
    pub family: Option<Family>,
    /// Dictionary size for the dictionary families.
    pub k: Option<usize>,
    /// Class count: kernel widths for mkl (with a single `sigma`), coordinate
    /// groups for projection.
    pub m: Option<usize>,
    pub sigma: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub variant: Variant,
    pub center: bool,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        let needs_family = !matches!(self.command, Command::KernelSpectrum);
        if needs_family && self.family.is_none() {
            return Err(invalid("--family is required for this command"));
        }
        if matches!(self.command, Command::Verify | Command::Mc) && self.trials < 2 {
            return Err(invalid("Monte-Carlo estimates need at least 2 trials"));
        }
        if self.command == Command::KernelSpectrum && self.sigma.len() != 1 {
            return Err(invalid("kernel-spectrum needs exactly one --sigma"));
        }
        match self.family {
            Some(Family::DictSparsity | Family::DictSharing | Family::Subspace) if self.k.is_none() => {
                Err(invalid("--k is required for dictionary families"))
            }
            Some(Family::Mkl) if self.sigma.is_empty() => Err(invalid("--sigma is required for the mkl family")),
            Some(Family::Mkl) if self.m.is_some() && self.sigma.len() != 1 => {
                Err(invalid("--m with mkl takes a single --sigma"))
            }
            Some(Family::Projection) if self.m.is_none() => Err(invalid("--m is required for the projection family")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub tasks: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub bound: f64,
    /// Estimate compared against the bound (upper bracket when bracketed).
    pub estimate: f64,
    pub stderr: f64,
    /// `bound − estimate`.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpectrumReport {
    pub sigma: f64,
    pub min_distance: f64,
    pub summary: CovarianceSummary,
    /// `1/n + exp(−Δ²/σ²)`.
    pub lambda_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub pooled_covariance: CovarianceSummary,
    /// `λ_max / trace` of the pooled covariance.
    pub pooled_ratio: f64,
    pub task_covariances: Vec<CovarianceSummary>,
    pub class_covariances: Vec<CovarianceSummary>,
    pub bound: Option<BoundReport>,
    pub generalization_gap: Option<f64>,
    pub estimate: Option<ComplexityEstimate>,
    pub slack: Option<Slack>,
    pub kernel_spectrum: Option<KernelSpectrumReport>,
    pub tails: Vec<TailCheckReport>,
    pub passed: bool,
}

/// `m` widths log-spaced in `[σ/4, 4σ]`.
pub fn width_ladder(sigma: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![sigma];
    }
    let (lo, hi) = ((sigma / 4.0).ln(), (4.0 * sigma).ln());
    (0..m)
        .map(|i| (lo + (hi - lo) * i as f64 / (m - 1) as f64).exp())
        .collect()
}

/// Diagonal projections onto `m` contiguous coordinate groups of `ℝ^d`,
/// sizes differing by at most one.
pub fn coordinate_groups(d: usize, m: usize) -> Result<Vec<Matrix>> {
    if m == 0 || m > d {
        return Err(invalid(format!("group count {m} must lie in 1..={d}")));
    }
    let mut start = 0;
    Ok((0..m)
        .map(|g| {
            let len = d / m + usize::from(g < d % m);
            let diag: Vec<f64> = (0..d)
                .map(|j| if j >= start && j < start + len { 1.0 } else { 0.0 })
                .collect();
            start += len;
            Matrix::diagonal(&diag)
        })
        .collect())
}

pub fn build_spec(config: &RunConfig, data: &MultitaskDataset) -> Result<ClassSpec> {
    let family = config.family.ok_or_else(|| invalid("no family given"))?;
    let single = || {
        if data.task_count() != 1 {
            return Err(invalid(format!("{family} is a single-task family")));
        }
        Ok(data.task(0))
    };
    Ok(match family {
        Family::Mkl => {
            let x = single()?;
            let widths = match config.m {
                Some(m) if m >= 1 => width_ladder(config.sigma[0], m),
                Some(_) => return Err(invalid("--m must be at least 1")),
                None => config.sigma.clone(),
            };
            let grams = widths
                .iter()
                .map(|&s| gaussian_gram(x, s))
                .collect::<Result<Vec<_>>>()?;
            ClassSpec::Mkl { grams }
        }
        Family::Projection => {
            let x = single()?;
            ClassSpec::Projection {
                projections: coordinate_groups(x.cols(), config.m.unwrap_or(1))?,
            }
        }
        Family::DictSparsity => ClassSpec::DictSparsity { k: config.k.unwrap_or(1) },
        Family::DictSharing => ClassSpec::DictSharing { k: config.k.unwrap_or(1) },
        Family::Subspace => ClassSpec::Subspace { k: config.k.unwrap_or(1) },
    })
}

/// `v = sup_f ‖(f(x_{ti}))_{t,i}‖` bound: `√(n max_m λ_m)` for unions of
/// linear classes, `√(n Σ_t λ_max(Ĉ_t))` for the multitask families (each
/// task's predictor has unit norm).
fn index_radius(spec: &ClassSpec, data: &MultitaskDataset, bound: &BoundReport) -> Result<f64> {
    let n = data.n() as f64;
    Ok(match spec {
        ClassSpec::Mkl { .. } | ClassSpec::Projection { .. } => (n * bound.weak * bound.weak).sqrt(),
        _ => (n * data.task_covariances()?.iter().map(|c| c.lambda_max).sum::<f64>()).sqrt(),
    })
}

pub fn run(config: &RunConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let data = load_dataset(&config.input_path, None)?;
    run_on(config, data)
}

/// [`run`] on an already loaded dataset.
pub fn run_on(config: &RunConfig, data: MultitaskDataset) -> Result<AnalysisReport> {
    config.validate()?;
    let budget = Budget::from_env()?;
    let data = if config.center { data.centered()? } else { data };
    let pooled = data.pooled_covariance()?;
    let mut report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        config: config.clone(),
        dataset: DatasetSummary {
            n: data.n(),
            tasks: data.task_count(),
            dim: data.dim(),
        },
        pooled_ratio: pooled.ratio(),
        pooled_covariance: pooled,
        task_covariances: data.task_covariances()?,
        class_covariances: Vec::new(),
        bound: None,
        generalization_gap: None,
        estimate: None,
        slack: None,
        kernel_spectrum: None,
        tails: Vec::new(),
        passed: true,
    };

    if config.command == Command::KernelSpectrum {
        let x = data.pooled();
        let sigma = config.sigma[0];
        let summary = kernel_cov_summary(&gaussian_gram(&x, sigma)?)?;
        let min_distance = min_pairwise_distance(&x)?;
        let lambda_bound = gaussian_lambda_bound(x.rows(), min_distance, sigma);
        let holds = summary.lambda_max <= lambda_bound + 1e-10;
        report.passed = holds;
        report.kernel_spectrum = Some(KernelSpectrumReport {
            sigma,
            min_distance,
            summary,
            lambda_bound,
            holds,
        });
        return Ok(report);
    }

    let spec = build_spec(config, &data)?;
    report.class_covariances = match &spec {
        ClassSpec::Mkl { grams } => grams.iter().map(kernel_cov_summary).collect::<Result<_>>()?,
        ClassSpec::Projection { projections } => projected_covariances(data.task(0), projections)?,
        _ => Vec::new(),
    };
    let bound = family_bound(&spec, &data, config.eta, config.variant)?;
    if let Some(delta) = config.delta {
        report.generalization_gap = Some(generalization_gap(bound.bound, data.total_samples(), delta)?);
    }

    match config.command {
        Command::Analyze => {}
        Command::Verify | Command::Mc => {
            let est = estimate_complexity_with_budget(&spec, &data, config.trials, config.seed, config.variant, budget)?;
            if config.command == Command::Verify {
                let c = est.conservative();
                let slack = bound.bound - c.mean;
                let passed = slack >= -3.0 * c.stderr;
                report.passed = passed;
                report.slack = Some(Slack {
                    bound: bound.bound,
                    estimate: c.mean,
                    stderr: c.stderr,
                    slack,
                    passed,
                });
            }
            report.estimate = Some(est);
        }
        Command::ConcCheck => {
            let oracle = spec.oracle(&data, budget)?;
            let samples: Vec<f64> = sample_oracle(&oracle, config.trials, config.seed, config.variant)
                .into_iter()
                .map(|s| s.value)
                .collect();
            let v = index_radius(&spec, &data, &bound)?;
            let tail = tail_check_supremum(&samples, v, config.variant)?;
            report.passed = tail.passed();
            report.tails.push(tail);
        }
        Command::KernelSpectrum => unreachable!("handled above"),
    }
    if config.command != Command::Mc {
        report.bound = Some(bound);
    }
    Ok(report)
}

/// JSON formatter writing every float with 17 significant digits.
struct FixedPrecision;

impl serde_json::ser::Formatter for FixedPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json(report: &AnalysisReport) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedPrecision);
    report.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    report: &'a str,
    unix_time_seconds: u64,
    tool_version: &'a str,
}

/// Path of the CSV table for tail report `index` next to `out`.
pub fn tail_table_path(out: &Path, index: usize, label: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    out.with_file_name(format!("{stem}.tail{index}.{clean}.csv"))
}

/// Writes the JSON report to `out`, tail tables beside it, and run metadata
/// (timestamp) to `<out>.meta.json`.
pub fn write_report(report: &AnalysisReport, out: &Path) -> Result<()> {
    std::fs::write(out, to_json(report)?)?;
    for (i, tail) in report.tails.iter().enumerate() {
        let mut w = csv::Writer::from_path(tail_table_path(out, i, &tail.label)).map_err(csv_error)?;
        w.write_record(["s", "empirical_tail", "theoretical_tail"]).map_err(csv_error)?;
        for j in 0..tail.s_grid.len() {
            w.write_record([
                format!("{:.16e}", tail.s_grid[j]),
                format!("{:.16e}", tail.empirical_tail[j]),
                format!("{:.16e}", tail.theoretical_tail[j]),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
    }
    let meta = RunMetadata {
        report: out.file_name().and_then(|s| s.to_str()).unwrap_or(""),
        unix_time_seconds: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        tool_version: TOOL_VERSION,
    };
    let mut meta_path = out.as_os_str().to_owned();
    meta_path.push(".meta.json");
    std::fs::write(PathBuf::from(meta_path), serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => invalid(format!("{other:?}")),
    }
}
