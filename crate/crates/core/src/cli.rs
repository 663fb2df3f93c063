//! Command-line parsing into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::oracles::Family;
use crate::report::{Command, RunConfig};
use crate::variant::Variant;

#[derive(Debug, Parser)]
#[command(name = "radbound", version, about = "Data-dependent Rademacher complexity bounds and their numerical verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Closed-form bounds and covariance summaries.
    Analyze(RunArgs),
    /// Bounds plus Monte-Carlo estimates; exit code 2 if an estimate exceeds its bound.
    Verify(RunArgs),
    /// Monte-Carlo complexity estimates only.
    Mc(RunArgs),
    /// Gaussian-kernel spectrum against the minimum-distance bound.
    KernelSpectrum(RunArgs),
    /// Empirical tail of the supremum against its concentration bound.
    ConcCheck(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Mkl,
    Projection,
    #[value(name = "dict_sparsity", alias = "dict-sparsity")]
    DictSparsity,
    #[value(name = "dict_sharing", alias = "dict-sharing")]
    DictSharing,
    Subspace,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Mkl => Family::Mkl,
            FamilyArg::Projection => Family::Projection,
            FamilyArg::DictSparsity => Family::DictSparsity,
            FamilyArg::DictSharing => Family::DictSharing,
            FamilyArg::Subspace => Family::Subspace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Rademacher,
    Gaussian,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Rademacher => Variant::Rademacher,
            VariantArg::Gaussian => Variant::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Dataset file (.csv with optional `task` column, or .json).
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Dictionary size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of kernel widths (mkl, with one --sigma) or coordinate groups (projection).
    #[arg(long)]
    pub m: Option<usize>,
    /// Gaussian kernel width(s); comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    /// Monte-Carlo trials (default 10000, or 1000000 for conc-check).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "rademacher")]
    pub variant: VariantArg,
    /// Center each task before analysis.
    #[arg(long)]
    pub center: bool,
    /// Fixed covering radius for the subspace bound (default: grid search).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Confidence level for the generalization gap.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Report path; the JSON report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CliCommand {
    pub fn into_config(self) -> RunConfig {
        let (command, args) = match self {
            CliCommand::Analyze(a) => (Command::Analyze, a),
            CliCommand::Verify(a) => (Command::Verify, a),
            CliCommand::Mc(a) => (Command::Mc, a),
            CliCommand::KernelSpectrum(a) => (Command::KernelSpectrum, a),
            CliCommand::ConcCheck(a) => (Command::ConcCheck, a),
        };
        RunConfig {
            command,
            input_path: args.input,
            family: args.family.map(Family::from),
            k: args.k,
            m: args.m,
            sigma: args.sigma,
            trials: args.trials.unwrap_or_else(|| command.default_trials()),
            seed: args.seed,
            variant: args.variant.into(),
            center: args.center,
            eta: args.eta,
            delta: args.delta,
            output_path: args.out,
        }
    }
}
