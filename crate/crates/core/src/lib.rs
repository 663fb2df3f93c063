//! Data-dependent Rademacher complexity bounds for structured sparsity and
//! multitask dictionary learning, together with the exact and Monte-Carlo
//! machinery used to check them.

pub mod bounds;
pub mod cli;
pub mod concentration;
pub mod data;
pub mod error;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod mc;
pub mod oracles;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod variant;

pub use data::MultitaskDataset;
pub use error::{Error, Result};
pub use linalg::{CovarianceSummary, Matrix};
pub use variant::Variant;
