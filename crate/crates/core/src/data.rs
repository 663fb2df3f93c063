//! Multitask samples: `T` tasks with `n` points each in `ℝ^d`.

use crate::error::{invalid, Result};
use crate::linalg::{center, covariance, CovarianceSummary, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct MultitaskDataset {
    tasks: Vec<Matrix>,
}

impl MultitaskDataset {
    pub fn new(tasks: Vec<Matrix>) -> Result<Self> {
        let first = tasks.first().ok_or_else(|| invalid("dataset needs at least one task"))?;
        let (n, d) = (first.rows(), first.cols());
        if n == 0 || d == 0 {
            return Err(invalid(format!("tasks must be non-empty, got {n}x{d}")));
        }
        for (t, m) in tasks.iter().enumerate() {
            if m.rows() != n || m.cols() != d {
                return Err(invalid(format!(
                    "task {t} is {}x{}, expected {n}x{d} like task 0",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { tasks })
    }

    pub fn single(data: Matrix) -> Result<Self> {
        Self::new(vec![data])
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    /// Samples per task.
    pub fn n(&self) -> usize {
        self.tasks[0].rows()
    }

    pub fn dim(&self) -> usize {
        self.tasks[0].cols()
    }

    /// `n · T`, the number of sign variables in a multitask Rademacher average.
    pub fn total_samples(&self) -> usize {
        self.n() * self.task_count()
    }

    pub fn tasks(&self) -> &[Matrix] {
        &self.tasks
    }

    pub fn task(&self, t: usize) -> &Matrix {
        &self.tasks[t]
    }

    /// All `nT` points stacked task after task.
    pub fn pooled(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.total_samples() * self.dim());
        for m in &self.tasks {
            data.extend_from_slice(m.as_slice());
        }
        Matrix::new(self.total_samples(), self.dim(), data).expect("tasks are validated")
    }

    pub fn pooled_covariance(&self) -> Result<CovarianceSummary> {
        covariance(&self.pooled())
    }

    pub fn task_covariances(&self) -> Result<Vec<CovarianceSummary>> {
        self.tasks.iter().map(covariance).collect()
    }

    /// Centers each task by its own mean.
    pub fn centered(&self) -> Result<Self> {
        Self::new(self.tasks.iter().map(center).collect::<Result<_>>()?)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            tasks: self.tasks.iter().map(|m| m.scaled(c)).collect(),
        }
    }

    /// Applies a d×d operator to every point of every task.
    pub fn map_points(&self, op: &Matrix) -> Result<Self> {
        Self::new(self.tasks.iter().map(|m| m.map_rows(op)).collect::<Result<_>>()?)
    }

    /// Per-task signed sums `u_t = Σ_i ε_{ti} x_{ti}` for task-major signs.
    pub fn task_sums(&self, signs: &[f64]) -> Result<Vec<Vec<f64>>> {
        if signs.len() != self.total_samples() {
            return Err(invalid(format!(
                "expected {} signs (n={} x T={}), got {}",
                self.total_samples(),
                self.n(),
                self.task_count(),
                signs.len()
            )));
        }
        let n = self.n();
        Ok(self
            .tasks
            .iter()
            .enumerate()
            .map(|(t, m)| m.weighted_row_sum(&signs[t * n..(t + 1) * n]))
            .collect())
    }
}
