use super::SupOracle;
use super::SupResult;
use crate::error::{invalid, Result};
use crate::linalg::{dot, norm};

/// A finite set `A ⊂ ℝⁿ`; its supremum is `max_{z∈A} ⟨ε, z⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteClass {
    n: usize,
    points: Vec<Vec<f64>>,
}

impl FiniteClass {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| invalid("finite class needs at least one point"))?;
        if n == 0 || points.iter().any(|p| p.len() != n) {
            return Err(invalid("points of a finite class must share a positive dimension"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("finite class has a non-finite coordinate"));
        }
        Ok(Self { n, points })
    }

    /// The union `A_1 ∪ … ∪ A_M`.
    pub fn union(classes: &[FiniteClass]) -> Result<Self> {
        Self::new(classes.iter().flat_map(|c| c.points.iter().cloned()).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// `sup_{z∈A} ‖z‖`.
    pub fn sup_norm(&self) -> f64 {
        self.points.iter().map(|p| norm(p)).fold(0.0, f64::max)
    }

    pub fn sup(&self, signs: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| dot(p, signs))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl SupOracle for FiniteClass {
    fn sign_count(&self) -> usize {
        self.n
    }

    fn evaluate(&self, signs: &[f64]) -> SupResult {
        SupResult::exact(self.sup(signs))
    }
}
