use serde::{Deserialize, Serialize};

/// Which noise drives the complexity: Rademacher signs or standard normals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Rademacher,
    Gaussian,
}

impl Variant {
    /// Constant `c` in `E sup_∪ ≤ max_m E sup_m + c·v·√(ln M)`.
    pub fn lemma_constant(self) -> f64 {
        match self {
            Variant::Rademacher => 4.0,
            Variant::Gaussian => 2.0,
        }
    }

    /// Constant in front of the weak parameter after normalizing by `2/n`.
    pub fn weak_constant(self) -> f64 {
        2.0 * self.lemma_constant()
    }

    /// `D` in the supremum tail bound `exp(−s² / (D v²))`.
    pub fn tail_denominator(self) -> f64 {
        match self {
            Variant::Rademacher => 8.0,
            Variant::Gaussian => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Rademacher => "rademacher",
            Variant::Gaussian => "gaussian",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
