use super::SupResult;
use crate::error::{invalid, Result};
use crate::linalg::{norm, Matrix};

pub(super) fn check_projections(projections: &[Matrix], d: usize) -> Result<()> {
    for (m, p) in projections.iter().enumerate() {
        if p.rows() != d || p.cols() != d {
            return Err(invalid(format!(
                "operator {m} is {}x{}, expected {d}x{d}",
                p.rows(),
                p.cols()
            )));
        }
        if p.asymmetry() > 1e-10 {
            return Err(invalid(format!("operator {m} is not symmetric")));
        }
    }
    Ok(())
}

/// `max_m ‖P_m Σᵢ εᵢ xᵢ‖`, the dual of the infimal-convolution norm.
pub fn projection_sup(signs: &[f64], data: &Matrix, projections: &[Matrix]) -> Result<SupResult> {
    if projections.is_empty() {
        return Err(invalid("projection supremum needs at least one operator"));
    }
    if signs.len() != data.rows() {
        return Err(invalid(format!(
            "{} signs for {} samples",
            signs.len(),
            data.rows()
        )));
    }
    check_projections(projections, data.cols())?;
    Ok(sup_from_sum(&data.weighted_row_sum(signs), projections))
}

pub(super) fn sup_from_sum(sum: &[f64], projections: &[Matrix]) -> SupResult {
    let best = projections
        .iter()
        .map(|p| norm(&p.matvec(sum).expect("dimensions validated")))
        .fold(0.0, f64::max);
    SupResult::exact(best)
}
