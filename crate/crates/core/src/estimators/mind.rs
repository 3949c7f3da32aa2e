use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;
use crate::neighbors::{build_index, rho_statistics};
use crate::norm_model::fit_ml_dimension;

use super::{EstimateParams, EstimateResult, Method};

/// Norm-only estimator: the maximum-likelihood dimension of the normalized
/// nearest-neighbor distances, rounded to the nearest integer in `[1, max_dim]`.
pub fn estimate_mind_ml(data: &DataMatrix, k: usize, max_dim: usize) -> Result<EstimateResult> {
    if max_dim == 0 {
        return Err(DancoError::param("max_dim must be at least 1"));
    }
    let index = build_index(data, k)?;
    let rho = rho_statistics(&index)?;
    let fit = fit_ml_dimension(&rho, k, max_dim as f64)?;
    let d_hat = fit.d.round().clamp(1.0, max_dim as f64);
    let mut result = EstimateResult::new(
        Method::MindMl,
        d_hat,
        EstimateParams {
            k: Some(k),
            max_dim: Some(max_dim),
            ..Default::default()
        },
    );
    result.diagnostics.push(("d_ml", fit.d));
    if fit.saturated {
        result
            .warnings
            .push(format!("likelihood still increasing at the search bound d = {max_dim}"));
    }
    Ok(result)
}
