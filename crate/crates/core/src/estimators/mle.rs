use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;
use crate::neighbors::build_index;

use super::{EstimateParams, EstimateResult, Method};

/// Levina–Bickel maximum-likelihood estimator.
///
/// For each `k` in `k1..=k2` the per-point statistic is
/// `(1/(k-1)) sum_{j<k} ln(T_k / T_j)` with `T_j` the distance to the j-th
/// neighbor. Its mean over points is inverted to give the estimate at `k`, and
/// the estimates are averaged over `k`. Averaging before inverting avoids the
/// upward bias of averaging per-point inverses at small `k`.
pub fn estimate_mle_lb(data: &DataMatrix, k1: usize, k2: usize) -> Result<EstimateResult> {
    if k1 < 2 || k1 >= k2 {
        return Err(DancoError::param(format!(
            "need 2 <= k1 < k2, got k1 = {k1}, k2 = {k2}"
        )));
    }
    if k2 + 2 > data.n_points() {
        return Err(DancoError::param(format!(
            "k2 = {k2} exceeds N - 2 = {}",
            data.n_points().saturating_sub(2)
        )));
    }
    // k2 neighbors per row
    let index = build_index(data, k2 - 1)?;
    let n = index.n_points();
    for i in 0..n {
        if index.distances(i)[0] <= 0.0 {
            return Err(DancoError::DegenerateGeometry {
                index: i,
                detail: "zero neighbor distance; remove duplicate points".into(),
            });
        }
    }

    let mut per_k = Vec::with_capacity(k2 - k1 + 1);
    for k in k1..=k2 {
        let mut acc = 0.0;
        for i in 0..n {
            let t = index.distances(i);
            let log_tk = t[k - 1].ln();
            let s: f64 = t[..k - 1].iter().map(|tj| log_tk - tj.ln()).sum();
            if s <= 0.0 {
                return Err(DancoError::DegenerateGeometry {
                    index: i,
                    detail: format!("first {k} neighbor distances are all equal"),
                });
            }
            acc += s / (k as f64 - 1.0);
        }
        per_k.push(n as f64 / acc);
    }
    let d_hat = per_k.iter().sum::<f64>() / per_k.len() as f64;
    Ok(EstimateResult::new(
        Method::Mle,
        d_hat,
        EstimateParams {
            k_range: Some((k1, k2)),
            ..Default::default()
        },
    ))
}
