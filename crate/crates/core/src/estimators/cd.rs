use crate::error::{DancoError, Result};
use crate::matrix::{squared_distance, DataMatrix};
use crate::par;

use super::{EstimateParams, EstimateResult, Method};

/// Scaling-region recipe for the correlation dimension.
///
/// The radius grid is log-spaced between the `lower_quantile` and `upper_quantile`
/// of all pairwise distances; the slope is fitted over the central
/// `fit_fraction` of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions {
    pub n_radii: usize,
    pub lower_quantile: f64,
    pub upper_quantile: f64,
    pub fit_fraction: f64,
}

impl Default for CdOptions {
    fn default() -> Self {
        CdOptions {
            n_radii: 20,
            lower_quantile: 0.001,
            upper_quantile: 0.05,
            fit_fraction: 0.6,
        }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Grassberger–Procaccia correlation dimension: the least-squares slope of
/// `ln C(r)` against `ln r`, where `C(r)` is the fraction of point pairs closer
/// than `r`.
pub fn estimate_cd(data: &DataMatrix, opts: &CdOptions) -> Result<EstimateResult> {
    if opts.n_radii < 2 {
        return Err(DancoError::param("need at least two radii"));
    }
    if !(0.0 < opts.lower_quantile && opts.lower_quantile < opts.upper_quantile && opts.upper_quantile <= 1.0) {
        return Err(DancoError::param(format!(
            "quantiles must satisfy 0 < lower < upper <= 1, got {} and {}",
            opts.lower_quantile, opts.upper_quantile
        )));
    }
    if !(opts.fit_fraction > 0.0 && opts.fit_fraction <= 1.0) {
        return Err(DancoError::param("fit_fraction must lie in (0, 1]"));
    }
    let n = data.n_points();
    let rows = par::map_range(n, |i| {
        let xi = data.row(i);
        ((i + 1)..n)
            .map(|j| squared_distance(xi, data.row(j)).sqrt())
            .collect::<Vec<f64>>()
    });
    let mut dists: Vec<f64> = rows.concat();
    dists.sort_unstable_by(f64::total_cmp);

    let r_lo = quantile(&dists, opts.lower_quantile);
    let r_hi = quantile(&dists, opts.upper_quantile);
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(DancoError::Data(format!(
            "empty scaling region: distance quantiles {r_lo} and {r_hi}"
        )));
    }

    let total = dists.len() as f64;
    let steps = (opts.n_radii - 1) as f64;
    let span = (r_hi / r_lo).ln();
    let trim = ((1.0 - opts.fit_fraction) / 2.0 * opts.n_radii as f64).floor() as usize;
    let points: Vec<(f64, f64)> = (trim..opts.n_radii - trim)
        .filter_map(|i| {
            let r = r_lo * (span * i as f64 / steps).exp();
            let count = dists.partition_point(|&d| d <= r);
            (count > 0).then(|| (r.ln(), (count as f64 / total).ln()))
        })
        .collect();
    if points.len() < 2 {
        return Err(DancoError::Data("empty scaling region: fewer than two usable radii".into()));
    }
    let (slope, intercept) = least_squares(&points);
    let rms = (points
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    let mut result = EstimateResult::new(Method::Cd, slope, EstimateParams::default());
    result.diagnostics = vec![
        ("r_min", points[0].0.exp()),
        ("r_max", points[points.len() - 1].0.exp()),
        ("fit_rms", rms),
    ];
    Ok(result)
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_fail() {
        let data = DataMatrix::new(vec![1.5; 300], 100, 3).unwrap();
        assert!(matches!(
            estimate_cd(&data, &CdOptions::default()),
            Err(DancoError::Data(_))
        ));
    }

    #[test]
    fn fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.5 * i as f64 - 1.0)).collect();
        let (s, b) = least_squares(&pts);
        assert!((s - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
    }

    #[test]
    fn regular_grid_in_plane() {
        let mut v = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                v.extend([i as f64, j as f64]);
            }
        }
        let data = DataMatrix::new(v, 1600, 2).unwrap();
        let r = estimate_cd(&data, &CdOptions::default()).unwrap();
        assert!((r.d_hat - 2.0).abs() < 0.3, "{}", r.d_hat);
    }
}
