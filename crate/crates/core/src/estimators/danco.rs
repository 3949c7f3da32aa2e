//! DANCo: compares the normalized-distance and pairwise-angle statistics of a
//! dataset against d-ball references and picks the dimension whose combined
//! Kullback-Leibler divergence is smallest.

use crate::angle_model::{angle_statistics, kl_vonmises, AngleStats, VonMisesParams, DEFAULT_TAU_CAP};
use crate::calibration::{build_calibration, CalibrationTable};
use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;
use crate::neighbors::{build_index, duplicate_nearest_count, rho_statistics, DEFAULT_DEGENERATE_EPS};
use crate::norm_model::{norm_divergence, NormStats};
use crate::par;

use super::{EstimateParams, EstimateResult, KlTerms, Method};

/// Profile gaps smaller than this between the best and runner-up candidate are
/// reported as a near tie.
pub const NEAR_TIE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticsOptions {
    /// Centered neighbor vectors shorter than this are left out of angle fits.
    pub degenerate_eps: f64,
    pub tau_cap: f64,
}

impl Default for StatisticsOptions {
    fn default() -> Self {
        StatisticsOptions {
            degenerate_eps: DEFAULT_DEGENERATE_EPS,
            tau_cap: DEFAULT_TAU_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DancoOptions {
    pub stats: StatisticsOptions,
    /// When false the angle divergence is dropped from the objective (diagnostic).
    pub angle_term: bool,
}

impl Default for DancoOptions {
    fn default() -> Self {
        DancoOptions {
            stats: StatisticsOptions::default(),
            angle_term: true,
        }
    }
}

/// Norm and angle statistics of one point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodStatistics {
    pub norm: NormStats,
    pub angles: AngleStats,
    pub duplicate_nearest: usize,
}

/// Builds the (k+1)-NN index of `data` and computes both statistic families.
/// `d_max` bounds the likelihood search for the ML dimension.
pub fn neighborhood_statistics(
    data: &DataMatrix,
    k: usize,
    d_max: f64,
    opts: &StatisticsOptions,
) -> Result<NeighborhoodStatistics> {
    if k < 2 {
        return Err(DancoError::param(format!(
            "angle statistics need k >= 2 neighbors, got {k}"
        )));
    }
    let index = build_index(data, k)?;
    let rho = rho_statistics(&index)?;
    let norm = NormStats::from_rho(rho, k, d_max)?;
    let angles = angle_statistics(data, &index, opts.degenerate_eps, opts.tau_cap)?;
    Ok(NeighborhoodStatistics {
        norm,
        angles,
        duplicate_nearest: duplicate_nearest_count(&index),
    })
}

/// DANCo estimate of `data` against a prebuilt calibration table.
pub fn estimate_danco(
    data: &DataMatrix,
    k: usize,
    max_dim: usize,
    calib: &CalibrationTable,
) -> Result<EstimateResult> {
    estimate_danco_with(data, k, max_dim, calib, &DancoOptions::default())
}

pub fn estimate_danco_with(
    data: &DataMatrix,
    k: usize,
    max_dim: usize,
    calib: &CalibrationTable,
    opts: &DancoOptions,
) -> Result<EstimateResult> {
    if max_dim == 0 {
        return Err(DancoError::param("max_dim must be at least 1"));
    }
    calib.check_compatible(data.n_points(), k, max_dim)?;
    let stats = neighborhood_statistics(data, k, max_dim as f64, &opts.stats)?;
    let data_vm = VonMisesParams {
        nu: stats.angles.mu_nu,
        tau: stats.angles.mu_tau,
    };

    let profile = par::try_map_slice(&calib.entries[..max_dim], |entry| {
        let kl_norm = norm_divergence(stats.norm.d_ml, entry.d_check_ml, k)?;
        let kl_vm = if opts.angle_term {
            let reference = VonMisesParams {
                nu: entry.mu_nu,
                tau: entry.mu_tau,
            };
            kl_vonmises(data_vm, reference)?
        } else {
            0.0
        };
        Ok(KlTerms {
            d: entry.d,
            kl_norm,
            kl_vm,
            total: kl_norm + kl_vm,
        })
    })?;

    let (best, tie_gap) = argmin_profile(&profile);
    let mut result = EstimateResult::new(
        Method::Danco,
        profile[best].d as f64,
        EstimateParams {
            k: Some(k),
            max_dim: Some(max_dim),
            calibration_seed: Some(calib.seed),
            calibration_points: Some(calib.n_points),
            ..Default::default()
        },
    );
    if let Some(gap) = tie_gap {
        result.warnings.push(format!(
            "near tie: runner-up candidate within {gap:e} of the minimum"
        ));
    }
    push_statistics_warnings(&mut result, &stats, max_dim);
    result.diagnostics = vec![
        ("d_ml", stats.norm.d_ml),
        ("mu_nu", stats.angles.mu_nu),
        ("mu_tau", stats.angles.mu_tau),
        ("min_kl", profile[best].total),
    ];
    result.kl_profile = Some(profile);
    Ok(result)
}

/// Index of the smallest total, first wins on exact ties. The second value is the
/// gap to the runner-up when it is below [`NEAR_TIE_GAP`].
pub(crate) fn argmin_profile(profile: &[KlTerms]) -> (usize, Option<f64>) {
    let mut best = 0;
    for (i, t) in profile.iter().enumerate().skip(1) {
        if t.total < profile[best].total {
            best = i;
        }
    }
    let gap = profile
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, t)| t.total - profile[best].total)
        .fold(f64::INFINITY, f64::min);
    (best, (gap < NEAR_TIE_GAP).then_some(gap))
}

fn push_statistics_warnings(result: &mut EstimateResult, stats: &NeighborhoodStatistics, max_dim: usize) {
    if stats.angles.saturated_fits > 0 {
        result.warnings.push(format!(
            "{} neighborhoods had fully concentrated angles; concentration capped",
            stats.angles.saturated_fits
        ));
    }
    if stats.angles.excluded_pairs > 0 {
        result.warnings.push(format!(
            "{} degenerate angle pairs excluded",
            stats.angles.excluded_pairs
        ));
    }
    if stats.duplicate_nearest > 0 {
        result.warnings.push(format!(
            "{} points have a duplicate nearest neighbor",
            stats.duplicate_nearest
        ));
    }
    if stats.norm.saturated {
        result.warnings.push(format!(
            "likelihood still increasing at the search bound d = {max_dim}"
        ));
    }
}

/// Builds a calibration table matching `data` and runs [`estimate_danco_with`].
pub fn estimate_danco_calibrated(
    data: &DataMatrix,
    k: usize,
    max_dim: usize,
    n_reps: usize,
    seed: u64,
    opts: &DancoOptions,
) -> Result<(EstimateResult, CalibrationTable)> {
    let calib = build_calibration(max_dim, data.n_points(), k, n_reps, seed)?;
    let result = estimate_danco_with(data, k, max_dim, &calib, opts)?;
    Ok((result, calib))
}
