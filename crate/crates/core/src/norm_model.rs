//! Distribution of normalized nearest-neighbor distances on a uniformly sampled
//! d-ball, its maximum-likelihood dimension fit and the closed-form divergence
//! between two members of the family.
//!
//! For a neighborhood of size `k` the ratio `r` has density
//! `g(r; k, d) = k d r^(d-1) (1 - r^d)^(k-1)` on [0, 1].

use crate::error::{DancoError, Result};
use crate::special::{digamma, harmonic};

/// Ratios equal to 1 are pulled to `1 - RHO_CLIP` before `ln(1 - r^d)`.
pub const RHO_CLIP: f64 = 1e-9;

/// Largest neighborhood size the closed-form divergence accepts.
pub const KL_MAX_K: usize = 40;

/// Bisection stops once the bracket on d is narrower than this.
const ML_TOLERANCE: f64 = 1e-9;

/// Normalized distance statistics of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub rho: Vec<f64>,
    pub k: usize,
    pub d_ml: f64,
    /// The likelihood was still increasing at the upper search bound.
    pub saturated: bool,
}

impl NormStats {
    pub fn from_rho(rho: Vec<f64>, k: usize, d_max: f64) -> Result<Self> {
        let fit = fit_ml_dimension(&rho, k, d_max)?;
        Ok(NormStats {
            rho,
            k,
            d_ml: fit.d,
            saturated: fit.saturated,
        })
    }
}

/// Density `g(r; k, d)`.
pub fn norm_pdf(r: f64, k: usize, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(DancoError::domain("norm_pdf", format!("r must lie in [0, 1], got {r}")));
    }
    check_k_d("norm_pdf", k, d)?;
    let kf = k as f64;
    let rd = r.powf(d);
    let tail = if k == 1 { 1.0 } else { (1.0 - rd).powf(kf - 1.0) };
    let head = if d == 1.0 { 1.0 } else { r.powf(d - 1.0) };
    Ok(kf * d * head * tail)
}

fn check_k_d(function: &'static str, k: usize, d: f64) -> Result<()> {
    if k == 0 {
        return Err(DancoError::domain(function, "k must be at least 1"));
    }
    if !d.is_finite() || d < 1.0 {
        return Err(DancoError::domain(function, format!("d must be >= 1, got {d}")));
    }
    Ok(())
}

#[inline]
fn clip(r: f64) -> f64 {
    r.min(1.0 - RHO_CLIP)
}

/// `ll(d) = sum_i ln g(rho_i; k, d)`.
pub fn log_likelihood(rho: &[f64], k: usize, d: f64) -> f64 {
    let n = rho.len() as f64;
    let kf = k as f64;
    let mut sum_log = 0.0;
    let mut sum_tail = 0.0;
    for &r in rho {
        let r = clip(r);
        let lr = r.ln();
        sum_log += lr;
        sum_tail += (-(d * lr).exp()).ln_1p();
    }
    n * (kf * d).ln() + (d - 1.0) * sum_log + (kf - 1.0) * sum_tail
}

/// `d ll / d d`, strictly decreasing in d (the likelihood is concave).
fn score(log_rho: &[f64], k: usize, d: f64) -> f64 {
    let n = log_rho.len() as f64;
    let kf = k as f64;
    let mut s = n / d;
    for &lr in log_rho {
        let rd = (d * lr).exp();
        s += lr - (kf - 1.0) * rd * lr / (1.0 - rd);
    }
    s
}

/// Result of the maximum-likelihood dimension fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlFit {
    pub d: f64,
    /// The maximizer sits on the upper bound.
    pub saturated: bool,
}

/// Maximizes [`log_likelihood`] over the continuous interval `[1, d_max]`.
///
/// `ll` is concave in d, so the maximizer is the root of its derivative, located by
/// bisection; a non-positive slope at 1 returns 1 and a non-negative slope at
/// `d_max` returns `d_max` with `saturated` set.
pub fn fit_ml_dimension(rho: &[f64], k: usize, d_max: f64) -> Result<MlFit> {
    if rho.is_empty() {
        return Err(DancoError::param("cannot fit a dimension to an empty sample"));
    }
    if k == 0 {
        return Err(DancoError::param("k must be at least 1"));
    }
    if !(d_max >= 1.0) || !d_max.is_finite() {
        return Err(DancoError::param(format!("d_max must be >= 1, got {d_max}")));
    }
    if let Some(bad) = rho.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(DancoError::Data(format!("ratio {bad} outside (0, 1]")));
    }
    let log_rho: Vec<f64> = rho.iter().map(|&r| clip(r).ln()).collect();

    if score(&log_rho, k, 1.0) <= 0.0 {
        return Ok(MlFit { d: 1.0, saturated: d_max == 1.0 });
    }
    if score(&log_rho, k, d_max) >= 0.0 {
        return Ok(MlFit { d: d_max, saturated: true });
    }
    let (mut lo, mut hi) = (1.0_f64, d_max);
    while hi - lo > ML_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if score(&log_rho, k, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MlFit {
        d: 0.5 * (lo + hi),
        saturated: false,
    })
}

/// Closed-form `KL(g(.; k, d_hat) || g(.; k, d_check))`.
///
/// `H_k q - 1 - H_{k-1} - ln q - (k-1) sum_{i=0..k} (-1)^i C(k,i) psi(1 + i/q)` with
/// `q = d_check / d_hat`. The alternating binomial sum loses roughly k bits, so
/// neighborhoods larger than [`KL_MAX_K`] are refused, and so is any evaluation
/// whose estimated cancellation error exceeds 1e-6.
pub fn kl_norms(d_hat: f64, d_check: f64, k: usize) -> Result<f64> {
    check_k_d("kl_norms", k, d_hat)?;
    check_k_d("kl_norms", k, d_check)?;
    if k > KL_MAX_K {
        return Err(DancoError::NumericInstability(format!(
            "closed-form norm divergence refuses k = {k} > {KL_MAX_K}; \
             the alternating binomial sum cancels catastrophically (integrate numerically instead)"
        )));
    }
    if d_hat == d_check {
        return Ok(0.0);
    }
    let q = d_check / d_hat;
    let inv_q = d_hat / d_check;

    let mut terms = Vec::with_capacity(k + 1);
    let mut binom = 1.0_f64;
    for i in 0..=k {
        if i > 0 {
            binom = binom * (k + 1 - i) as f64 / i as f64;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * binom * digamma(1.0 + i as f64 * inv_q)?);
    }
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let largest = terms.first().map_or(0.0, |t| t.abs());
    let alternating = kahan_sum(&terms);

    let kf = k as f64;
    let rounding = largest * f64::EPSILON * (kf + 1.0) * (kf - 1.0).max(1.0);
    if rounding > 1e-6 {
        return Err(DancoError::NumericInstability(format!(
            "alternating sum for k = {k}, ratio {q} carries error ~{rounding:e}"
        )));
    }
    let value = harmonic(k as u32) * q - 1.0 - harmonic(k as u32 - 1) - q.ln() - (kf - 1.0) * alternating;
    Ok(value.max(0.0))
}

/// `KL(g(.; k, d_hat) || g(.; k, d_check))` for any `k`.
///
/// Uses [`kl_norms`] where it is accurate. Otherwise the alternating digamma sum
/// is replaced by the equal, cancellation-free integral
/// `-int_0^1 (1 - t^a)^k / (1 - t) dt` with `a = d_hat / d_check`.
pub fn norm_divergence(d_hat: f64, d_check: f64, k: usize) -> Result<f64> {
    match kl_norms(d_hat, d_check, k) {
        Err(DancoError::NumericInstability(_)) => kl_norms_integral(d_hat, d_check, k),
        other => other,
    }
}

fn kl_norms_integral(d_hat: f64, d_check: f64, k: usize) -> Result<f64> {
    check_k_d("norm_divergence", k, d_hat)?;
    check_k_d("norm_divergence", k, d_check)?;
    if d_hat == d_check {
        return Ok(0.0);
    }
    let q = d_check / d_hat;
    let a = d_hat / d_check;
    let integral = crate::quadrature::integrate(
        |t| {
            if t <= 0.0 {
                1.0
            } else if t >= 1.0 {
                0.0
            } else {
                (-(a * t.ln()).exp_m1()).powi(k as i32) / (1.0 - t)
            }
        },
        0.0,
        1.0,
        1e-13,
    );
    let value =
        harmonic(k as u32) * q - 1.0 - harmonic(k as u32 - 1) - q.ln() + (k as f64 - 1.0) * integral;
    Ok(value.max(0.0))
}

fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_form_agrees_with_closed_form() {
        let mut compared = 0;
        for k in [1, 2, 5, 10, 20, 30, 40] {
            for (a, b) in [(5.0, 7.0), (7.0, 5.0), (2.0, 10.0), (1.0, 20.0), (20.0, 1.3)] {
                if let Ok(closed) = kl_norms(a, b, k) {
                    let via = kl_norms_integral(a, b, k).unwrap();
                    assert!((closed - via).abs() < 1e-8, "k={k} ({a},{b}): {closed} vs {via}");
                    compared += 1;
                }
            }
        }
        assert!(compared >= 20);
    }

    #[test]
    fn large_k_divergence() {
        assert!(kl_norms(5.0, 6.0, 50).is_err());
        assert_eq!(norm_divergence(5.0, 5.0, 50).unwrap(), 0.0);
        let near = norm_divergence(5.0, 5.2, 50).unwrap();
        let far = norm_divergence(5.0, 8.0, 50).unwrap();
        assert!(near > 0.0 && far > near, "{near} {far}");
        assert_eq!(norm_divergence(5.0, 7.0, 10).unwrap(), kl_norms(5.0, 7.0, 10).unwrap());
    }

    #[test]
    fn pdf_trivial_values() {
        for r in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert_eq!(norm_pdf(r, 1, 1.0).unwrap(), 1.0);
        }
        assert!((norm_pdf(0.5, 1, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_domain() {
        assert!(norm_pdf(1.5, 3, 2.0).is_err());
        assert!(norm_pdf(0.5, 0, 2.0).is_err());
        assert!(norm_pdf(0.5, 3, 0.5).is_err());
    }

    #[test]
    fn likelihood_matches_pdf() {
        assert_eq!(log_likelihood(&[0.5], 1, 1.0), 0.0);
        for (r, k, d) in [(0.3, 10, 7.0), (0.8, 4, 2.5), (0.05, 1, 1.0)] {
            let ll = log_likelihood(&[r], k, d);
            assert!((ll.exp() - norm_pdf(r, k, d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn ml_clamps_at_lower_bound() {
        let rho = vec![1e-6; 50];
        let fit = fit_ml_dimension(&rho, 10, 30.0).unwrap();
        assert_eq!(fit.d, 1.0);
        assert!(!fit.saturated);
    }

    #[test]
    fn ml_all_ones_saturates() {
        let fit = fit_ml_dimension(&[1.0; 20], 1, 25.0).unwrap();
        assert_eq!(fit.d, 25.0);
        assert!(fit.saturated);
        let fit = fit_ml_dimension(&[1.0; 20], 10, 25.0).unwrap();
        assert!(fit.saturated);
    }

    #[test]
    fn ml_is_stationary_point() {
        let rho: Vec<f64> = (1..200).map(|i| (i as f64 / 200.0).powf(0.2)).collect();
        let fit = fit_ml_dimension(&rho, 10, 50.0).unwrap();
        let h = 1e-3;
        let here = log_likelihood(&rho, 10, fit.d);
        assert!(here >= log_likelihood(&rho, 10, fit.d - h));
        assert!(here >= log_likelihood(&rho, 10, fit.d + h));
    }

    #[test]
    fn ml_rejects_bad_input() {
        assert!(fit_ml_dimension(&[], 10, 5.0).is_err());
        assert!(fit_ml_dimension(&[0.5], 10, 0.5).is_err());
        assert!(fit_ml_dimension(&[0.0, 0.5], 10, 5.0).is_err());
    }

    #[test]
    fn kl_identical_is_zero() {
        assert_eq!(kl_norms(7.0, 7.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn kl_refuses_large_k() {
        assert!(matches!(
            kl_norms(3.0, 4.0, 41),
            Err(DancoError::NumericInstability(_))
        ));
    }
}
