//! Scalar special functions used by the closed-form divergences.
//!
//! Modified Bessel functions of orders 0 and 1 are evaluated in log space: a power
//! series below [`BESSEL_SERIES_LIMIT`], the large-argument Hankel expansion above
//! it. `I_0(700)` already overflows an `f64`, so nothing here works on the linear
//! scale past the series range.

use crate::error::{DancoError, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments below this use the power series, at or above it the asymptotic expansion.
pub const BESSEL_SERIES_LIMIT: f64 = 20.0;

/// `ln I_1(0)`. `I_1(0) = 0`, so the log is reported as negative infinity.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

const DIGAMMA_SHIFT: f64 = 10.0;

fn check_bessel_arg(function: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(DancoError::domain(
            function,
            format!("argument must be finite and non-negative, got {x}"),
        ));
    }
    Ok(())
}

/// `sum_m (x/2)^(2m+order) / (m! (m+order)!)`, plain scale. Only valid for small x.
fn bessel_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let nu = f64::from(order);
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Hankel expansion factor `S` with `I_order(x) ~ e^x / sqrt(2 pi x) * S`.
fn bessel_asymptotic_factor(order: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..=60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * (odd * odd - mu) / (8.0 * kf * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

/// Natural log of the modified Bessel function of the first kind, orders 0 and 1.
///
/// `log_bessel_i(1, 0.0)` returns [`LOG_ZERO`]. Callers needing `I_1` at a negative
/// argument use `I_1(-x) = -I_1(x)`.
pub fn log_bessel_i(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(DancoError::domain(
            "log_bessel_i",
            format!("only orders 0 and 1 are supported, got {order}"),
        ));
    }
    check_bessel_arg("log_bessel_i", x)?;
    if x == 0.0 {
        return Ok(if order == 0 { 0.0 } else { LOG_ZERO });
    }
    if x < BESSEL_SERIES_LIMIT {
        Ok(bessel_series(order, x).ln())
    } else {
        let s = bessel_asymptotic_factor(order, x);
        Ok(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + s.ln())
    }
}

/// `A(x) = I_1(x) / I_0(x)`, the mean resultant length of a von Mises law with
/// concentration `x`. Strictly increasing from `A(0) = 0` towards 1.
pub fn bessel_ratio_a(x: f64) -> Result<f64> {
    check_bessel_arg("bessel_ratio_a", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < BESSEL_SERIES_LIMIT {
        Ok(bessel_series(1, x) / bessel_series(0, x))
    } else {
        Ok(bessel_asymptotic_factor(1, x) / bessel_asymptotic_factor(0, x))
    }
}

/// Digamma function for positive arguments.
///
/// Shifts the argument above 10 with `psi(x) = psi(x+1) - 1/x`, then applies the
/// Bernoulli asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(DancoError::domain(
            "digamma",
            format!("argument must be finite and positive, got {x}"),
        ));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < DIGAMMA_SHIFT {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // B_2n / (2n) for n = 1..7, Horner in 1/x^2
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(shift + x.ln() - 0.5 * inv - tail)
}

/// k-th harmonic number, summed in ascending order of `i`.
pub fn harmonic(k: u32) -> f64 {
    (1..=k).map(|i| 1.0 / f64::from(i)).sum()
}
