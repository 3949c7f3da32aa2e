//! von Mises modelling of pairwise neighbor angles.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;
use crate::neighbors::{pairwise_angles, NeighborhoodIndex};
use crate::par;
use crate::rng::substream;
use crate::special::{bessel_ratio_a, log_bessel_i};

/// Ceiling on fitted concentrations; the inverse-ratio approximation diverges as
/// the mean resultant length approaches 1.
pub const DEFAULT_TAU_CAP: f64 = 1e5;

/// Mean resultant lengths at or above this are treated as 1.
const ETA_ONE: f64 = 1.0 - 1e-12;

/// Parameters of a von Mises law: mean direction in (-pi, pi] and concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesParams {
    pub nu: f64,
    pub tau: f64,
}

impl VonMisesParams {
    pub fn new(nu: f64, tau: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(DancoError::domain("VonMisesParams", format!("non-finite nu {nu}")));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(DancoError::domain(
                "VonMisesParams",
                format!("tau must be finite and non-negative, got {tau}"),
            ));
        }
        Ok(VonMisesParams {
            nu: wrap_angle(nu),
            tau,
        })
    }
}

/// Maps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// von Mises density `exp(tau cos(theta - nu)) / (2 pi I0(tau))`.
pub fn vm_pdf(theta: f64, params: VonMisesParams) -> Result<f64> {
    if !theta.is_finite() {
        return Err(DancoError::domain("vm_pdf", format!("non-finite angle {theta}")));
    }
    let log = params.tau * (theta - params.nu).cos()
        - (2.0 * PI).ln()
        - log_bessel_i(0, params.tau)?;
    Ok(log.exp())
}

/// A von Mises fit to one sample of angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmFit {
    pub params: VonMisesParams,
    /// Mean resultant length of the sample.
    pub eta: f64,
    /// The concentration hit the cap.
    pub saturated: bool,
}

/// Piecewise approximation of `A^-1(eta)`.
pub fn inverse_bessel_ratio(eta: f64) -> f64 {
    if eta < 0.53 {
        2.0 * eta + eta.powi(3) + 5.0 * eta.powi(5) / 6.0
    } else if eta < 0.85 {
        -0.4 + 1.39 * eta + 0.43 / (1.0 - eta)
    } else {
        1.0 / (eta.powi(3) - 4.0 * eta * eta + 3.0 * eta)
    }
}

/// Maximum-likelihood von Mises fit: circular mean direction and the approximate
/// inverse of the Bessel ratio at the mean resultant length.
pub fn fit_vm(angles: &[f64], tau_cap: f64) -> Result<VmFit> {
    if angles.is_empty() {
        return Err(DancoError::param("cannot fit a von Mises law to no angles"));
    }
    let (s, c) = angles
        .iter()
        .fold((0.0, 0.0), |(s, c), &t| (s + t.sin(), c + t.cos()));
    let n = angles.len() as f64;
    let eta = ((c / n).powi(2) + (s / n).powi(2)).sqrt();
    let nu = wrap_angle(s.atan2(c));
    let (tau, saturated) = if eta >= ETA_ONE {
        (tau_cap, true)
    } else {
        let t = inverse_bessel_ratio(eta).max(0.0);
        if t >= tau_cap {
            (tau_cap, true)
        } else {
            (t, false)
        }
    };
    Ok(VmFit {
        params: VonMisesParams { nu, tau },
        eta,
        saturated,
    })
}

/// Closed-form `KL(q(.; p1) || q(.; p2))` between von Mises laws, clamped at 0.
pub fn kl_vonmises(p1: VonMisesParams, p2: VonMisesParams) -> Result<f64> {
    // (I1(t) - I1(-t)) / (2 I0(t)) = A(t) since I1 is odd
    let value = log_bessel_i(0, p2.tau)? - log_bessel_i(0, p1.tau)?
        + bessel_ratio_a(p1.tau)? * (p1.tau - p2.tau * (p2.nu - p1.nu).cos());
    Ok(value.max(0.0))
}

/// Neighborhood angle statistics of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleStats {
    pub per_point: Vec<VonMisesParams>,
    /// Circular mean of the per-point directions.
    pub mu_nu: f64,
    /// Arithmetic mean of the per-point concentrations.
    pub mu_tau: f64,
    pub excluded_pairs: usize,
    pub saturated_fits: usize,
}

/// Fits a von Mises law to the pairwise angles of every neighborhood.
pub fn angle_statistics(
    data: &DataMatrix,
    index: &NeighborhoodIndex,
    eps: f64,
    tau_cap: f64,
) -> Result<AngleStats> {
    let fits = par::try_map_range(index.n_points(), |i| {
        let a = pairwise_angles(data, index, i, eps)?;
        let fit = fit_vm(&a.angles, tau_cap)?;
        Ok((fit, a.excluded_pairs))
    })?;
    let per_point: Vec<VonMisesParams> = fits.iter().map(|(f, _)| f.params).collect();
    let excluded_pairs = fits.iter().map(|(_, e)| e).sum();
    let saturated_fits = fits.iter().filter(|(f, _)| f.saturated).count();
    let (s, c) = per_point
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.nu.sin(), c + p.nu.cos()));
    let mu_nu = wrap_angle(s.atan2(c));
    let mu_tau = per_point.iter().map(|p| p.tau).sum::<f64>() / per_point.len() as f64;
    Ok(AngleStats {
        per_point,
        mu_nu,
        mu_tau,
        excluded_pairs,
        saturated_fits,
    })
}

/// Fits a von Mises law to the angles between all pairs of `n_vectors` independent
/// uniform unit vectors in R^d and returns the concentration. The fitted value
/// approaches `d` as the dimension grows.
pub fn concentration_of_dimension(d: usize, n_vectors: usize, seed: u64) -> Result<f64> {
    if d < 2 {
        return Err(DancoError::param(format!("dimension must be at least 2, got {d}")));
    }
    if n_vectors < 2 {
        return Err(DancoError::param("need at least two vectors"));
    }
    let mut rng = substream(seed, 0);
    let mut vectors = vec![0.0; n_vectors * d];
    for v in vectors.chunks_exact_mut(d) {
        let mut norm2: f64 = 0.0;
        while norm2 == 0.0 {
            for x in v.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            norm2 = v.iter().map(|x| x * x).sum();
        }
        let inv = 1.0 / norm2.sqrt();
        v.iter_mut().for_each(|x| *x *= inv);
    }
    // per-row partial sums of (sin, cos), reduced in row order
    let rows = par::map_range(n_vectors, |i| {
        let vi = &vectors[i * d..(i + 1) * d];
        let mut s = 0.0;
        let mut c = 0.0;
        for j in (i + 1)..n_vectors {
            let vj = &vectors[j * d..(j + 1) * d];
            let cos = vi.iter().zip(vj).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            let theta = cos.acos();
            s += theta.sin();
            c += cos;
        }
        (s, c)
    });
    let (s, c) = rows.iter().fold((0.0, 0.0), |(s, c), r| (s + r.0, c + r.1));
    let n = (n_vectors * (n_vectors - 1) / 2) as f64;
    let eta = ((s / n).powi(2) + (c / n).powi(2)).sqrt();
    if eta >= ETA_ONE {
        return Ok(DEFAULT_TAU_CAP);
    }
    Ok(inverse_bessel_ratio(eta).clamp(0.0, DEFAULT_TAU_CAP))
}
