//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use danco::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`, refined until two
/// successive levels agree to `tol`. `f` is never evaluated at the endpoints.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 4.0;
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
        // distance to the nearer endpoint, computed without cancellation
        let gap = half / (u.abs().exp() * u.abs().cosh());
        let point = if x < 0.0 { a + gap } else { b - gap };
        if gap <= 0.0 || !(point > a && point < b) || w == 0.0 {
            return 0.0;
        }
        let y = f(point);
        if y.is_finite() {
            w * y
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut t = h;
    while t <= t_max {
        sum += eval(t) + eval(-t);
        t += h;
    }
    let mut estimate = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += eval(t) + eval(-t);
            t += 2.0 * h;
        }
        let next = sum * h * half;
        if (next - estimate).abs() <= tol * next.abs().max(1.0) * 1e-2 {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Trapezoid rule over one period `[c - pi, c + pi)`, doubling until converged;
/// spectrally accurate for smooth periodic integrands.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut m = 64usize;
    let mut prev = f64::NAN;
    loop {
        let h = 2.0 * PI / m as f64;
        let s: f64 = (0..m).map(|j| f(-PI + j as f64 * h)).sum::<f64>() * h;
        if (s - prev).abs() <= tol * s.abs().max(1.0) * 1e-2 || m > 1 << 20 {
            return s;
        }
        prev = s;
        m *= 2;
    }
}

/// `ln I0(x)` from `I0(x) = (1/pi) int_0^pi exp(x cos t) dt`, scaled by `exp(-x)`.
pub fn ln_i0(x: f64) -> f64 {
    let scaled = periodic_trapezoid(|t| (x * (t.cos() - 1.0)).exp(), 1e-15) / (2.0 * PI);
    x + scaled.ln()
}

/// `ln g(r; k, d)` for the normalized nearest-neighbor distance law.
pub fn ln_norm_density(r: f64, k: usize, d: f64) -> f64 {
    (k as f64 * d).ln() + (d - 1.0) * r.ln() + (k as f64 - 1.0) * (-(d * r.ln()).exp_m1()).ln()
}

/// `KL(g(.; k, a) || g(.; k, b))` by numerical integration.
pub fn kl_norms_quadrature(a: f64, b: f64, k: usize) -> f64 {
    tanh_sinh(
        |r| {
            let la = ln_norm_density(r, k, a);
            let lb = ln_norm_density(r, k, b);
            la.exp() * (la - lb)
        },
        0.0,
        1.0,
        1e-12,
    )
}

/// `KL(vM(nu1, tau1) || vM(nu2, tau2))` by numerical integration.
pub fn kl_vonmises_quadrature(nu1: f64, tau1: f64, nu2: f64, tau2: f64) -> f64 {
    let l1 = ln_i0(tau1);
    let l2 = ln_i0(tau2);
    let cross = periodic_trapezoid(
        |t| {
            let log_q1 = tau1 * (t - nu1).cos() - (2.0 * PI).ln() - l1;
            log_q1.exp() * (tau1 * (t - nu1).cos() - tau2 * (t - nu2).cos())
        },
        1e-15,
    );
    cross + l2 - l1
}

/// Draws from `g(.; k, d)` by inverting `F(r) = 1 - (1 - r^d)^k`.
pub fn sample_norm_law(k: usize, d: f64, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (1.0 - (1.0 - u).powf(1.0 / k as f64)).powf(1.0 / d)
        })
        .collect()
}

/// Norm-law CDF.
pub fn norm_law_cdf(r: f64, k: usize, d: f64) -> f64 {
    1.0 - (1.0 - r.powf(d)).powi(k as i32)
}

/// von Mises draws by rejection from the uniform law on the circle.
pub fn sample_vonmises(nu: f64, tau: f64, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t: f64 = rng.random_range(-PI..PI);
        let u: f64 = rng.random();
        if u.ln() <= tau * ((t - nu).cos() - 1.0) {
            out.push(t);
        }
    }
    out
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// All-pairs k+1 nearest neighbors: `(index, squared distance)` sorted by distance,
/// then index.
pub fn brute_knn(data: &DataMatrix, width: usize) -> Vec<Vec<(usize, f64)>> {
    (0..data.n_points())
        .map(|i| {
            let mut all: Vec<(usize, f64)> = (0..data.n_points())
                .filter(|&j| j != i)
                .map(|j| {
                    let d2 = data
                        .row(i)
                        .iter()
                        .zip(data.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>();
                    (j, d2)
                })
                .collect();
            all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            all.truncate(width);
            all
        })
        .collect()
}

pub fn gaussian_matrix(n: usize, dim: usize, rng: &mut impl Rng) -> DataMatrix {
    let values = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
    DataMatrix::new(values, n, dim).unwrap()
}

/// Uniform points in the unit d-ball, drawn independently of the library sampler.
pub fn ball_matrix(n: usize, dim: usize, rng: &mut impl Rng) -> DataMatrix {
    let mut values = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = rng.random::<f64>().powf(1.0 / dim as f64);
        values.extend(g.iter().map(|x| x / norm * r));
    }
    DataMatrix::new(values, n, dim).unwrap()
}

/// Random orthogonal matrix (row-major) by Gram–Schmidt on Gaussian rows.
pub fn random_rotation(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for u in &q {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    q.concat()
}

/// `x -> s * R x + t` applied to every row.
pub fn rigid_motion(data: &DataMatrix, rot: &[f64], scale: f64, shift: &[f64]) -> DataMatrix {
    let dim = data.ambient_dim();
    data.map_rows(|src, dst| {
        for (i, out) in dst.iter_mut().enumerate() {
            let r: f64 = (0..dim).map(|j| rot[i * dim + j] * src[j]).sum();
            *out = scale * r + shift[i];
        }
    })
    .unwrap()
}
