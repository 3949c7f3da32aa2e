//! Synthetic manifold generators, delay embedding and delimited-table I/O.
//!
//! Generators produce their natural coordinates and zero-pad up to the requested
//! ambient dimension; padding is an isometric embedding, so it leaves every
//! distance and angle unchanged.
//!
//! Standard forms used where the benchmark tool's exact formula is not published:
//!
//! * `swiss_roll`: `t = 1.5 pi (1 + 2u)`, `h = 21 v`, point `(t cos t, h, t sin t)`.
//! * `helix`: the 2-d helicoid `r, p ~ U(0, 10 pi)`, point `(r cos p, r sin p, p / 2)`.

mod table;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::calibration::sample_hypersphere;
use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;
use crate::rng::{family, stream_id, substream, StreamRng};

pub use table::{
    load_table, parse_table, render_table, write_table, HeaderMode, LoadedTable, TableOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    /// Uniform `[0,1]^d`.
    Hypercube,
    /// Uniform in the unit d-ball.
    Ball,
    /// Uniform on the unit sphere `S^d` in `R^(d+1)`.
    SphereSurface,
    /// Uniform `[0,1]^d` under a random isometric linear map plus offset.
    Affine,
    /// Isotropic standard normal.
    Gaussian,
    SwissRoll,
    Helix,
    /// `u ~ U[0,1]^d`, coordinates `[u sin(cos(2 pi u)), u cos(sin(2 pi u))]`, each
    /// duplicated, giving `4d` coordinates.
    Nonlinear,
}

impl Manifold {
    pub fn name(self) -> &'static str {
        match self {
            Manifold::Hypercube => "hypercube",
            Manifold::Ball => "ball",
            Manifold::SphereSurface => "sphere_surface",
            Manifold::Affine => "affine",
            Manifold::Gaussian => "gaussian",
            Manifold::SwissRoll => "swiss_roll",
            Manifold::Helix => "helix",
            Manifold::Nonlinear => "nonlinear",
        }
    }

    /// Coordinates the generator produces before padding.
    pub fn native_dim(self, d: usize) -> usize {
        match self {
            Manifold::Hypercube | Manifold::Ball | Manifold::Gaussian | Manifold::Affine => d,
            Manifold::SphereSurface => d + 1,
            Manifold::SwissRoll | Manifold::Helix => 3,
            Manifold::Nonlinear => 4 * d,
        }
    }

    /// Ambient size used when none is requested; hypercubes get one zero coordinate.
    pub fn default_ambient(self, d: usize) -> usize {
        match self {
            Manifold::Hypercube => d + 1,
            _ => self.native_dim(d),
        }
    }

    fn fixed_dim(self) -> Option<usize> {
        match self {
            Manifold::SwissRoll | Manifold::Helix => Some(2),
            _ => None,
        }
    }
}

impl FromStr for Manifold {
    type Err = DancoError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "hypercube" | "cube" => Manifold::Hypercube,
            "ball" => Manifold::Ball,
            "sphere_surface" | "sphere" => Manifold::SphereSurface,
            "affine" => Manifold::Affine,
            "gaussian" | "normal" => Manifold::Gaussian,
            "swiss_roll" | "swissroll" => Manifold::SwissRoll,
            "helix" => Manifold::Helix,
            "nonlinear" => Manifold::Nonlinear,
            other => return Err(DancoError::param(format!("unknown generator `{other}`"))),
        })
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    /// Display label, e.g. `m9a`.
    pub label: String,
    pub manifold: Manifold,
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub n_points: usize,
    pub seed: u64,
}

/// Benchmark datasets with published constructions: `(label, generator, d, D)`.
pub const NAMED_DATASETS: &[(&str, Manifold, usize, usize)] = &[
    ("m1", Manifold::SphereSurface, 10, 11),
    ("m2", Manifold::Affine, 3, 5),
    ("m5", Manifold::Helix, 2, 3),
    ("m7", Manifold::SwissRoll, 2, 3),
    ("m8", Manifold::Affine, 20, 20),
    ("m9a", Manifold::Hypercube, 10, 11),
    ("m9b", Manifold::Hypercube, 17, 18),
    ("m9c", Manifold::Hypercube, 24, 25),
    ("m9d", Manifold::Hypercube, 70, 71),
    ("m11", Manifold::Gaussian, 20, 20),
    ("m13", Manifold::Nonlinear, 18, 72),
    ("m14", Manifold::Nonlinear, 24, 96),
];

/// Benchmark datasets that are not generated because no construction is available.
pub const EXCLUDED_DATASETS: &[&str] = &["m3", "m4", "m6", "m10", "m12"];

impl ManifoldSpec {
    pub fn new(
        manifold: Manifold,
        intrinsic_dim: usize,
        ambient_dim: usize,
        n_points: usize,
        seed: u64,
    ) -> Result<Self> {
        let spec = ManifoldSpec {
            label: format!("{}{}", manifold.name(), intrinsic_dim),
            manifold,
            intrinsic_dim,
            ambient_dim,
            n_points,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One of [`NAMED_DATASETS`] by label.
    pub fn named(label: &str, n_points: usize, seed: u64) -> Result<Self> {
        let key = label.to_ascii_lowercase();
        if EXCLUDED_DATASETS.contains(&key.as_str()) {
            return Err(DancoError::param(format!(
                "dataset `{label}` has no published construction and is not generated"
            )));
        }
        let &(name, manifold, d, big_d) = NAMED_DATASETS
            .iter()
            .find(|(n, ..)| *n == key)
            .ok_or_else(|| DancoError::param(format!("unknown dataset `{label}`")))?;
        let mut spec = Self::new(manifold, d, big_d, n_points, seed)?;
        spec.label = name.to_string();
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ManifoldSpec {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.intrinsic_dim;
        if d == 0 {
            return Err(DancoError::param("intrinsic dimension must be at least 1"));
        }
        if let Some(fixed) = self.manifold.fixed_dim() {
            if d != fixed {
                return Err(DancoError::param(format!(
                    "{} is {fixed}-dimensional, got d = {d}",
                    self.manifold
                )));
            }
        }
        let native = self.manifold.native_dim(d);
        if self.ambient_dim < native {
            return Err(DancoError::param(format!(
                "{} with d = {d} needs at least {native} ambient dimensions, got {}",
                self.manifold, self.ambient_dim
            )));
        }
        if self.n_points == 0 {
            return Err(DancoError::param("n_points must be positive"));
        }
        Ok(())
    }
}

/// Draws `spec.n_points` points; bitwise deterministic in `spec.seed`.
pub fn generate(spec: &ManifoldSpec) -> Result<DataMatrix> {
    spec.validate()?;
    let mut rng = substream(spec.seed, stream_id(family::DATASET, 0, 0));
    let d = spec.intrinsic_dim;
    let n = spec.n_points;
    let native = match spec.manifold {
        Manifold::Hypercube => uniform_cube(d, n, &mut rng),
        Manifold::Ball => sample_hypersphere(d, n, &mut rng)?.as_slice().to_vec(),
        Manifold::SphereSurface => sphere_surface(d + 1, n, &mut rng),
        Manifold::Gaussian => (0..n * d).map(|_| rng.sample(StandardNormal)).collect(),
        Manifold::Affine => affine(d, spec.ambient_dim, n, &mut rng)?,
        Manifold::SwissRoll => swiss_roll(n, &mut rng),
        Manifold::Helix => helicoid(n, &mut rng),
        Manifold::Nonlinear => nonlinear(d, n, &mut rng),
    };
    let native_dim = if spec.manifold == Manifold::Affine {
        spec.ambient_dim
    } else {
        spec.manifold.native_dim(d)
    };
    DataMatrix::new(pad(native, native_dim, spec.ambient_dim), n, spec.ambient_dim)
}

fn pad(values: Vec<f64>, from: usize, to: usize) -> Vec<f64> {
    if from == to {
        return values;
    }
    let mut out = Vec::with_capacity(values.len() / from * to);
    for row in values.chunks_exact(from) {
        out.extend_from_slice(row);
        out.resize(out.len() + (to - from), 0.0);
    }
    out
}

fn uniform_cube(d: usize, n: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..n * d).map(|_| rng.random::<f64>()).collect()
}

fn sphere_surface(dim: usize, n: usize, rng: &mut StreamRng) -> Vec<f64> {
    let mut values = vec![0.0; n * dim];
    for p in values.chunks_exact_mut(dim) {
        let mut norm2: f64 = 0.0;
        while norm2 == 0.0 {
            for x in p.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            norm2 = p.iter().map(|x| x * x).sum();
        }
        let inv = 1.0 / norm2.sqrt();
        p.iter_mut().for_each(|x| *x *= inv);
    }
    values
}

/// Orthonormal rows of a random d x big_d Gaussian matrix (modified Gram–Schmidt).
fn orthonormal_rows(d: usize, big_d: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    let mut w: Vec<f64> = (0..d * big_d).map(|_| rng.sample(StandardNormal)).collect();
    for i in 0..d {
        for j in 0..i {
            let (head, tail) = w.split_at_mut(i * big_d);
            let wj = &head[j * big_d..(j + 1) * big_d];
            let wi = &mut tail[..big_d];
            let dot: f64 = wi.iter().zip(wj).map(|(a, b)| a * b).sum();
            wi.iter_mut().zip(wj).for_each(|(a, b)| *a -= dot * b);
        }
        let wi = &mut w[i * big_d..(i + 1) * big_d];
        let norm = wi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return Err(DancoError::NumericInstability(
                "random basis is rank deficient".into(),
            ));
        }
        wi.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(w)
}

fn affine(d: usize, big_d: usize, n: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    let basis = orthonormal_rows(d, big_d, rng)?;
    let offset: Vec<f64> = (0..big_d).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity(n * big_d);
    let mut u = vec![0.0; d];
    for _ in 0..n {
        u.iter_mut().for_each(|x| *x = rng.random::<f64>());
        for c in 0..big_d {
            let v: f64 = (0..d).map(|r| u[r] * basis[r * big_d + c]).sum();
            out.push(v + offset[c]);
        }
    }
    Ok(out)
}

fn swiss_roll(n: usize, rng: &mut StreamRng) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
        let h = 21.0 * rng.random::<f64>();
        out.extend([t * t.cos(), h, t * t.sin()]);
    }
    out
}

fn helicoid(n: usize, rng: &mut StreamRng) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let r = 10.0 * PI * rng.random::<f64>();
        let p = 10.0 * PI * rng.random::<f64>();
        out.extend([r * p.cos(), r * p.sin(), 0.5 * p]);
    }
    out
}

fn nonlinear(d: usize, n: usize, rng: &mut StreamRng) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * d * n);
    let mut u = vec![0.0; d];
    let mut row = Vec::with_capacity(2 * d);
    for _ in 0..n {
        u.iter_mut().for_each(|x| *x = rng.random::<f64>());
        row.clear();
        row.extend(u.iter().map(|&x| x * (2.0 * PI * x).cos().sin()));
        row.extend(u.iter().map(|&x| x * (2.0 * PI * x).sin().cos()));
        for &v in &row {
            out.extend([v, v]);
        }
    }
    out
}

/// Method of delays with non-overlapping windows: row `t` is
/// `series[t*dim .. (t+1)*dim]`; a trailing partial window is dropped.
pub fn delay_embed(series: &[f64], dim: usize) -> Result<DataMatrix> {
    if dim == 0 {
        return Err(DancoError::param("embedding dimension must be at least 1"));
    }
    if series.len() < dim {
        return Err(DancoError::Data(format!(
            "series of length {} is shorter than the embedding dimension {dim}",
            series.len()
        )));
    }
    let rows = series.len() / dim;
    DataMatrix::new(series[..rows * dim].to_vec(), rows, dim)
}
