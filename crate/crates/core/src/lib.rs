//! Intrinsic dimension estimation.
//!
//! The main estimator, DANCo, compares two neighborhood statistics of a point
//! cloud against the same statistics measured on uniform samples of d-balls:
//! the normalized nearest-neighbor distance and the distribution of pairwise
//! angles between neighbor vectors. The candidate d whose reference is closest
//! in Kullback-Leibler divergence is the estimate.
//!
//! Baselines (MiND_ML, Levina-Bickel MLE, correlation dimension), synthetic
//! benchmark manifolds and a benchmark harness are included.
//!
//! ```no_run
//! use danco::{build_calibration, datasets, estimate_danco};
//!
//! let spec = datasets::ManifoldSpec::named("m9a", 2500, 1)?;
//! let data = datasets::generate(&spec)?;
//! let calib = build_calibration(11, data.n_points(), 10, 1, 7)?;
//! let est = estimate_danco(&data, 10, 11, &calib)?;
//! println!("d = {}", est.d_hat);
//! # Ok::<(), danco::DancoError>(())
//! ```
//!
//! With the default `parallel` feature, per-point and per-dimension work runs on
//! the rayon pool. Building with `--no-default-features` gives a purely
//! sequential library with identical results.

pub mod angle_model;
pub mod bench;
pub mod calibration;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod estimators;
pub mod matrix;
pub mod neighbors;
pub mod norm_model;
pub mod par;
mod quadrature;
pub mod rng;
pub mod special;

pub use calibration::{build_calibration, load_calibration, save_calibration, CalibrationTable};
pub use error::{DancoError, Result};
pub use estimators::{
    estimate_cd, estimate_danco, estimate_mind_ml, estimate_mle_lb, mpe, EstimateResult, Method,
};
pub use matrix::DataMatrix;
