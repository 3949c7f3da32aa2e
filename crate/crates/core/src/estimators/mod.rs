//! Intrinsic dimension estimators.

pub mod cd;
pub mod danco;
pub mod mind;
pub mod mle;

use std::fmt;

use crate::error::{DancoError, Result};

pub use cd::{estimate_cd, CdOptions};
pub use danco::{estimate_danco, estimate_danco_with, DancoOptions};
pub use mind::estimate_mind_ml;
pub use mle::estimate_mle_lb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Danco,
    MindMl,
    Mle,
    Cd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Danco => "danco",
            Method::MindMl => "mind_ml",
            Method::Mle => "mle",
            Method::Cd => "cd",
        }
    }

    /// Whether the estimate is an integer by construction.
    pub fn is_integral(self) -> bool {
        matches!(self, Method::Danco | Method::MindMl)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = DancoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "danco" => Ok(Method::Danco),
            "mind_ml" | "mind" | "mindml" => Ok(Method::MindMl),
            "mle" | "levina_bickel" => Ok(Method::Mle),
            "cd" | "correlation" => Ok(Method::Cd),
            other => Err(DancoError::param(format!("unknown method `{other}`"))),
        }
    }
}

/// One candidate dimension of the DANCo objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlTerms {
    pub d: usize,
    pub kl_norm: f64,
    pub kl_vm: f64,
    pub total: f64,
}

/// Parameters echoed back with an estimate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateParams {
    pub k: Option<usize>,
    pub k_range: Option<(usize, usize)>,
    pub max_dim: Option<usize>,
    pub calibration_seed: Option<u64>,
    pub calibration_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub method: Method,
    pub d_hat: f64,
    pub kl_profile: Option<Vec<KlTerms>>,
    pub params: EstimateParams,
    pub warnings: Vec<String>,
    /// Named scalar side outputs (ML dimension, fit residuals, ...).
    pub diagnostics: Vec<(&'static str, f64)>,
}

impl EstimateResult {
    pub(crate) fn new(method: Method, d_hat: f64, params: EstimateParams) -> Self {
        EstimateResult {
            method,
            d_hat,
            kl_profile: None,
            params,
            warnings: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }
}

/// Mean percentage error `100/M * sum |d_hat - d| / d` over `(d_true, d_hat)` pairs.
pub fn mpe(results: &[(f64, f64)]) -> Result<f64> {
    if results.is_empty() {
        return Err(DancoError::param("mean percentage error of an empty list"));
    }
    if let Some((d, _)) = results.iter().find(|(d, _)| !(*d > 0.0)) {
        return Err(DancoError::param(format!("true dimension must be positive, got {d}")));
    }
    let total: f64 = results.iter().map(|(d, e)| (e - d).abs() / d).sum();
    Ok(100.0 * total / results.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mpe_basics() {
        assert_eq!(mpe(&[(3.0, 3.0), (10.0, 10.0)]).unwrap(), 0.0);
        assert_eq!(mpe(&[(10.0, 9.0)]).unwrap(), 10.0);
        assert!((mpe(&[(10.0, 9.0), (2.0, 3.0)]).unwrap() - 30.0).abs() < 1e-12);
        assert!(mpe(&[]).is_err());
        assert!(mpe(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Danco, Method::MindMl, Method::Mle, Method::Cd] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("hein".parse::<Method>().is_err());
    }
}
