//! Multi-instance, multi-estimator evaluation on synthetic manifolds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use crate::calibration::{build_calibration, CalibrationTable};
use crate::datasets::{generate, ManifoldSpec, NAMED_DATASETS};
use crate::error::{DancoError, Result};
use crate::estimators::{
    estimate_cd, estimate_danco_with, estimate_mind_ml, estimate_mle_lb, mpe, CdOptions,
    DancoOptions,
};
use crate::par;
use crate::rng::{family, stream_id, substream};

/// Instances per dataset in the full-scale protocol.
pub const FULL_INSTANCES: usize = 20;
/// Instances per dataset in the default desk-scale protocol.
pub const DESK_INSTANCES: usize = 5;
/// Points per synthetic instance.
pub const DEFAULT_POINTS: usize = 2500;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorConfig {
    /// `max_dim: None` searches up to the ambient dimension of each dataset.
    Danco {
        k: usize,
        max_dim: Option<usize>,
        n_reps: usize,
    },
    MindMl {
        k: usize,
        max_dim: Option<usize>,
    },
    Mle {
        k1: usize,
        k2: usize,
    },
    Cd(CdOptions),
}

impl EstimatorConfig {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorConfig::Danco { .. } => "danco",
            EstimatorConfig::MindMl { .. } => "mind_ml",
            EstimatorConfig::Mle { .. } => "mle",
            EstimatorConfig::Cd(_) => "cd",
        }
    }

    /// Synthetic-data defaults: k = 10 for the neighborhood estimators, k in 6..=20 for MLE.
    pub fn synthetic_defaults() -> Vec<EstimatorConfig> {
        vec![
            EstimatorConfig::Danco {
                k: 10,
                max_dim: None,
                n_reps: 1,
            },
            EstimatorConfig::MindMl { k: 10, max_dim: None },
            EstimatorConfig::Mle { k1: 6, k2: 20 },
            EstimatorConfig::Cd(CdOptions::default()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchDataset {
    /// Template; the seed is replaced per instance.
    pub spec: ManifoldSpec,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub datasets: Vec<BenchDataset>,
    pub estimators: Vec<EstimatorConfig>,
    pub seed: u64,
}

impl BenchPlan {
    /// Every generated synthetic dataset with `instances` instances of `n_points` points.
    pub fn synthetic(instances: usize, n_points: usize, seed: u64) -> Result<Self> {
        Self::from_labels(
            &NAMED_DATASETS.iter().map(|(l, ..)| *l).collect::<Vec<_>>(),
            instances,
            n_points,
            EstimatorConfig::synthetic_defaults(),
            seed,
        )
    }

    /// A quick three-dataset plan.
    pub fn small(seed: u64) -> Result<Self> {
        Self::from_labels(
            &["m7", "m9a", "m1"],
            2,
            1000,
            EstimatorConfig::synthetic_defaults(),
            seed,
        )
    }

    pub fn from_labels(
        labels: &[&str],
        instances: usize,
        n_points: usize,
        estimators: Vec<EstimatorConfig>,
        seed: u64,
    ) -> Result<Self> {
        let datasets = labels
            .iter()
            .map(|l| {
                Ok(BenchDataset {
                    spec: ManifoldSpec::named(l, n_points, 0)?,
                    instances,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let plan = BenchPlan {
            datasets,
            estimators,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.estimators.is_empty() {
            return Err(DancoError::param("a plan needs at least one dataset and one estimator"));
        }
        if let Some(ds) = self.datasets.iter().find(|d| d.instances == 0) {
            return Err(DancoError::param(format!("dataset {} has zero instances", ds.spec.label)));
        }
        Ok(())
    }

    fn instance_seed(&self, dataset: usize, instance: usize) -> u64 {
        substream(self.seed, stream_id(family::BENCH, dataset as u64, instance as u64)).random()
    }

    /// Calibration seed for instance `i`; shared by every dataset with the same N and k.
    fn calibration_seed(&self, instance: usize) -> u64 {
        substream(self.seed, stream_id(family::BENCH, 0xff_ffff, instance as u64)).random()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub label: String,
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub instances: usize,
}

/// Outcome of one (dataset, estimator) pair across its instances.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub estimates: Vec<Option<f64>>,
    pub errors: Vec<String>,
    /// Mean over instances; `None` when any instance failed.
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub datasets: Vec<DatasetInfo>,
    pub estimators: Vec<String>,
    /// Row-major: `cells[dataset * estimators.len() + estimator]`.
    pub cells: Vec<BenchCell>,
    /// Per estimator, over datasets with a complete cell.
    pub mpe: Vec<Option<f64>>,
    pub seed: u64,
    pub version: String,
    /// Wall-clock seconds per cell, summed over instances. Not part of result equality.
    pub wall_time: Vec<f64>,
}

impl BenchReport {
    pub fn cell(&self, dataset: usize, estimator: usize) -> &BenchCell {
        &self.cells[dataset * self.estimators.len() + estimator]
    }

    pub fn estimator_index(&self, label: &str) -> Option<usize> {
        self.estimators.iter().position(|e| e == label)
    }

    pub fn dataset_index(&self, label: &str) -> Option<usize> {
        self.datasets.iter().position(|d| d.label == label)
    }

    /// Equality of everything except timings.
    pub fn same_results(&self, other: &BenchReport) -> bool {
        self.datasets == other.datasets
            && self.estimators == other.estimators
            && self.cells == other.cells
            && self.mpe == other.mpe
            && self.seed == other.seed
    }

    /// `(d_true, mean d_hat)` pairs behind an estimator's MPE.
    pub fn mpe_pairs(&self, estimator: usize) -> Vec<(f64, f64)> {
        self.datasets
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                self.cell(i, estimator)
                    .mean
                    .map(|m| (d.intrinsic_dim as f64, m))
            })
            .collect()
    }
}

type CalibKey = (usize, usize, usize, u64);

fn run_estimator(
    config: &EstimatorConfig,
    data: &crate::DataMatrix,
    calib: Option<&CalibrationTable>,
) -> Result<f64> {
    let ambient = data.ambient_dim();
    let r = match config {
        EstimatorConfig::Danco { k, max_dim, .. } => {
            let calib = calib.ok_or_else(|| DancoError::param("missing calibration"))?;
            estimate_danco_with(data, *k, max_dim.unwrap_or(ambient), calib, &DancoOptions::default())?
        }
        EstimatorConfig::MindMl { k, max_dim } => estimate_mind_ml(data, *k, max_dim.unwrap_or(ambient))?,
        EstimatorConfig::Mle { k1, k2 } => estimate_mle_lb(data, *k1, *k2)?,
        EstimatorConfig::Cd(opts) => estimate_cd(data, opts)?,
    };
    Ok(r.d_hat)
}

/// Generates every instance, runs every estimator on it, and summarizes.
///
/// Per-cell failures are recorded in the report and do not abort the run.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchReport> {
    plan.validate()?;
    let n_est = plan.estimators.len();

    // calibration tables, one per (N, k, reps, seed), sized for the largest request
    let mut wanted: BTreeMap<CalibKey, usize> = BTreeMap::new();
    for ds in &plan.datasets {
        for cfg in &plan.estimators {
            if let EstimatorConfig::Danco { k, max_dim, n_reps } = cfg {
                let dim = max_dim.unwrap_or(ds.spec.ambient_dim);
                for inst in 0..ds.instances {
                    let key = (ds.spec.n_points, *k, *n_reps, plan.calibration_seed(inst));
                    let e = wanted.entry(key).or_insert(0);
                    *e = (*e).max(dim);
                }
            }
        }
    }
    let keys: Vec<(CalibKey, usize)> = wanted.into_iter().collect();
    let built = par::map_slice(&keys, |&((n, k, reps, seed), dim)| {
        build_calibration(dim, n, k, reps, seed).map(Arc::new)
    });
    let calibrations: BTreeMap<CalibKey, std::result::Result<Arc<CalibrationTable>, String>> = keys
        .iter()
        .zip(built)
        .map(|((key, _), r)| (*key, r.map_err(|e| e.to_string())))
        .collect();

    // one job per (dataset, instance)
    let jobs: Vec<(usize, usize)> = plan
        .datasets
        .iter()
        .enumerate()
        .flat_map(|(di, ds)| (0..ds.instances).map(move |inst| (di, inst)))
        .collect();
    let outcomes = par::map_slice(&jobs, |&(di, inst)| {
        let ds = &plan.datasets[di];
        let spec = ds.spec.with_seed(plan.instance_seed(di, inst));
        let data = generate(&spec);
        plan.estimators
            .iter()
            .map(|cfg| {
                let start = Instant::now();
                let value = match &data {
                    Err(e) => Err(format!("generate: {e}")),
                    Ok(data) => {
                        let calib = match cfg {
                            EstimatorConfig::Danco { k, n_reps, .. } => {
                                let key = (spec.n_points, *k, *n_reps, plan.calibration_seed(inst));
                                match &calibrations[&key] {
                                    Ok(t) => Some(Arc::clone(t)),
                                    Err(e) => {
                                        return (Err(format!("calibration: {e}")), start.elapsed().as_secs_f64())
                                    }
                                }
                            }
                            _ => None,
                        };
                        run_estimator(cfg, data, calib.as_deref()).map_err(|e| e.to_string())
                    }
                };
                (value, start.elapsed().as_secs_f64())
            })
            .collect::<Vec<_>>()
    });

    let mut cells = Vec::with_capacity(plan.datasets.len() * n_est);
    let mut wall_time = Vec::with_capacity(cells.capacity());
    let mut cursor = 0;
    for ds in &plan.datasets {
        let rows = &outcomes[cursor..cursor + ds.instances];
        cursor += ds.instances;
        for e in 0..n_est {
            let mut estimates = Vec::with_capacity(ds.instances);
            let mut errors = Vec::new();
            let mut secs = 0.0;
            for (inst, row) in rows.iter().enumerate() {
                let (value, t) = &row[e];
                secs += t;
                match value {
                    Ok(v) => estimates.push(Some(*v)),
                    Err(msg) => {
                        estimates.push(None);
                        errors.push(format!("instance {inst}: {msg}"));
                    }
                }
            }
            let mean = errors
                .is_empty()
                .then(|| estimates.iter().flatten().sum::<f64>() / ds.instances as f64);
            cells.push(BenchCell {
                estimates,
                errors,
                mean,
            });
            wall_time.push(secs);
        }
    }

    let mut report = BenchReport {
        datasets: plan
            .datasets
            .iter()
            .map(|ds| DatasetInfo {
                label: ds.spec.label.clone(),
                intrinsic_dim: ds.spec.intrinsic_dim,
                ambient_dim: ds.spec.ambient_dim,
                instances: ds.instances,
            })
            .collect(),
        estimators: plan.estimators.iter().map(|e| e.label().to_string()).collect(),
        cells,
        mpe: Vec::new(),
        seed: plan.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time,
    };
    report.mpe = (0..n_est)
        .map(|e| {
            let pairs = report.mpe_pairs(e);
            (!pairs.is_empty()).then(|| mpe(&pairs)).transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Aligned columns for terminals.
    Plain,
    /// Comma-separated numbers; row labels go in a leading comment, the MPE row
    /// is last with `d = 0`.
    Delimited,
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "ERR".to_string(), |x| format!("{x:.2}"))
}

/// Renders datasets as rows and estimators as columns, two decimals, MPE last.
pub fn render_report(report: &BenchReport, format: ReportFormat) -> String {
    let n_est = report.estimators.len();
    let mut out = String::new();
    match format {
        ReportFormat::Plain => {
            let mut rows: Vec<Vec<String>> = Vec::new();
            let mut header = vec!["dataset".to_string(), "d".to_string()];
            header.extend(report.estimators.iter().cloned());
            rows.push(header);
            for (i, ds) in report.datasets.iter().enumerate() {
                let mut row = vec![ds.label.clone(), ds.intrinsic_dim.to_string()];
                row.extend((0..n_est).map(|e| fmt_value(report.cell(i, e).mean)));
                rows.push(row);
            }
            if !report.datasets.is_empty() {
                let mut row = vec!["MPE".to_string(), "-".to_string()];
                row.extend(report.mpe.iter().map(|m| fmt_value(*m)));
                rows.push(row);
            }
            let widths: Vec<usize> = (0..n_est + 2)
                .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
                .collect();
            for row in &rows {
                let line: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(c, s)| {
                        if c == 0 {
                            format!("{s:<w$}", w = widths[c])
                        } else {
                            format!("{s:>w$}", w = widths[c])
                        }
                    })
                    .collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
        }
        ReportFormat::Delimited => {
            let mut labels: Vec<&str> = report.datasets.iter().map(|d| d.label.as_str()).collect();
            if !report.datasets.is_empty() {
                labels.push("mpe");
            }
            let _ = writeln!(out, "# rows: {}", labels.join(" "));
            let _ = writeln!(out, "d,{}", report.estimators.join(","));
            let nan = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.2}"));
            for (i, ds) in report.datasets.iter().enumerate() {
                let vals: Vec<String> = (0..n_est).map(|e| nan(report.cell(i, e).mean)).collect();
                let _ = writeln!(out, "{:.2},{}", ds.intrinsic_dim as f64, vals.join(","));
            }
            if !report.datasets.is_empty() {
                let vals: Vec<String> = report.mpe.iter().map(|m| nan(*m)).collect();
                let _ = writeln!(out, "0.00,{}", vals.join(","));
            }
        }
    }
    out
}

/// One line per cell: label, estimator, wall time, instance count.
pub fn render_timings(report: &BenchReport) -> String {
    let mut out = String::new();
    for (i, ds) in report.datasets.iter().enumerate() {
        for (e, est) in report.estimators.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<6} {:<8} {:>9.3}s  ({} instances, D = {})",
                ds.label,
                est,
                report.wall_time[i * report.estimators.len() + e],
                ds.instances,
                ds.ambient_dim
            );
        }
    }
    out
}
