//! Reference statistics from uniformly sampled d-balls, one entry per candidate
//! dimension, plus a plain-text cache format.
//!
//! Cache layout (one `key value` per header line, then one record per dimension):
//!
//! ```text
//! # danco calibration table
//! format_version 1
//! generator chacha8
//! n_points 2500
//! k 10
//! max_dim 30
//! n_reps 1
//! seed 7
//! columns d d_check_ml mu_nu mu_tau
//! 1 0.9871... 1.5707... 1.2034...
//! ...
//! end
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is bit exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{DancoError, Result};
use crate::estimators::danco::{neighborhood_statistics, StatisticsOptions};
use crate::matrix::DataMatrix;
use crate::par;
use crate::rng::{family, stream_id, substream, GENERATOR_NAME};

pub const FORMAT_VERSION: u32 = 1;

const HEADER_LINE: &str = "# danco calibration table";
const COLUMNS_LINE: &str = "columns d d_check_ml mu_nu mu_tau";
const END_LINE: &str = "end";

/// Reference statistics for one candidate dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationEntry {
    pub d: usize,
    pub d_check_ml: f64,
    pub mu_nu: f64,
    pub mu_tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub entries: Vec<CalibrationEntry>,
    pub n_points: usize,
    pub k: usize,
    pub n_reps: usize,
    pub seed: u64,
    pub format_version: u32,
}

impl CalibrationTable {
    pub fn max_dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, d: usize) -> Option<&CalibrationEntry> {
        d.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    /// Checks that entries cover 1..=max_dim contiguously with valid values.
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(DancoError::CalibrationInvariant("table has no entries".into()));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.d != i + 1 {
                return Err(DancoError::CalibrationInvariant(format!(
                    "expected entry for d = {}, found d = {}",
                    i + 1,
                    e.d
                )));
            }
            if !(e.d_check_ml.is_finite() && e.d_check_ml >= 1.0) {
                return Err(DancoError::CalibrationInvariant(format!(
                    "d = {}: d_check_ml {} is not a dimension >= 1",
                    e.d, e.d_check_ml
                )));
            }
            if !(e.mu_tau.is_finite() && e.mu_tau >= 0.0) || !e.mu_nu.is_finite() {
                return Err(DancoError::CalibrationInvariant(format!(
                    "d = {}: invalid angle statistics ({}, {})",
                    e.d, e.mu_nu, e.mu_tau
                )));
            }
        }
        if self.k == 0 || self.k + 2 > self.n_points {
            return Err(DancoError::CalibrationInvariant(format!(
                "k = {} incompatible with n_points = {}",
                self.k, self.n_points
            )));
        }
        Ok(())
    }

    /// Refuses to compare against statistics computed with a different sample
    /// size or neighborhood, or over more candidate dimensions than the table holds.
    pub fn check_compatible(&self, n_points: usize, k: usize, max_dim: usize) -> Result<()> {
        if self.n_points != n_points || self.k != k {
            return Err(DancoError::CalibrationMismatch(format!(
                "table was built for N = {}, k = {} but the data has N = {n_points}, k = {k}",
                self.n_points, self.k
            )));
        }
        if max_dim > self.max_dim() {
            return Err(DancoError::CalibrationMismatch(format!(
                "table covers d <= {} but {max_dim} candidates were requested",
                self.max_dim()
            )));
        }
        Ok(())
    }
}

/// `n` points uniform in the unit d-ball: a normalized Gaussian direction scaled
/// by radius `U^(1/d)`.
pub fn sample_hypersphere<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<DataMatrix> {
    if d == 0 {
        return Err(DancoError::param("ball dimension must be at least 1"));
    }
    let mut values = vec![0.0; n * d];
    let inv_d = 1.0 / d as f64;
    for p in values.chunks_exact_mut(d) {
        let mut norm2: f64 = 0.0;
        while norm2 == 0.0 {
            for x in p.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            norm2 = p.iter().map(|x| x * x).sum();
        }
        let u: f64 = rng.sample(Open01);
        let scale = u.powf(inv_d) / norm2.sqrt();
        p.iter_mut().for_each(|x| *x *= scale);
    }
    DataMatrix::new(values, n, d)
}

/// Upper bound of the likelihood search for a reference sample of dimension `d`.
/// Depends on `d` alone so that entries do not change with the table size.
fn reference_ml_ceiling(d: usize) -> f64 {
    (2 * d + 10) as f64
}

/// Reference statistics for one dimension and one repetition.
pub fn reference_entry(d: usize, n: usize, k: usize, seed: u64, rep: usize) -> Result<CalibrationEntry> {
    let mut rng = substream(seed, stream_id(family::CALIBRATION, d as u64, rep as u64));
    let sample = sample_hypersphere(d, n, &mut rng)?;
    let stats = neighborhood_statistics(
        &sample,
        k,
        reference_ml_ceiling(d),
        &StatisticsOptions::default(),
    )?;
    Ok(CalibrationEntry {
        d,
        d_check_ml: stats.norm.d_ml,
        mu_nu: stats.angles.mu_nu,
        mu_tau: stats.angles.mu_tau,
    })
}

/// Builds reference statistics for every d in 1..=max_dim, averaging `n_reps`
/// independent draws per dimension.
pub fn build_calibration(
    max_dim: usize,
    n: usize,
    k: usize,
    n_reps: usize,
    seed: u64,
) -> Result<CalibrationTable> {
    if max_dim == 0 {
        return Err(DancoError::param("max_dim must be at least 1"));
    }
    if n_reps == 0 {
        return Err(DancoError::param("n_reps must be at least 1"));
    }
    if k < 2 || k + 2 > n {
        return Err(DancoError::param(format!(
            "k must satisfy 2 <= k <= n-2 = {}, got {k}",
            n.saturating_sub(2)
        )));
    }
    let jobs = par::try_map_range(max_dim * n_reps, |job| {
        reference_entry(job / n_reps + 1, n, k, seed, job % n_reps)
    })?;
    let reps = n_reps as f64;
    let entries = jobs
        .chunks_exact(n_reps)
        .enumerate()
        .map(|(i, runs)| CalibrationEntry {
            d: i + 1,
            d_check_ml: runs.iter().map(|e| e.d_check_ml).sum::<f64>() / reps,
            mu_nu: runs.iter().map(|e| e.mu_nu).sum::<f64>() / reps,
            mu_tau: runs.iter().map(|e| e.mu_tau).sum::<f64>() / reps,
        })
        .collect();
    Ok(CalibrationTable {
        entries,
        n_points: n,
        k,
        n_reps,
        seed,
        format_version: FORMAT_VERSION,
    })
}

pub fn render_calibration(table: &CalibrationTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER_LINE}");
    let _ = writeln!(out, "format_version {}", table.format_version);
    let _ = writeln!(out, "generator {GENERATOR_NAME}");
    let _ = writeln!(out, "n_points {}", table.n_points);
    let _ = writeln!(out, "k {}", table.k);
    let _ = writeln!(out, "max_dim {}", table.max_dim());
    let _ = writeln!(out, "n_reps {}", table.n_reps);
    let _ = writeln!(out, "seed {}", table.seed);
    let _ = writeln!(out, "{COLUMNS_LINE}");
    for e in &table.entries {
        let _ = writeln!(out, "{} {:?} {:?} {:?}", e.d, e.d_check_ml, e.mu_nu, e.mu_tau);
    }
    let _ = writeln!(out, "{END_LINE}");
    out
}

pub fn save_calibration(table: &CalibrationTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_calibration(table)).map_err(|e| DancoError::io(path, e))
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibrationTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DancoError::io(path, e))?;
    parse_calibration(&text)
}

fn corrupt(line: usize, detail: impl std::fmt::Display) -> DancoError {
    DancoError::CorruptCalibration(format!("line {line}: {detail}"))
}

fn header_value<'a, I>(lines: &mut I, key: &str) -> Result<(usize, &'a str)>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (no, line) = lines
        .next()
        .ok_or_else(|| DancoError::CorruptCalibration(format!("truncated before `{key}`")))?;
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok((no, v.trim())),
        _ => Err(corrupt(no, format!("expected `{key} <value>`, found `{line}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(no: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| corrupt(no, format!("cannot parse {key} from `{v}`")))
}

pub fn parse_calibration(text: &str) -> Result<CalibrationTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, HEADER_LINE)) => {}
        Some((no, other)) => return Err(corrupt(no, format!("unexpected header `{other}`"))),
        None => return Err(DancoError::CorruptCalibration("empty file".into())),
    }
    let (no, v) = header_value(&mut lines, "format_version")?;
    let version: u32 = parse_num(no, "format_version", v)?;
    if version != FORMAT_VERSION {
        return Err(DancoError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let (no, generator) = header_value(&mut lines, "generator")?;
    if generator != GENERATOR_NAME {
        return Err(corrupt(no, format!("unknown generator `{generator}`")));
    }
    let (no, v) = header_value(&mut lines, "n_points")?;
    let n_points = parse_num(no, "n_points", v)?;
    let (no, v) = header_value(&mut lines, "k")?;
    let k = parse_num(no, "k", v)?;
    let (no, v) = header_value(&mut lines, "max_dim")?;
    let max_dim: usize = parse_num(no, "max_dim", v)?;
    let (no, v) = header_value(&mut lines, "n_reps")?;
    let n_reps = parse_num(no, "n_reps", v)?;
    let (no, v) = header_value(&mut lines, "seed")?;
    let seed = parse_num(no, "seed", v)?;
    match lines.next() {
        Some((_, COLUMNS_LINE)) => {}
        Some((no, other)) => return Err(corrupt(no, format!("unexpected line `{other}`"))),
        None => return Err(DancoError::CorruptCalibration("truncated before records".into())),
    }

    let mut entries = Vec::with_capacity(max_dim);
    let mut terminated = false;
    for (no, line) in lines.by_ref() {
        if line == END_LINE {
            terminated = true;
            break;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(corrupt(no, format!("expected 4 fields, found {}", fields.len())));
        }
        entries.push(CalibrationEntry {
            d: parse_num(no, "d", fields[0])?,
            d_check_ml: parse_num(no, "d_check_ml", fields[1])?,
            mu_nu: parse_num(no, "mu_nu", fields[2])?,
            mu_tau: parse_num(no, "mu_tau", fields[3])?,
        });
    }
    if !terminated {
        return Err(DancoError::CorruptCalibration(
            "truncated: missing `end` marker".into(),
        ));
    }
    if let Some((no, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(corrupt(no, format!("trailing content `{line}`")));
    }
    let table = CalibrationTable {
        entries,
        n_points,
        k,
        n_reps,
        seed,
        format_version: version,
    };
    if table.entries.len() != max_dim {
        return Err(DancoError::CalibrationInvariant(format!(
            "header declares max_dim {max_dim} but {} records are present",
            table.entries.len()
        )));
    }
    table.validate()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_table() -> CalibrationTable {
        CalibrationTable {
            entries: (1..=4)
                .map(|d| CalibrationEntry {
                    d,
                    d_check_ml: d as f64 * 0.93 + 1.0 / 3.0,
                    mu_nu: std::f64::consts::FRAC_PI_2 - 1e-3 / d as f64,
                    mu_tau: d as f64 * 0.97 + 1.0 / 7.0,
                })
                .collect(),
            n_points: 100,
            k: 10,
            n_reps: 1,
            seed: 42,
            format_version: FORMAT_VERSION,
        }
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = substream(3, 0);
        let m = sample_hypersphere(7, 500, &mut rng).unwrap();
        assert!(m.rows().all(|r| r.iter().map(|x| x * x).sum::<f64>() <= 1.0));
    }

    #[test]
    fn text_round_trip() {
        let t = toy_table();
        let back = parse_calibration(&render_calibration(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn version_mismatch() {
        let text = render_calibration(&toy_table()).replace("format_version 1", "format_version 9");
        assert!(matches!(
            parse_calibration(&text),
            Err(DancoError::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn truncated_is_corrupt() {
        let text = render_calibration(&toy_table());
        for cut in [text.len() / 3, text.len() - 10, text.len() - 5] {
            assert!(matches!(
                parse_calibration(&text[..cut]),
                Err(DancoError::CorruptCalibration(_))
            ));
        }
    }

    #[test]
    fn gap_is_invariant_error() {
        let mut t = toy_table();
        t.entries.remove(2);
        let text = render_calibration(&t).replace("max_dim 3", "max_dim 4");
        assert!(matches!(
            parse_calibration(&text),
            Err(DancoError::CalibrationInvariant(_))
        ));
        assert!(matches!(t.validate(), Err(DancoError::CalibrationInvariant(_))));
    }

    #[test]
    fn compatibility() {
        let t = toy_table();
        assert!(t.check_compatible(100, 10, 4).is_ok());
        assert!(matches!(
            t.check_compatible(101, 10, 4),
            Err(DancoError::CalibrationMismatch(_))
        ));
        assert!(t.check_compatible(100, 5, 4).is_err());
        assert!(t.check_compatible(100, 10, 5).is_err());
    }
}
