use crate::error::{DancoError, Result};

/// N points in D ambient dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_points: usize,
    ambient_dim: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major values. Every entry must be finite. Neighborhood
    /// statistics additionally need at least three rows; that is checked where the
    /// neighborhood size is validated.
    pub fn new(values: Vec<f64>, n_points: usize, ambient_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(DancoError::Data("ambient dimension must be at least 1".into()));
        }
        if values.len() != n_points * ambient_dim {
            return Err(DancoError::Data(format!(
                "expected {} values for {n_points}x{ambient_dim}, got {}",
                n_points * ambient_dim,
                values.len()
            )));
        }
        if n_points == 0 {
            return Err(DancoError::Data("matrix has no rows".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DancoError::Data(format!(
                "non-finite value at row {}, column {}",
                pos / ambient_dim,
                pos % ambient_dim
            )));
        }
        Ok(DataMatrix {
            values,
            n_points,
            ambient_dim,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(DancoError::Data(format!(
                "row {i} has {} columns, expected {dim}",
                rows[i].len()
            )));
        }
        Self::new(rows.concat(), rows.len(), dim)
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.ambient_dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Applies `f` to every row, producing a matrix of the same shape.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut out = vec![0.0; self.values.len()];
        for (src, dst) in self.rows().zip(out.chunks_exact_mut(self.ambient_dim)) {
            f(src, dst);
        }
        Self::new(out, self.n_points, self.ambient_dim)
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
