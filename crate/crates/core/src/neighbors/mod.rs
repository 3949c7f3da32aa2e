//! Exact k-nearest-neighbor search and the two per-point neighborhood statistics:
//! normalized nearest-neighbor distances and pairwise neighbor angles.

mod brute;
mod kdtree;

use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;
use crate::par;

/// Above this ambient dimension the kd-tree is skipped in favor of a linear scan.
pub const TREE_MAX_DIM: usize = 15;

/// Centered neighbor vectors shorter than this are excluded from angle statistics.
pub const DEFAULT_DEGENERATE_EPS: f64 = 1e-12;

/// Lower bound applied to a zero nearest-neighbor ratio (duplicate points), so
/// every reported ratio lies in (0, 1].
pub const RHO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub(crate) dist2: f64,
    pub(crate) index: usize,
}

/// Which exact search path to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// kd-tree up to [`TREE_MAX_DIM`] ambient dimensions, linear scan above.
    #[default]
    Auto,
    KdTree,
    BruteForce,
}

/// The k+1 nearest neighbors of every point, ascending by distance, ties broken by
/// ascending point index. A point never appears in its own row.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodIndex {
    k: usize,
    width: usize,
    ids: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborhoodIndex {
    /// Neighborhood size `k`. Each row holds `k + 1` neighbors.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.ids.len() / self.width
    }

    pub fn neighbor_ids(&self, point: usize) -> &[usize] {
        &self.ids[point * self.width..(point + 1) * self.width]
    }

    pub fn distances(&self, point: usize) -> &[f64] {
        &self.distances[point * self.width..(point + 1) * self.width]
    }
}

/// Builds the exact (k+1)-NN index of `data`.
pub fn build_index(data: &DataMatrix, k: usize) -> Result<NeighborhoodIndex> {
    build_index_with(data, k, SearchStrategy::Auto)
}

pub fn build_index_with(
    data: &DataMatrix,
    k: usize,
    strategy: SearchStrategy,
) -> Result<NeighborhoodIndex> {
    let n = data.n_points();
    if k == 0 || k + 2 > n {
        return Err(DancoError::param(format!(
            "neighborhood size k must satisfy 1 <= k <= N-2 = {}, got {k}",
            n.saturating_sub(2)
        )));
    }
    let width = k + 1;
    let use_tree = match strategy {
        SearchStrategy::Auto => data.ambient_dim() <= TREE_MAX_DIM,
        SearchStrategy::KdTree => true,
        SearchStrategy::BruteForce => false,
    };
    let rows: Vec<Vec<Candidate>> = if use_tree {
        let tree = kdtree::KdTree::new(data);
        par::map_range(n, |i| tree.knn(i, width))
    } else {
        par::map_range(n, |i| brute::knn(data, i, width))
    };

    let mut ids = Vec::with_capacity(n * width);
    let mut distances = Vec::with_capacity(n * width);
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), width);
        if row[width - 1].dist2 <= 0.0 {
            return Err(DancoError::DegenerateGeometry {
                index: i,
                detail: format!("all {width} nearest neighbors coincide with the point"),
            });
        }
        ids.extend(row.iter().map(|c| c.index));
        distances.extend(row.iter().map(|c| c.dist2.sqrt()));
    }
    Ok(NeighborhoodIndex {
        k,
        width,
        ids,
        distances,
    })
}

/// Per point, the nearest-neighbor distance divided by the distance to the
/// (k+1)-th neighbor. Values lie in (0, 1]; zero ratios from duplicate points are
/// raised to [`RHO_FLOOR`].
pub fn rho_statistics(index: &NeighborhoodIndex) -> Result<Vec<f64>> {
    (0..index.n_points())
        .map(|i| {
            let d = index.distances(i);
            let far = d[d.len() - 1];
            if far <= 0.0 {
                return Err(DancoError::DegenerateGeometry {
                    index: i,
                    detail: "farthest neighbor distance is zero".into(),
                });
            }
            Ok((d[0] / far).max(RHO_FLOOR))
        })
        .collect()
}

/// Number of points whose nearest neighbor is a duplicate of the point itself.
pub fn duplicate_nearest_count(index: &NeighborhoodIndex) -> usize {
    (0..index.n_points())
        .filter(|&i| index.distances(i)[0] == 0.0)
        .count()
}

/// Angles between all pairs of centered neighbor vectors of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointAngles {
    /// Angles in [0, pi], lexicographic in the (z, j) neighbor pair, z < j.
    pub angles: Vec<f64>,
    /// Pairs skipped because one of the centered vectors was shorter than epsilon.
    pub excluded_pairs: usize,
}

/// Pairwise angles among the `k` nearest neighbors of `point`, after translating
/// the point to the origin.
pub fn pairwise_angles(
    data: &DataMatrix,
    index: &NeighborhoodIndex,
    point: usize,
    eps: f64,
) -> Result<PointAngles> {
    if point >= data.n_points() || point >= index.n_points() {
        return Err(DancoError::param(format!("point index {point} out of range")));
    }
    let k = index.k();
    let origin = data.row(point);
    let dim = data.ambient_dim();

    let mut vectors: Vec<f64> = Vec::with_capacity(k * dim);
    let mut norms: Vec<f64> = Vec::with_capacity(k);
    for &j in &index.neighbor_ids(point)[..k] {
        let start = vectors.len();
        vectors.extend(data.row(j).iter().zip(origin).map(|(a, b)| a - b));
        let norm = vectors[start..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < eps {
            vectors.truncate(start);
        } else {
            norms.push(norm);
        }
    }
    let usable = norms.len();
    if usable < 2 {
        return Err(DancoError::DegenerateGeometry {
            index: point,
            detail: format!("only {usable} neighbor vectors longer than {eps:e}"),
        });
    }

    let mut angles = Vec::with_capacity(usable * (usable - 1) / 2);
    for z in 0..usable {
        let vz = &vectors[z * dim..(z + 1) * dim];
        for j in (z + 1)..usable {
            let vj = &vectors[j * dim..(j + 1) * dim];
            let dot: f64 = vz.iter().zip(vj).map(|(a, b)| a * b).sum();
            let cos = (dot / (norms[z] * norms[j])).clamp(-1.0, 1.0);
            angles.push(cos.acos());
        }
    }
    Ok(PointAngles {
        angles,
        excluded_pairs: k * (k - 1) / 2 - usable * (usable - 1) / 2,
    })
}
