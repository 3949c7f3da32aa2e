use std::cmp::Ordering;

use crate::matrix::{squared_distance, DataMatrix};

use super::Candidate;

/// The `m` nearest neighbors of `query` (a row of `data`, excluded), ordered by
/// (squared distance, index).
pub(super) fn knn(data: &DataMatrix, query: usize, m: usize) -> Vec<Candidate> {
    let q = data.row(query);
    let mut all: Vec<Candidate> = data
        .rows()
        .enumerate()
        .filter(|&(j, _)| j != query)
        .map(|(j, row)| Candidate {
            dist2: squared_distance(q, row),
            index: j,
        })
        .collect();
    if m < all.len() {
        all.select_nth_unstable_by(m - 1, Candidate::cmp_key);
        all.truncate(m);
    }
    all.sort_unstable_by(Candidate::cmp_key);
    all
}

impl Candidate {
    #[inline]
    pub(super) fn cmp_key(a: &Candidate, b: &Candidate) -> Ordering {
        a.dist2
            .total_cmp(&b.dist2)
            .then_with(|| a.index.cmp(&b.index))
    }
}
