use std::collections::BinaryHeap;

use crate::matrix::{squared_distance, DataMatrix};

use super::Candidate;

const LEAF_SIZE: usize = 12;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree over the rows of a [`DataMatrix`].
///
/// Search prunes a subtree only when its splitting plane is strictly farther than
/// the current worst candidate, so equidistant points are still visited and the
/// (distance, index) ordering matches the brute-force scan exactly.
pub(super) struct KdTree<'a> {
    data: &'a DataMatrix,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub(super) fn new(data: &'a DataMatrix) -> Self {
        let mut tree = KdTree {
            data,
            perm: (0..data.n_points()).collect(),
            nodes: Vec::new(),
        };
        let n = data.n_points();
        tree.build(0, n);
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.widest_dim(start, end);
        let mid = start + (end - start) / 2;
        let data = self.data;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            data.row(a)[dim].total_cmp(&data.row(b)[dim])
        });
        let value = data.row(self.perm[mid])[dim];
        // placeholder, patched once children exist
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    fn widest_dim(&self, start: usize, end: usize) -> usize {
        let d = self.data.ambient_dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &p in &self.perm[start..end] {
            for (c, &v) in self.data.row(p).iter().enumerate() {
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        (0..d)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0)
    }

    pub(super) fn knn(&self, query: usize, m: usize) -> Vec<Candidate> {
        let mut heap = BinaryHeap::with_capacity(m + 1);
        self.search(0, query, m, &mut heap);
        let mut out = heap.into_vec();
        out.sort_unstable_by(Candidate::cmp_key);
        out
    }

    fn search(&self, node: usize, query: usize, m: usize, heap: &mut BinaryHeap<Candidate>) {
        let q = self.data.row(query);
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &p in &self.perm[start..end] {
                    if p == query {
                        continue;
                    }
                    let cand = Candidate {
                        dist2: squared_distance(q, self.data.row(p)),
                        index: p,
                    };
                    if heap.len() < m {
                        heap.push(cand);
                    } else if let Some(worst) = heap.peek() {
                        if Candidate::cmp_key(&cand, worst).is_lt() {
                            heap.pop();
                            heap.push(cand);
                        }
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, m, heap);
                let plane = diff * diff;
                let visit_far = heap.len() < m || heap.peek().is_some_and(|w| plane <= w.dist2);
                if visit_far {
                    self.search(far, query, m, heap);
                }
            }
        }
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        Candidate::cmp_key(self, other).is_eq()
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        Candidate::cmp_key(self, other)
    }
}
