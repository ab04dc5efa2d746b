//! Undirected weighted graphs in compressed sparse row (CSR) form, plus the
//! Laplacian operator `L = D - A` applied matrix-free.

use thiserror::Error;

use crate::scalar::Scalar;

/// Errors produced while building or querying a graph.
#[derive(Debug, Error)]
pub enum GraphError {
    /// A graph must contain at least one node.
    #[error("graph must have at least one node")]
    Empty,
    /// An edge referenced a node outside `0..n`.
    #[error("edge ({u}, {v}) out of range for {n} nodes")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },
    /// Edge weights must be strictly positive and finite.
    #[error("edge ({u}, {v}) has invalid weight {w}; weights must be positive and finite")]
    InvalidWeight { u: usize, v: usize, w: f64 },
    /// A node vector did not match the node count.
    #[error("vector length {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    /// A node index passed to a query was out of range.
    #[error("node index {v} out of range for {n} nodes")]
    NodeOutOfRange { v: usize, n: usize },
}

/// Immutable undirected weighted graph in CSR form.
///
/// Invariants maintained by [`Graph::build`]:
/// * adjacency is symmetric (each undirected edge stored in both rows),
/// * each row lists neighbors in strictly increasing order with no
///   duplicates and no self-loops,
/// * all weights are positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<T>,
    m: usize,
}

impl<T: Scalar> Graph<T> {
    /// Builds a graph with `n` nodes from an edge list.
    ///
    /// Parallel edges are merged by summing their weights, self-loops are
    /// dropped, and the input order of the list is irrelevant: any
    /// permutation of the same multiset of edges produces an identical
    /// graph.
    pub fn build(n: usize, edges: &[(usize, usize, T)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut degree = vec![0usize; n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EdgeOutOfRange { u, v, n });
            }
            // NaN weights fail the finiteness test, so `<=` is safe here.
            if w <= T::zero() || !w.is_finite() {
                return Err(GraphError::InvalidWeight {
                    u,
                    v,
                    w: w.to_f64_lossy(),
                });
            }
            if u == v {
                continue;
            }
            degree[u] += 1;
            degree[v] += 1;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for u in 0..n {
            offsets.push(offsets[u] + degree[u]);
        }
        let total = offsets[n];
        let mut entries = vec![(0usize, T::zero()); total];
        let mut cursor = offsets.clone();
        for &(u, v, w) in edges {
            if u == v {
                continue;
            }
            entries[cursor[u]] = (v, w);
            cursor[u] += 1;
            entries[cursor[v]] = (u, w);
            cursor[v] += 1;
        }

        // Sort each row and merge duplicate neighbors by summing weights.
        let mut neighbors = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut merged_offsets = Vec::with_capacity(n + 1);
        merged_offsets.push(0);
        for u in 0..n {
            let row = &mut entries[offsets[u]..offsets[u + 1]];
            row.sort_unstable_by_key(|&(v, _)| v);
            let mut i = 0;
            while i < row.len() {
                let v = row[i].0;
                let mut w = row[i].1;
                i += 1;
                while i < row.len() && row[i].0 == v {
                    w += row[i].1;
                    i += 1;
                }
                neighbors.push(v);
                weights.push(w);
            }
            merged_offsets.push(neighbors.len());
        }

        let m = neighbors.len() / 2;
        Ok(Graph {
            n,
            offsets: merged_offsets,
            neighbors,
            weights,
            m,
        })
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges after merging.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Neighbors of `u`, in strictly increasing order.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Weights aligned with [`Graph::neighbors`].
    pub fn weights_of(&self, u: usize) -> &[T] {
        &self.weights[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Iterates every undirected edge once, as `(u, v, w)` with `u < v`,
    /// ordered lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.weights_of(u))
                .filter(move |&(&v, _)| v > u)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Weighted degree (row sum of the adjacency matrix) of every node.
    pub fn weighted_degrees(&self) -> Vec<T> {
        (0..self.n)
            .map(|u| self.weights_of(u).iter().copied().sum())
            .collect()
    }

    /// Applies the Laplacian: `y = L x` with `L = D - A`.
    pub fn laplacian_apply(&self, x: &[T]) -> Result<Vec<T>, GraphError> {
        if x.len() != self.n {
            return Err(GraphError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut y = vec![T::zero(); self.n];
        self.laplacian_apply_into(x, &mut y);
        Ok(y)
    }

    /// In-place variant of [`Graph::laplacian_apply`] for solver hot loops.
    /// Lengths must already match the node count.
    pub fn laplacian_apply_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for u in 0..self.n {
            let xu = x[u];
            let mut acc = T::zero();
            for (&v, &w) in self.neighbors(u).iter().zip(self.weights_of(u)) {
                acc += w * (xu - x[v]);
            }
            y[u] = acc;
        }
    }

    /// Labels connected components by breadth-first search.
    pub fn connected_components(&self) -> ComponentLabeling {
        let mut labels = vec![usize::MAX; self.n];
        let mut sizes = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            if labels[start] != usize::MAX {
                continue;
            }
            let comp = sizes.len();
            let mut size = 0usize;
            labels[start] = comp;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                size += 1;
                for &v in self.neighbors(u) {
                    if labels[v] == usize::MAX {
                        labels[v] = comp;
                        queue.push_back(v);
                    }
                }
            }
            sizes.push(size);
        }
        ComponentLabeling {
            count: sizes.len(),
            labels,
            sizes,
        }
    }

    /// Checks the CSR invariants. Intended for tests and debugging; all
    /// graphs produced by [`Graph::build`] satisfy them by construction.
    pub fn is_well_formed(&self) -> bool {
        if self.n == 0 || self.offsets.len() != self.n + 1 || self.offsets[0] != 0 {
            return false;
        }
        if *self.offsets.last().unwrap() != self.neighbors.len()
            || self.neighbors.len() != self.weights.len()
            || self.neighbors.len() != 2 * self.m
        {
            return false;
        }
        for u in 0..self.n {
            let nbrs = self.neighbors(u);
            for (i, (&v, &w)) in nbrs.iter().zip(self.weights_of(u)).enumerate() {
                if v >= self.n || v == u || w <= T::zero() || !w.is_finite() {
                    return false;
                }
                if i > 0 && nbrs[i - 1] >= v {
                    return false;
                }
                // Symmetry: the mirrored entry must exist with equal weight.
                match self.neighbors(v).binary_search(&u) {
                    Ok(j) => {
                        if self.weights_of(v)[j] != w {
                            return false;
                        }
                    }
                    Err(_) => return false,
                }
            }
        }
        true
    }
}

/// Partition of the nodes into connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    /// Component index per node; components are numbered by the smallest
    /// node they contain, in increasing order.
    pub labels: Vec<usize>,
    /// Number of components.
    pub count: usize,
    /// Node count per component.
    pub sizes: Vec<usize>,
}
