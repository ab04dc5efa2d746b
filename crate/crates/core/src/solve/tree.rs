//! Spanning trees and the exact linear-time Laplacian solve on trees.
//!
//! The tree solver is the workhorse behind the augmented-tree
//! preconditioner: for a tree `T` the system `L_T x = b` (with `b` zero-sum
//! per component) is solved exactly by two sweeps — accumulate subtree sums
//! of `b` leaf-to-root, then walk root-to-leaf setting
//! `x_child = x_parent + subtree_sum(child) / w(child, parent)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::{ComponentLabeling, Graph, GraphError};
use crate::scalar::Scalar;

use super::{check_finite, project_zero_mean_in_place, SolveError};

/// Rooted spanning forest of a graph (one tree per connected component).
#[derive(Debug, Clone)]
pub struct SpanningTree<T> {
    /// Parent of each node; roots point to themselves.
    pub parent: Vec<usize>,
    /// Weight of the edge to the parent (unused entry at roots).
    pub parent_weight: Vec<T>,
    /// Node order in which parents always precede their children.
    pub order: Vec<usize>,
    /// One root per component, in component order.
    pub roots: Vec<usize>,
    /// Component labeling of the underlying graph.
    pub comps: ComponentLabeling,
}

impl<T: Scalar> SpanningTree<T> {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Whether `{u, v}` is one of the tree edges.
    pub fn is_tree_edge(&self, u: usize, v: usize) -> bool {
        (self.parent[u] == v && u != v) || (self.parent[v] == u && v != u)
    }

    /// Stored scalar entries (for memory audits).
    pub fn storage_entries(&self) -> usize {
        4 * self.parent.len() + self.roots.len()
    }
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so the std max-heap pops the smallest distance; ties
        // break toward the smaller node id for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Builds a shortest-path spanning tree under edge lengths `1 / w`, rooted
/// per component at the node of maximum weighted degree (ties to the
/// smallest id). Heavy edges thus tend to become tree edges, a cheap
/// deterministic stand-in for a low-stretch tree.
///
/// The construction is deterministic; `_seed` is accepted so randomized
/// tree heuristics can slot in behind the same signature.
pub fn build_spanning_tree<T: Scalar>(g: &Graph<T>, _seed: u64) -> SpanningTree<T> {
    let n = g.n();
    let comps = g.connected_components();
    let degrees = g.weighted_degrees();
    let mut roots = vec![usize::MAX; comps.count];
    for v in 0..n {
        let c = comps.labels[v];
        if roots[c] == usize::MAX || degrees[v] > degrees[roots[c]] {
            roots[c] = v;
        }
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut parent_weight = vec![T::one(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::with_capacity(n);
    for &r in &roots {
        dist[r] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: r });
    }
    while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        order.push(u);
        for (&v, &w) in g.neighbors(u).iter().zip(g.weights_of(u)) {
            if settled[v] {
                continue;
            }
            let nd = d + 1.0 / w.to_f64_lossy();
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u;
                parent_weight[v] = w;
                heap.push(HeapItem { dist: nd, node: v });
            }
        }
    }
    debug_assert_eq!(order.len(), n);

    SpanningTree {
        parent,
        parent_weight,
        order,
        roots,
        comps,
    }
}

/// Solves `L_T x = b` exactly on the spanning tree (forest). `b` must be
/// zero-sum on every component; the returned solution has zero mean per
/// component.
pub fn tree_solve<T: Scalar>(tree: &SpanningTree<T>, b: &[T]) -> Result<Vec<T>, SolveError> {
    let n = tree.n();
    if b.len() != n {
        return Err(GraphError::LengthMismatch {
            expected: n,
            got: b.len(),
        }
        .into());
    }
    check_finite(b)?;
    let mut sums = vec![T::zero(); tree.comps.count];
    let mut scales = vec![T::zero(); tree.comps.count];
    for (v, &c) in tree.comps.labels.iter().enumerate() {
        sums[c] += b[v];
        scales[c] += b[v].abs();
    }
    for (c, (&s, &scale)) in sums.iter().zip(&scales).enumerate() {
        if s.abs() > T::epsilon().sqrt() * scale.max(T::one()) {
            return Err(SolveError::NotZeroSum {
                comp: c,
                sum: s.to_f64_lossy(),
            });
        }
    }
    Ok(tree_solve_unchecked(tree, b))
}

/// [`tree_solve`] without the zero-sum validation, for solver-internal use
/// where the input is projected already.
pub(crate) fn tree_solve_unchecked<T: Scalar>(tree: &SpanningTree<T>, b: &[T]) -> Vec<T> {
    let n = tree.n();
    // Leaf-to-root: accumulate subtree sums of b.
    let mut acc = b.to_vec();
    for &v in tree.order.iter().rev() {
        let p = tree.parent[v];
        if p != v {
            let av = acc[v];
            acc[p] += av;
        }
    }
    // Root-to-leaf: the tree-edge flow from v to its parent equals the
    // subtree sum at v, so the potential drop is that flow over the weight.
    let mut x = vec![T::zero(); n];
    for &v in &tree.order {
        let p = tree.parent[v];
        if p != v {
            x[v] = x[p] + acc[v] / tree.parent_weight[v];
        }
    }
    project_zero_mean_in_place(&mut x, &tree.comps);
    x
}
