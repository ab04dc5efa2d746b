//! Distance-layer front-ends: generalized Euclidean distance between node
//! vectors, effective resistance between node pairs, and a two-group
//! polarization score — each computed through any of the Laplacian solve
//! methods.

use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::oracle::{clamp_quad_to_zero, EigScalar};
use crate::solve::{project_zero_mean, solve_lap, Method, SolveError, SolveReport, SolverConfig};

/// Errors from the metrics layer.
#[derive(Debug, Error)]
pub enum MetricsError {
    /// Effective resistance across components is infinite.
    #[error("nodes {u} and {v} are in different connected components; effective resistance is infinite")]
    InfiniteResistance { u: usize, v: usize },
    /// Polarization needs two non-empty groups.
    #[error("polarization needs two non-empty groups, found {found}")]
    NeedTwoGroups { found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Assignment of nodes to at most two groups; `None` marks unlabeled nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLabeling {
    /// Group index (0 or 1) per node, `None` if the node is unlabeled.
    pub class_of: Vec<Option<usize>>,
    /// Group names in discovery order.
    pub names: Vec<String>,
}

impl GroupLabeling {
    /// Node counts of groups 0 and 1.
    pub fn sizes(&self) -> [usize; 2] {
        let mut sizes = [0usize; 2];
        for c in self.class_of.iter().flatten() {
            sizes[*c] += 1;
        }
        sizes
    }
}

/// Generalized Euclidean distance between node vectors `a` and `b`:
/// `sqrt((a - b)^T pinv(L) (a - b))`, evaluated as `y^T x` where
/// `x` solves `L x = P y` for `y = a - b`.
///
/// Returns the distance together with the underlying solve report (check
/// `report.converged` when using an iterative method).
pub fn ge_distance<T: EigScalar>(
    g: &Graph<T>,
    a: &[T],
    b: &[T],
    method: Method,
    cfg: &SolverConfig<T>,
) -> Result<(T, SolveReport<T>), MetricsError> {
    if a.len() != g.n() || b.len() != g.n() {
        return Err(GraphError::LengthMismatch {
            expected: g.n(),
            got: if a.len() != g.n() { a.len() } else { b.len() },
        }
        .into());
    }
    let y: Vec<T> = a.iter().zip(b).map(|(&x, &z)| x - z).collect();
    let report = solve_lap(g, &y, method, cfg)?;
    // y^T x with the projected y: pinv(L) only sees the projected part, so
    // this equals (Py)^T pinv(L) (Py) up to the solver tolerance.
    let py = project_zero_mean(&y, &g.connected_components());
    let quad: T = py.iter().zip(&report.x).map(|(&u, &v)| u * v).sum();
    Ok((clamp_quad_to_zero(quad, &py), report))
}

/// Effective resistance between nodes `u` and `v`: the squared generalized
/// Euclidean distance between their indicator vectors. Zero when `u == v`;
/// an error when the nodes are in different components (the resistance is
/// infinite).
pub fn effective_resistance<T: EigScalar>(
    g: &Graph<T>,
    u: usize,
    v: usize,
    method: Method,
    cfg: &SolverConfig<T>,
) -> Result<(T, SolveReport<T>), MetricsError> {
    let n = g.n();
    for node in [u, v] {
        if node >= n {
            return Err(GraphError::NodeOutOfRange { v: node, n }.into());
        }
    }
    if u == v {
        return Ok((
            T::zero(),
            SolveReport {
                x: vec![T::zero(); n],
                iterations: 0,
                residual: T::zero(),
                wall_time: 0.0,
                method,
                converged: true,
            },
        ));
    }
    let comps = g.connected_components();
    if comps.labels[u] != comps.labels[v] {
        return Err(MetricsError::InfiniteResistance { u, v });
    }
    let mut y = vec![T::zero(); n];
    y[u] = T::one();
    y[v] = -T::one();
    let report = solve_lap(g, &y, method, cfg)?;
    let quad = report.x[u] - report.x[v];
    Ok((quad.max(T::zero()), report))
}

/// Polarization score of a two-group labeling: the generalized Euclidean
/// distance between the group indicator vectors. With `normalize` set, each
/// indicator is scaled by its group size, which makes scores comparable
/// across graphs with different group sizes.
pub fn polarization_score<T: EigScalar>(
    g: &Graph<T>,
    groups: &GroupLabeling,
    method: Method,
    cfg: &SolverConfig<T>,
    normalize: bool,
) -> Result<(T, SolveReport<T>), MetricsError> {
    let n = g.n();
    if groups.class_of.len() != n {
        return Err(GraphError::LengthMismatch {
            expected: n,
            got: groups.class_of.len(),
        }
        .into());
    }
    let sizes = groups.sizes();
    let found = sizes.iter().filter(|&&s| s > 0).count();
    if found < 2 {
        return Err(MetricsError::NeedTwoGroups { found });
    }
    let mut a = vec![T::zero(); n];
    let mut b = vec![T::zero(); n];
    let weight = |size: usize| {
        if normalize {
            T::one() / T::from_f64_lossy(size as f64)
        } else {
            T::one()
        }
    };
    for (node, c) in groups.class_of.iter().enumerate() {
        match c {
            Some(0) => a[node] = weight(sizes[0]),
            Some(1) => b[node] = weight(sizes[1]),
            _ => {}
        }
    }
    ge_distance(g, &a, &b, method, cfg)
}
