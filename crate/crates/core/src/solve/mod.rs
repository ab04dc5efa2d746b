//! Laplacian solvers: given a graph `G` and a zero-sum right-hand side `b`,
//! find `x` with `L x = b` (up to the solver tolerance), where `L` is the
//! graph Laplacian. `L` is singular — its kernel is spanned by the
//! indicator vectors of the connected components — so right-hand sides are
//! projected onto the complement of the kernel and solutions are returned
//! with zero mean per component.
//!
//! Methods:
//!
//! * `baseline` — dense eigendecomposition (exact, `O(n^3)`, capped),
//! * `cg` — conjugate gradients, matrix-free,
//! * `cg_jacobi` — CG with diagonal preconditioning,
//! * `aug_tree` — CG preconditioned by an augmented spanning tree, solved
//!   exactly through a low-rank (Woodbury) correction of the tree solve,
//! * `approx_chol` — CG preconditioned by a randomized approximate sparse
//!   Cholesky factorization.
//!
//! No method other than `baseline` ever allocates an `n x n` dense matrix.

mod approx_chol;
mod aug_tree;
mod cg;
mod tree;

pub use approx_chol::{approx_chol_factor, ApproxCholPrecond};
pub use aug_tree::{build_aug_tree_precond, default_aug_budget, AugTreePrecond};
pub use cg::cg_solve;
pub use tree::{build_spanning_tree, tree_solve, SpanningTree};

use std::time::Instant;

use thiserror::Error;

use crate::graph::{ComponentLabeling, Graph, GraphError};
use crate::oracle::{self, OracleError};
use crate::scalar::Scalar;

/// Errors from the solver layer.
#[derive(Debug, Error)]
pub enum SolveError {
    /// Input vector contained NaN or infinity.
    #[error("input vector contains non-finite values")]
    NonFinite,
    /// Right-hand side must sum to zero on every connected component.
    #[error("right-hand side is not zero-sum on component {comp} (sum = {sum:e})")]
    NotZeroSum { comp: usize, sum: f64 },
    /// Method name not recognized.
    #[error(
        "unknown method `{0}`; expected one of baseline, cg, cg_jacobi, aug_tree, approx_chol"
    )]
    UnknownMethod(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Solver selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Dense exact solve via eigendecomposition; refuses large graphs.
    Baseline,
    /// Plain conjugate gradients.
    Cg,
    /// CG with Jacobi (diagonal) preconditioning.
    CgJacobi,
    /// CG preconditioned by an augmented spanning tree.
    AugTree,
    /// CG preconditioned by approximate sparse Cholesky.
    ApproxChol,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Baseline,
        Method::Cg,
        Method::CgJacobi,
        Method::AugTree,
        Method::ApproxChol,
    ];

    /// The four sparse methods (everything but `baseline`).
    pub const SPARSE: [Method; 4] = [
        Method::Cg,
        Method::CgJacobi,
        Method::AugTree,
        Method::ApproxChol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Cg => "cg",
            Method::CgJacobi => "cg_jacobi",
            Method::AugTree => "aug_tree",
            Method::ApproxChol => "approx_chol",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "cg" => Ok(Method::Cg),
            "cg_jacobi" => Ok(Method::CgJacobi),
            "aug_tree" => Ok(Method::AugTree),
            "approx_chol" => Ok(Method::ApproxChol),
            other => Err(SolveError::UnknownMethod(other.to_string())),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Convergence threshold on the relative residual `||b - Lx|| / ||b||`.
    pub rel_tolerance: T,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iters: Option<usize>,
    /// Seed for randomized preconditioners (approximate Cholesky, off-tree
    /// edge sampling).
    pub seed: u64,
    /// Extra off-tree edge budget for `aug_tree`; `None` means
    /// [`default_aug_budget`].
    pub aug_budget: Option<usize>,
    /// Node cap for the dense baseline; `None` means
    /// [`oracle::DEFAULT_BASELINE_CAP`].
    pub baseline_cap: Option<usize>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            rel_tolerance: T::from_f64_lossy(1e-10),
            max_iters: None,
            seed: 0,
            aug_budget: None,
            baseline_cap: None,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub(crate) fn max_iters_for(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(10 * n).max(1)
    }

    pub(crate) fn cap(&self) -> usize {
        self.baseline_cap.unwrap_or(oracle::DEFAULT_BASELINE_CAP)
    }
}

/// Result of a Laplacian solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    /// Solution with zero mean on every connected component.
    pub x: Vec<T>,
    /// Iterations performed (0 for direct methods).
    pub iterations: usize,
    /// Final relative residual `||b - Lx|| / ||b||`, recomputed from
    /// scratch, never taken from solver recurrences.
    pub residual: T,
    /// Wall-clock seconds, including preconditioner construction.
    pub wall_time: f64,
    /// Method that produced the solution.
    pub method: Method,
    /// Whether `residual <= rel_tolerance` was reached.
    pub converged: bool,
}

/// A symmetric positive (semi)definite approximation `M ~ pinv(L)` applied
/// to residual vectors inside preconditioned CG.
pub trait Preconditioner<T: Scalar>: Send + Sync {
    /// Applies the preconditioner; the result is zero-sum per component
    /// up to round-off.
    fn apply(&self, r: &[T]) -> Vec<T>;

    /// Number of stored scalar entries, to audit memory against the
    /// "no dense n x n matrix" rule.
    fn storage_entries(&self) -> usize;
}

/// Removes the per-component mean: the projection of `y` onto the
/// orthogonal complement of the Laplacian kernel.
pub fn project_zero_mean<T: Scalar>(y: &[T], comps: &ComponentLabeling) -> Vec<T> {
    let mut out = y.to_vec();
    project_zero_mean_in_place(&mut out, comps);
    out
}

pub(crate) fn project_zero_mean_in_place<T: Scalar>(y: &mut [T], comps: &ComponentLabeling) {
    let mut sums = vec![T::zero(); comps.count];
    for (v, &c) in comps.labels.iter().enumerate() {
        sums[c] += y[v];
    }
    let means: Vec<T> = sums
        .iter()
        .zip(&comps.sizes)
        .map(|(&s, &n)| s / T::from_f64_lossy(n as f64))
        .collect();
    for (v, &c) in comps.labels.iter().enumerate() {
        y[v] -= means[c];
    }
}

/// Jacobi preconditioner: divide by the weighted degree, then project.
pub struct JacobiPrecond<T> {
    inv_degree: Vec<T>,
    comps: ComponentLabeling,
}

/// Builds the Jacobi (diagonal) preconditioner. Isolated nodes have zero
/// degree; their entries pass through unscaled (they are zeroed by the
/// projection anyway).
pub fn build_jacobi_precond<T: Scalar>(g: &Graph<T>) -> JacobiPrecond<T> {
    let inv_degree = g
        .weighted_degrees()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    JacobiPrecond {
        inv_degree,
        comps: g.connected_components(),
    }
}

impl<T: Scalar> Preconditioner<T> for JacobiPrecond<T> {
    fn apply(&self, r: &[T]) -> Vec<T> {
        let mut z: Vec<T> = r.iter().zip(&self.inv_degree).map(|(&a, &d)| a * d).collect();
        project_zero_mean_in_place(&mut z, &self.comps);
        z
    }

    fn storage_entries(&self) -> usize {
        self.inv_degree.len() + self.comps.labels.len()
    }
}

pub(crate) fn check_finite<T: Scalar>(y: &[T]) -> Result<(), SolveError> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolveError::NonFinite)
    }
}

pub(crate) fn norm2<T: Scalar>(y: &[T]) -> T {
    y.iter().map(|&v| v * v).sum::<T>().sqrt()
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Relative residual `||b - Lx|| / ||b||`, recomputed from scratch.
pub(crate) fn true_relative_residual<T: Scalar>(g: &Graph<T>, b: &[T], x: &[T]) -> T {
    let mut lx = vec![T::zero(); b.len()];
    g.laplacian_apply_into(x, &mut lx);
    let mut diff = T::zero();
    let mut bn = T::zero();
    for (bi, li) in b.iter().zip(&lx) {
        let d = *bi - *li;
        diff += d * d;
        bn += *bi * *bi;
    }
    if bn.is_zero() {
        T::zero()
    } else {
        (diff / bn).sqrt()
    }
}

/// Solves `L x = P y` with the chosen method, where `P` removes the
/// per-component mean. Accepts any finite `y`: the projection makes the
/// system consistent, and `pinv(L) y = pinv(L) P y`.
pub fn solve_lap<T: oracle::EigScalar>(
    g: &Graph<T>,
    y: &[T],
    method: Method,
    cfg: &SolverConfig<T>,
) -> Result<SolveReport<T>, SolveError> {
    if y.len() != g.n() {
        return Err(GraphError::LengthMismatch {
            expected: g.n(),
            got: y.len(),
        }
        .into());
    }
    check_finite(y)?;
    let start = Instant::now();
    let comps = g.connected_components();
    let b = project_zero_mean(y, &comps);

    if norm2(&b).is_zero() {
        // y was constant per component; the projected system is 0 = 0.
        return Ok(SolveReport {
            x: vec![T::zero(); g.n()],
            iterations: 0,
            residual: T::zero(),
            wall_time: start.elapsed().as_secs_f64(),
            method,
            converged: true,
        });
    }

    let mut report = match method {
        Method::Baseline => {
            let x = oracle::pinv_apply(g, &b, cfg.cap())?;
            let residual = true_relative_residual(g, &b, &x);
            SolveReport {
                converged: residual <= cfg.rel_tolerance,
                x,
                iterations: 0,
                residual,
                wall_time: 0.0,
                method,
            }
        }
        Method::Cg => cg_solve(g, &b, cfg, None)?,
        Method::CgJacobi => {
            let pre = build_jacobi_precond(g);
            cg_solve(g, &b, cfg, Some(&pre))?
        }
        Method::AugTree => {
            let tree = build_spanning_tree(g, cfg.seed);
            let budget = cfg.aug_budget.unwrap_or_else(|| default_aug_budget(g.n()));
            let pre = build_aug_tree_precond(g, &tree, budget, cfg.seed);
            cg_solve(g, &b, cfg, Some(&pre))?
        }
        Method::ApproxChol => {
            let pre = approx_chol_factor(g, cfg);
            cg_solve(g, &b, cfg, Some(&pre))?
        }
    };
    report.method = method;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_ba, gen_er, gen_sbm, gen_ws};
    use crate::oracle::pinv_apply;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!(
            "chol".parse::<Method>(),
            Err(SolveError::UnknownMethod(_))
        ));
    }

    #[test]
    fn projection_removes_per_component_means() {
        let g = Graph::<f64>::build(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        let comps = g.connected_components();
        let p: Vec<f64> = project_zero_mean(&[1.0, 2.0, 3.0, 10.0, 20.0], &comps);
        assert!((p[0] + p[1] + p[2]).abs() < 1e-12);
        assert!((p[3] + p[4]).abs() < 1e-12);
        assert!((p[0] - -1.0).abs() < 1e-12);
        assert!((p[3] - -5.0).abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let g: Graph<f64> = gen_er(40, 60, 3).unwrap();
        let comps = g.connected_components();
        let y = random_vec(40, 8);
        let p1 = project_zero_mean(&y, &comps);
        let p2 = project_zero_mean(&p1, &comps);
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_rhs_solves_to_zero_instantly() {
        let g: Graph<f64> = gen_er(30, 60, 1).unwrap();
        for m in Method::ALL {
            let r = solve_lap(&g, &vec![5.0; 30], m, &SolverConfig::default()).unwrap();
            assert!(r.converged);
            assert_eq!(r.iterations, 0);
            assert!(r.x.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn all_methods_agree_with_the_oracle() {
        let graphs: Vec<Graph<f64>> = vec![
            gen_er(60, 150, 2).unwrap(),
            gen_ba(60, 2, 3).unwrap(),
            gen_ws(60, 4, 0.2, 4).unwrap(),
            gen_sbm(60, 3, 0.3, 0.02, 5).unwrap().0,
        ];
        for (gi, g) in graphs.iter().enumerate() {
            let y = random_vec(g.n(), 100 + gi as u64);
            let comps = g.connected_components();
            let b = project_zero_mean(&y, &comps);
            let exact = pinv_apply(g, &b, usize::MAX).unwrap();
            for m in Method::ALL {
                let r = solve_lap(g, &y, m, &SolverConfig::default()).unwrap();
                assert!(r.converged, "{m} failed to converge on graph {gi}");
                assert!(r.residual <= 1e-10);
                for (a, e) in r.x.iter().zip(&exact) {
                    assert!(
                        (a - e).abs() < 1e-6,
                        "{m} disagrees with oracle on graph {gi}: {a} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn solutions_have_zero_mean_per_component() {
        let g: Graph<f64> = gen_sbm(50, 5, 0.6, 0.0, 7).unwrap().0;
        let comps = g.connected_components();
        assert!(comps.count >= 2, "test graph should be disconnected");
        let y = random_vec(50, 9);
        for m in Method::ALL {
            let r = solve_lap(&g, &y, m, &SolverConfig::default()).unwrap();
            let mut sums = vec![0.0; comps.count];
            for (v, &c) in comps.labels.iter().enumerate() {
                sums[c] += r.x[v];
            }
            for s in sums {
                assert!(s.abs() < 1e-8, "{m} broke the zero-mean invariant: {s}");
            }
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let g: Graph<f64> = gen_er(10, 20, 0).unwrap();
        let mut y = random_vec(10, 0);
        y[3] = f64::NAN;
        assert!(matches!(
            solve_lap(&g, &y, Method::Cg, &SolverConfig::default()),
            Err(SolveError::NonFinite)
        ));
    }

    #[test]
    fn baseline_refuses_above_cap() {
        let g: Graph<f64> = gen_er(50, 100, 1).unwrap();
        let cfg = SolverConfig {
            baseline_cap: Some(10),
            ..SolverConfig::default()
        };
        let err = solve_lap(&g, &random_vec(50, 2), Method::Baseline, &cfg).unwrap_err();
        assert!(err.to_string().contains("cap"));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let g: Graph<f64> = gen_ws(200, 4, 0.0, 0).unwrap(); // ring: slow for CG
        let cfg = SolverConfig {
            max_iters: Some(2),
            ..SolverConfig::default()
        };
        let r = solve_lap(&g, &random_vec(200, 3), Method::Cg, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.residual > 1e-10);
        assert!(r.iterations <= 2);
    }

    #[test]
    fn preconditioners_stay_sparse() {
        let g: Graph<f64> = gen_er(2000, 8000, 4).unwrap();
        let n = g.n();
        let budget = n * n / 4; // far below dense
        let jac = build_jacobi_precond(&g);
        assert!(Preconditioner::<f64>::storage_entries(&jac) < budget);
        let tree = build_spanning_tree(&g, 0);
        let aug = build_aug_tree_precond(&g, &tree, default_aug_budget(n), 0);
        assert!(aug.storage_entries() < budget);
        let chol = approx_chol_factor(&g, &SolverConfig::default());
        assert!(chol.storage_entries() < budget);
    }

    #[test]
    fn f32_solves_work() {
        let g: Graph<f32> = gen_er(40, 100, 6).unwrap();
        let y: Vec<f32> = random_vec(40, 11).iter().map(|&v| v as f32).collect();
        let cfg = SolverConfig::<f32> {
            rel_tolerance: 1e-5,
            ..SolverConfig::default()
        };
        for m in Method::ALL {
            let r = solve_lap(&g, &y, m, &cfg).unwrap();
            assert!(r.converged, "{m} failed in f32");
        }
    }
}
