//! Exact dense reference implementations built on a symmetric
//! eigendecomposition: Laplacian pseudoinverse, pseudoinverse application,
//! and the exact generalized Euclidean distance.
//!
//! These routines densify the graph and cost `O(n^3)` time and `O(n^2)`
//! memory, so they refuse to run above a configurable node cap. They exist
//! as ground truth for the sparse solvers, and as the `baseline` method of
//! the solver front-end.

use faer::{Mat, Side};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::scalar::Scalar;

/// Default node cap for dense routines.
pub const DEFAULT_BASELINE_CAP: usize = 20_000;

/// Errors from the dense oracle.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The graph exceeds the dense cap; use a sparse method instead.
    #[error("graph has {n} nodes, above the dense baseline cap of {cap}")]
    AboveCap { n: usize, cap: usize },
    /// The backend eigensolver failed to converge.
    #[error("eigendecomposition failed: {0}")]
    EigenFailed(String),
    /// Dimension mismatch in an input vector.
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Scalars for which a dense symmetric eigendecomposition is available
/// (`f32` and `f64`).
pub trait EigScalar: Scalar + faer::traits::RealField {}
impl EigScalar for f32 {}
impl EigScalar for f64 {}

/// Symmetric eigendecomposition of the dense Laplacian of `g`.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored
/// column-major, aligned with the eigenvalue order.
fn laplacian_eigen<T: EigScalar>(g: &Graph<T>) -> Result<(Vec<T>, Mat<T>), OracleError> {
    let n = g.n();
    let mut l = Mat::<T>::zeros(n, n);
    for (u, v, w) in g.edges() {
        l[(u, u)] += w;
        l[(v, v)] += w;
        l[(u, v)] -= w;
        l[(v, u)] -= w;
    }
    let evd = l
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| OracleError::EigenFailed(format!("{e:?}")))?;
    let evals: Vec<T> = (0..n).map(|i| evd.S()[i]).collect();
    Ok((evals, evd.U().to_owned()))
}

/// Spectral cutoff below which eigenvalues are treated as the kernel of the
/// Laplacian: `n * machine_epsilon * lambda_max`.
fn kernel_cutoff<T: Scalar>(n: usize, evals: &[T]) -> T {
    let lambda_max = evals.iter().fold(T::zero(), |a, &b| a.max(b));
    T::from_f64_lossy(n as f64) * T::epsilon() * lambda_max
}

fn check_cap(n: usize, cap: usize) -> Result<(), OracleError> {
    if n > cap {
        Err(OracleError::AboveCap { n, cap })
    } else {
        Ok(())
    }
}

/// Dense symmetric matrix in row-major order. Only what the oracle needs.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    /// Matrix dimension (the matrix is square).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Dense matrix-vector product.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// Moore-Penrose pseudoinverse of the graph Laplacian as a dense matrix,
/// using [`DEFAULT_BASELINE_CAP`].
pub fn pinv_laplacian<T: EigScalar>(g: &Graph<T>) -> Result<DenseMatrix<T>, OracleError> {
    pinv_laplacian_with_cap(g, DEFAULT_BASELINE_CAP)
}

/// [`pinv_laplacian`] with an explicit node cap.
pub fn pinv_laplacian_with_cap<T: EigScalar>(
    g: &Graph<T>,
    cap: usize,
) -> Result<DenseMatrix<T>, OracleError> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    let (evals, u) = laplacian_eigen(g)?;
    let cutoff = kernel_cutoff(n, &evals);
    let mut p = DenseMatrix::zeros(n);
    for k in 0..n {
        if evals[k] <= cutoff {
            continue;
        }
        let inv = T::one() / evals[k];
        for i in 0..n {
            let scaled = inv * u[(i, k)];
            let row = &mut p.data[i * n..(i + 1) * n];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot += scaled * u[(j, k)];
            }
        }
    }
    Ok(p)
}

/// Applies the Laplacian pseudoinverse to `y` without materializing the
/// dense pseudoinverse: `x = U diag(1/lambda) U^T y` over the non-kernel
/// spectrum. Costs one eigendecomposition.
pub fn pinv_apply<T: EigScalar>(g: &Graph<T>, y: &[T], cap: usize) -> Result<Vec<T>, OracleError> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    if y.len() != n {
        return Err(GraphError::LengthMismatch {
            expected: n,
            got: y.len(),
        }
        .into());
    }
    let (evals, u) = laplacian_eigen(g)?;
    let cutoff = kernel_cutoff(n, &evals);
    let mut x = vec![T::zero(); n];
    for k in 0..n {
        if evals[k] <= cutoff {
            continue;
        }
        let mut proj = T::zero();
        for i in 0..n {
            proj += u[(i, k)] * y[i];
        }
        let coeff = proj / evals[k];
        for (i, slot) in x.iter_mut().enumerate() {
            *slot += coeff * u[(i, k)];
        }
    }
    Ok(x)
}

/// Exact generalized Euclidean distance between node vectors `a` and `b`:
/// `sqrt((a - b)^T pinv(L) (a - b))`, computed through the
/// eigendecomposition. Ground truth for the sparse solvers; subject to
/// [`DEFAULT_BASELINE_CAP`].
pub fn ge_distance_exact<T: EigScalar>(g: &Graph<T>, a: &[T], b: &[T]) -> Result<T, OracleError> {
    check_cap(g.n(), DEFAULT_BASELINE_CAP)?;
    let n = g.n();
    if a.len() != n || b.len() != n {
        return Err(GraphError::LengthMismatch {
            expected: n,
            got: if a.len() != n { a.len() } else { b.len() },
        }
        .into());
    }
    let y: Vec<T> = a.iter().zip(b).map(|(&x, &z)| x - z).collect();
    if y.iter().all(|v| v.is_zero()) {
        return Ok(T::zero());
    }
    let (evals, u) = laplacian_eigen(g)?;
    let cutoff = kernel_cutoff(n, &evals);
    let mut quad = T::zero();
    for k in 0..n {
        if evals[k] <= cutoff {
            continue;
        }
        let mut proj = T::zero();
        for i in 0..n {
            proj += u[(i, k)] * y[i];
        }
        quad += proj * proj / evals[k];
    }
    Ok(clamp_quad_to_zero(quad, &y))
}

/// Clamps a slightly negative quadratic form to zero. Values below
/// `-1e-12 * ||y||^2` indicate a real problem and are logged before
/// clamping.
pub(crate) fn clamp_quad_to_zero<T: Scalar>(quad: T, y: &[T]) -> T {
    if quad >= T::zero() {
        return quad.sqrt();
    }
    let norm2: T = y.iter().map(|&v| v * v).sum();
    if quad < -T::from_f64_lossy(1e-12) * norm2 {
        log::warn!(
            "quadratic form {} is negative beyond round-off for ||y||^2 = {}; clamping to zero",
            quad,
            norm2
        );
    }
    T::zero()
}
