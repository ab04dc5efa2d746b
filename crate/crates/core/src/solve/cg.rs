//! Preconditioned conjugate gradients on the (singular, consistent)
//! Laplacian system.
//!
//! The Laplacian is positive semidefinite with kernel spanned by the
//! component indicators. CG is well defined on the orthogonal complement of
//! the kernel as long as the right-hand side is zero-sum per component and
//! every preconditioned residual is projected back onto that complement,
//! which is what this implementation does.

use std::time::Instant;

use crate::graph::{Graph, GraphError};
use crate::scalar::Scalar;

use super::{
    check_finite, dot, norm2, project_zero_mean_in_place, true_relative_residual, Method,
    Preconditioner, SolveError, SolveReport, SolverConfig,
};

/// Runs (preconditioned) conjugate gradients for `L x = b` from `x = 0`.
///
/// `b` must be zero-sum on every connected component up to round-off;
/// callers normally obtain it from [`super::project_zero_mean`]. Stops when
/// the *recomputed* relative residual `||b - Lx|| / ||b||` drops to
/// `cfg.rel_tolerance` — the cheap recurrence residual only triggers the
/// check — or when the iteration cap is reached.
pub fn cg_solve<T: Scalar>(
    g: &Graph<T>,
    b: &[T],
    cfg: &SolverConfig<T>,
    pre: Option<&dyn Preconditioner<T>>,
) -> Result<SolveReport<T>, SolveError> {
    let n = g.n();
    if b.len() != n {
        return Err(GraphError::LengthMismatch {
            expected: n,
            got: b.len(),
        }
        .into());
    }
    check_finite(b)?;
    let start = Instant::now();
    let comps = g.connected_components();

    let b_norm = norm2(b);
    if b_norm.is_zero() {
        return Ok(SolveReport {
            x: vec![T::zero(); n],
            iterations: 0,
            residual: T::zero(),
            wall_time: start.elapsed().as_secs_f64(),
            method: if pre.is_some() { Method::CgJacobi } else { Method::Cg },
            converged: true,
        });
    }
    // Reject right-hand sides that are visibly not zero-sum; those systems
    // are inconsistent and CG would silently converge to something else.
    {
        let mut sums = vec![T::zero(); comps.count];
        let mut scales = vec![T::zero(); comps.count];
        for (v, &c) in comps.labels.iter().enumerate() {
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
    }

    let precondition = |r: &[T]| -> Vec<T> {
        let mut z = match pre {
            Some(p) => p.apply(r),
            None => r.to_vec(),
        };
        project_zero_mean_in_place(&mut z, &comps);
        z
    };

    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rho = dot(&r, &z);
    let mut q = vec![T::zero(); n];
    let mut iterations = 0;
    let mut converged = false;

    let max_iters = cfg.max_iters_for(n);
    for it in 1..=max_iters {
        g.laplacian_apply_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= T::zero() || !pq.is_finite() {
            // Numerical breakdown: direction carries no energy (a NaN energy
            // fails the finiteness test). Stop with the current iterate; the
            // reported residual stays honest.
            break;
        }
        let alpha = rho / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        iterations = it;

        if norm2(&r) <= cfg.rel_tolerance * b_norm {
            // Recurrence says we are done; replace the recurrence residual
            // with the true one and re-check before declaring victory.
            let mut lx = vec![T::zero(); n];
            g.laplacian_apply_into(&x, &mut lx);
            for i in 0..n {
                r[i] = b[i] - lx[i];
            }
            if norm2(&r) <= cfg.rel_tolerance * b_norm {
                converged = true;
                break;
            }
        }

        z = precondition(&r);
        let rho_next = dot(&r, &z);
        let beta = rho_next / rho;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rho = rho_next;
    }

    let residual = true_relative_residual(g, b, &x);
    Ok(SolveReport {
        x,
        iterations,
        residual,
        wall_time: start.elapsed().as_secs_f64(),
        method: if pre.is_some() { Method::CgJacobi } else { Method::Cg },
        converged: converged && residual <= cfg.rel_tolerance,
    })
}
