//! Augmented spanning-tree preconditioner.
//!
//! Take a spanning tree `T` of the graph and add back a budget of `s`
//! off-tree edges, sampled without replacement proportionally to weight.
//! The preconditioner applies the exact pseudoinverse of the augmented
//! graph `H = T + S`: since `L_H = L_T + U W U^T` with `U` holding the `s`
//! incidence columns of the sampled edges, the Woodbury identity reduces
//! each application to two tree solves plus a dense solve with the `s x s`
//! capacitance matrix `C = W^{-1} + U^T pinv(L_T) U`, which is factored
//! once by Cholesky. Memory stays `O(n + s^2)`; no dense `n x n` matrix is
//! ever formed.
//!
//! With `s = 0` this degenerates to the plain tree preconditioner; with
//! `s` covering every off-tree edge it is an exact solver and CG converges
//! in one iteration.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::scalar::Scalar;

use super::tree::{tree_solve_unchecked, SpanningTree};
use super::{project_zero_mean_in_place, Preconditioner};

/// Default off-tree edge budget: `ceil(2 * sqrt(n))`. Keeps the dense
/// capacitance factor at `O(n)` scalars, so the preconditioner respects the
/// same asymptotic memory budget as the graph itself.
pub fn default_aug_budget(n: usize) -> usize {
    (2.0 * (n as f64).sqrt()).ceil() as usize
}

/// Dense Cholesky factor of a small SPD matrix, row-major lower triangle.
#[derive(Debug, Clone)]
struct DenseChol<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> DenseChol<T> {
    /// Factors `a` (row-major, symmetric positive definite) in place.
    fn factor(mut a: Vec<T>, n: usize) -> Self {
        debug_assert_eq!(a.len(), n * n);
        // Tiny floor keeps the factorization defined if round-off nudges a
        // pivot of the (mathematically SPD) capacitance to zero.
        let scale = (0..n)
            .map(|i| a[i * n + i])
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        let floor = T::epsilon() * scale.max(T::one());
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= a[j * n + k] * a[j * n + k];
            }
            let d = d.max(floor).sqrt();
            a[j * n + j] = d;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for k in 0..j {
                    v -= a[i * n + k] * a[j * n + k];
                }
                a[i * n + j] = v / d;
            }
        }
        DenseChol { n, l: a }
    }

    /// Solves `L L^T x = v` in place.
    #[allow(clippy::needless_range_loop)]
    fn solve_in_place(&self, v: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut s = v[i];
            for k in 0..i {
                s -= self.l[i * n + k] * v[k];
            }
            v[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = v[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * v[k];
            }
            v[i] = s / self.l[i * n + i];
        }
    }
}

/// Exact pseudoinverse of a spanning tree augmented with sampled off-tree
/// edges, applied through the Woodbury identity.
pub struct AugTreePrecond<T> {
    tree: SpanningTree<T>,
    /// Endpoints of the sampled off-tree edges.
    edges: Vec<(usize, usize)>,
    chol: DenseChol<T>,
}

/// Builds the augmented-tree preconditioner with an off-tree budget of
/// `extra` edges (clamped to the number available), sampled without
/// replacement with probability proportional to edge weight.
pub fn build_aug_tree_precond<T: Scalar>(
    g: &Graph<T>,
    tree: &SpanningTree<T>,
    extra: usize,
    seed: u64,
) -> AugTreePrecond<T> {
    let mut off: Vec<(usize, usize, T)> = g
        .edges()
        .filter(|&(u, v, _)| !tree.is_tree_edge(u, v))
        .collect();

    let sampled: Vec<(usize, usize, T)> = if extra >= off.len() {
        off
    } else {
        // Weighted sampling without replacement: give edge e an
        // exponential key Exp(1) / w_e and keep the `extra` smallest.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keyed: Vec<(f64, usize)> = off
            .iter()
            .enumerate()
            .map(|(i, &(_, _, w))| {
                let u: f64 = rng.random();
                (-(1.0 - u).ln() / w.to_f64_lossy(), i)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        keyed.truncate(extra);
        let mut picked: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
        picked.sort_unstable();
        picked.into_iter().map(|i| std::mem::replace(&mut off[i], (0, 0, T::one()))).collect()
    };

    let s = sampled.len();
    let n = g.n();
    // Capacitance C = W^{-1} + U^T pinv(L_T) U, built one column at a time
    // so only a single length-n work vector is alive.
    let mut c = vec![T::zero(); s * s];
    let mut unit = vec![T::zero(); n];
    for (j, &(a, b, w)) in sampled.iter().enumerate() {
        unit[a] = T::one();
        unit[b] = -T::one();
        let t = tree_solve_unchecked(tree, &unit);
        unit[a] = T::zero();
        unit[b] = T::zero();
        for (i, &(ai, bi, _)) in sampled.iter().enumerate() {
            c[i * s + j] = t[ai] - t[bi];
        }
        c[j * s + j] += T::one() / w;
    }
    // Symmetrize away tree-solve round-off before factoring.
    let half = T::from_f64_lossy(0.5);
    for i in 0..s {
        for j in 0..i {
            let v = (c[i * s + j] + c[j * s + i]) * half;
            c[i * s + j] = v;
            c[j * s + i] = v;
        }
    }

    AugTreePrecond {
        tree: tree.clone(),
        edges: sampled.into_iter().map(|(u, v, _)| (u, v)).collect(),
        chol: DenseChol::factor(c, s),
    }
}

impl<T: Scalar> Preconditioner<T> for AugTreePrecond<T> {
    fn apply(&self, r: &[T]) -> Vec<T> {
        let mut rp = r.to_vec();
        project_zero_mean_in_place(&mut rp, &self.tree.comps);
        let a = tree_solve_unchecked(&self.tree, &rp);
        let s = self.edges.len();
        if s == 0 {
            return a;
        }
        // y = C^{-1} U^T a
        let mut y: Vec<T> = self.edges.iter().map(|&(u, v)| a[u] - a[v]).collect();
        self.chol.solve_in_place(&mut y);
        // correction = pinv(L_T) U y; U y is zero-sum by construction.
        let mut uy = vec![T::zero(); self.tree.n()];
        for (&(u, v), &yi) in self.edges.iter().zip(&y) {
            uy[u] += yi;
            uy[v] -= yi;
        }
        let corr = tree_solve_unchecked(&self.tree, &uy);
        a.iter().zip(&corr).map(|(&ai, &ci)| ai - ci).collect()
    }

    fn storage_entries(&self) -> usize {
        self.tree.storage_entries() + 2 * self.edges.len() + self.chol.l.len()
    }
}
