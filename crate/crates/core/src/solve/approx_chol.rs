//! Randomized approximate sparse Cholesky preconditioner.
//!
//! Vertices are eliminated one at a time. Eliminating `v` with current
//! (merged) star `{(u_i, w_i)}` and total weight `W = sum w_i` contributes
//! the column `(v, star, W)` to an LDL^T factor and replaces `v` by a
//! clique on its neighbors whose exact Schur weights are `w_i w_j / W`.
//! Small cliques (at most 3 pairs) are inserted exactly; larger ones are
//! approximated by `d` sampled edges, picking pairs `(u_i, u_j)` with
//! probability proportional to `w_i * w_j` and splitting the total clique
//! mass `(W^2 - sum w_i^2) / (2 W)` evenly across the samples, which keeps
//! the insertion unbiased edge by edge.
//!
//! The elimination order is a seeded uniformly random permutation, with one
//! greedy refinement: vertices whose current degree is at most 2 are
//! eliminated first (FIFO). Their elimination is exact, so on forests the
//! whole factorization is exact and preconditioned CG converges in one
//! step; on general graphs it shrinks hanging trees and long paths before
//! any sampling happens.
//!
//! The factor stores one star per vertex — `O(m)` scalars overall — and
//! applies in `O(m)` by a forward and a backward sweep.

use std::collections::VecDeque;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{ComponentLabeling, Graph};
use crate::scalar::Scalar;

use super::{project_zero_mean_in_place, Preconditioner, SolverConfig};

struct Step<T> {
    vertex: usize,
    /// `1 / W`; zero for kernel steps (empty star).
    inv_total: T,
    /// Star at elimination time: merged distinct neighbors and weights.
    star: Vec<(usize, T)>,
}

/// LDL^T-style factor of an approximation of the graph Laplacian.
pub struct ApproxCholPrecond<T> {
    steps: Vec<Step<T>>,
    comps: ComponentLabeling,
}

/// Builds the approximate sparse Cholesky factor of the Laplacian of `g`,
/// seeded by `cfg.seed`.
pub fn approx_chol_factor<T: Scalar>(g: &Graph<T>, cfg: &SolverConfig<T>) -> ApproxCholPrecond<T> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Live multigraph adjacency with lazy deletion: entries pointing at
    // eliminated vertices are dropped when their list is next gathered.
    let mut adj: Vec<Vec<(usize, T)>> = (0..n)
        .map(|u| {
            g.neighbors(u)
                .iter()
                .zip(g.weights_of(u))
                .map(|(&v, &w)| (v, w))
                .collect()
        })
        .collect();
    // Upper bound on each vertex's current distinct degree: incremented per
    // inserted entry, decremented when a distinct neighbor is eliminated.
    let mut deg_est: Vec<usize> = (0..n).map(|u| g.neighbors(u).len()).collect();
    let mut eliminated = vec![false; n];

    // Seeded uniformly random elimination order...
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut perm_pos = 0usize;
    // ... preempted by a FIFO queue of (estimated) degree <= 2 vertices.
    let mut low: VecDeque<usize> = (0..n).filter(|&u| deg_est[u] <= 2).collect();

    let mut steps: Vec<Step<T>> = Vec::with_capacity(n);
    let mut cums: Vec<f64> = Vec::new();
    while steps.len() < n {
        let v = loop {
            if let Some(u) = low.pop_front() {
                if !eliminated[u] && deg_est[u] <= 2 {
                    break u;
                }
                continue; // already eliminated, or a stale queue entry
            }
            let u = perm[perm_pos];
            perm_pos += 1;
            if !eliminated[u] {
                break u;
            }
        };

        // Gather: drop dead entries, sort, merge parallel edges.
        let mut list = std::mem::take(&mut adj[v]);
        list.retain(|&(u, _)| !eliminated[u]);
        list.sort_unstable_by_key(|&(u, _)| u);
        let mut star: Vec<(usize, T)> = Vec::with_capacity(list.len());
        for (u, w) in list {
            match star.last_mut() {
                Some(last) if last.0 == u => last.1 += w,
                _ => star.push((u, w)),
            }
        }
        eliminated[v] = true;

        let total: T = star.iter().map(|&(_, w)| w).sum();
        let d = star.len();
        for &(u, _) in &star {
            deg_est[u] -= 1;
            if deg_est[u] <= 2 {
                low.push_back(u);
            }
        }

        let insert = |adj: &mut Vec<Vec<(usize, T)>>,
                          deg_est: &mut Vec<usize>,
                          low: &mut VecDeque<usize>,
                          a: usize,
                          b: usize,
                          w: T| {
            adj[a].push((b, w));
            adj[b].push((a, w));
            deg_est[a] += 1;
            deg_est[b] += 1;
            if deg_est[a] <= 2 {
                low.push_back(a);
            }
            if deg_est[b] <= 2 {
                low.push_back(b);
            }
        };

        if d >= 2 && d * (d - 1) / 2 <= 3 {
            // Exact Schur clique for degree 2 and 3.
            for i in 0..d {
                for j in i + 1..d {
                    let w = star[i].1 * star[j].1 / total;
                    insert(&mut adj, &mut deg_est, &mut low, star[i].0, star[j].0, w);
                }
            }
        } else if d >= 4 {
            // Sampled clique: d pairs with P(i, j) proportional to w_i w_j.
            let sum_sq: T = star.iter().map(|&(_, w)| w * w).sum();
            let mass = (total * total - sum_sq) / (total + total);
            let each = mass / T::from_f64_lossy(d as f64);
            cums.clear();
            let mut acc = 0.0f64;
            for &(_, w) in &star {
                acc += w.to_f64_lossy();
                cums.push(acc);
            }
            let total_f = acc;
            let pick = |rng: &mut ChaCha8Rng| -> usize {
                let r = rng.random::<f64>() * total_f;
                cums.partition_point(|&c| c <= r).min(d - 1)
            };
            for _ in 0..d {
                let (i, j) = loop {
                    let i = pick(&mut rng);
                    let j = pick(&mut rng);
                    if i != j {
                        break (i, j);
                    }
                };
                insert(&mut adj, &mut deg_est, &mut low, star[i].0, star[j].0, each);
            }
        }

        steps.push(Step {
            vertex: v,
            inv_total: if d == 0 { T::zero() } else { T::one() / total },
            star,
        });
    }

    ApproxCholPrecond {
        steps,
        comps: g.connected_components(),
    }
}

impl<T: Scalar> Preconditioner<T> for ApproxCholPrecond<T> {
    fn apply(&self, r: &[T]) -> Vec<T> {
        let n = r.len();
        // Forward sweep: acc picks up the unit-lower-triangular solve.
        let mut acc = r.to_vec();
        for step in &self.steps {
            if step.star.is_empty() {
                continue;
            }
            let scaled = acc[step.vertex] * step.inv_total;
            for &(u, w) in &step.star {
                acc[u] += w * scaled;
            }
        }
        // Backward sweep (includes the diagonal solve).
        let mut x = vec![T::zero(); n];
        for step in self.steps.iter().rev() {
            if step.star.is_empty() {
                continue; // kernel step: x stays zero, fixed by projection
            }
            let mut s = acc[step.vertex];
            for &(u, w) in &step.star {
                s += w * x[u];
            }
            x[step.vertex] = s * step.inv_total;
        }
        project_zero_mean_in_place(&mut x, &self.comps);
        x
    }

    fn storage_entries(&self) -> usize {
        self.steps
            .iter()
            .map(|s| 2 * s.star.len() + 2)
            .sum::<usize>()
            + self.comps.labels.len()
    }
}
