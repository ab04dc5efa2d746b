//! Seeded random graph generators: Erdős–Rényi, Barabási–Albert,
//! Watts–Strogatz, and the stochastic block model.
//!
//! All generators are deterministic functions of their parameters and a
//! `u64` seed (ChaCha8 keystream), produce unit edge weights, and return
//! graphs satisfying the CSR invariants.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::scalar::Scalar;

/// Errors from graph generation.
#[derive(Debug, Error)]
pub enum GenError {
    /// Generators need at least two nodes.
    #[error("generator needs n >= 2, got {0}")]
    TooFewNodes(usize),
    /// ER edge budget exceeds the number of distinct pairs.
    #[error("cannot place {m} edges among {n} nodes (max {max})")]
    TooManyEdges { n: usize, m: usize, max: usize },
    /// BA attachment count must satisfy `1 <= k < n`.
    #[error("attachment count k = {k} must satisfy 1 <= k < n = {n}")]
    BadAttachment { k: usize, n: usize },
    /// WS ring degree must be even and less than `n`.
    #[error("ring degree k = {k} must be even and < n = {n}")]
    BadRingDegree { k: usize, n: usize },
    /// A probability fell outside `[0, 1]`.
    #[error("probability {name} = {value} outside [0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    /// SBM group count must satisfy `1 <= groups <= n`.
    #[error("group count {groups} must satisfy 1 <= groups <= n = {n}")]
    BadGroupCount { groups: usize, n: usize },
    /// Model name not recognized on the command line.
    #[error("unknown model `{0}`; expected one of er, ba, ws, sbm")]
    UnknownModel(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Model selector without parameters, used by sweeps and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Er,
    Ba,
    Ws,
    Sbm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Er, ModelKind::Ba, ModelKind::Ws, ModelKind::Sbm];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Er => "er",
            ModelKind::Ba => "ba",
            ModelKind::Ws => "ws",
            ModelKind::Sbm => "sbm",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "er" => Ok(ModelKind::Er),
            "ba" => Ok(ModelKind::Ba),
            "ws" => Ok(ModelKind::Ws),
            "sbm" => Ok(ModelKind::Sbm),
            other => Err(GenError::UnknownModel(other.to_string())),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully parameterized generator model.
#[derive(Debug, Clone, PartialEq)]
pub enum GenModel {
    /// Uniform graph with exactly `m` edges (G(n, m)).
    Er { m: usize },
    /// Preferential attachment, `k` edges per arriving node.
    Ba { k: usize },
    /// Ring lattice of even degree `k` with rewiring probability `p`.
    Ws { k: usize, p: f64 },
    /// Stochastic block model with near-equal groups.
    Sbm { groups: usize, p_in: f64, p_out: f64 },
}

impl GenModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            GenModel::Er { .. } => ModelKind::Er,
            GenModel::Ba { .. } => ModelKind::Ba,
            GenModel::Ws { .. } => ModelKind::Ws,
            GenModel::Sbm { .. } => ModelKind::Sbm,
        }
    }
}

/// A complete, reproducible generation request.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub model: GenModel,
    pub seed: u64,
}

impl GenSpec {
    /// Generates the graph (group labels, if any, are dropped).
    pub fn generate<T: Scalar>(&self) -> Result<Graph<T>, GenError> {
        match self.model {
            GenModel::Er { m } => gen_er(self.n, m, self.seed),
            GenModel::Ba { k } => gen_ba(self.n, k, self.seed),
            GenModel::Ws { k, p } => gen_ws(self.n, k, p, self.seed),
            GenModel::Sbm { groups, p_in, p_out } => {
                gen_sbm(self.n, groups, p_in, p_out, self.seed).map(|(g, _)| g)
            }
        }
    }
}

fn check_n(n: usize) -> Result<(), GenError> {
    if n < 2 {
        Err(GenError::TooFewNodes(n))
    } else {
        Ok(())
    }
}

fn check_prob(name: &'static str, value: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&value) && value.is_finite() {
        Ok(())
    } else {
        Err(GenError::BadProbability { name, value })
    }
}

/// Erdős–Rényi G(n, m): exactly `m` distinct edges drawn uniformly by
/// rejection sampling.
pub fn gen_er<T: Scalar>(n: usize, m: usize, seed: u64) -> Result<Graph<T>, GenError> {
    check_n(n)?;
    let max = n * (n - 1) / 2;
    if m > max {
        return Err(GenError::TooManyEdges { n, m, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(m * 2);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push((key.0, key.1, T::one()));
        }
    }
    Ok(Graph::build(n, &edges)?)
}

/// Barabási–Albert preferential attachment.
///
/// Seeds with a path on `k` nodes, then attaches each new node to `k`
/// distinct existing nodes drawn proportionally to degree (repeated-endpoint
/// urn). Final edge count: `(k - 1) + k * (n - k)`.
pub fn gen_ba<T: Scalar>(n: usize, k: usize, seed: u64) -> Result<Graph<T>, GenError> {
    check_n(n)?;
    if k == 0 || k >= n {
        return Err(GenError::BadAttachment { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, T)> = Vec::with_capacity(k.saturating_sub(1) + k * (n - k));
    // Urn of edge endpoints: each node appears once per incident edge, so a
    // uniform draw from the urn is a degree-proportional draw.
    let mut urn: Vec<usize> = Vec::with_capacity(2 * (k - 1) + 2 * k * (n - k));
    for i in 0..k.saturating_sub(1) {
        edges.push((i, i + 1, T::one()));
        urn.push(i);
        urn.push(i + 1);
    }
    let mut targets = Vec::with_capacity(k);
    for v in k..n {
        targets.clear();
        while targets.len() < k {
            let t = if urn.is_empty() {
                // Only for k = 1 at the very first step, where the seed
                // "path" is a single isolated node.
                rng.random_range(0..v)
            } else {
                urn[rng.random_range(0..urn.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((v, t, T::one()));
            urn.push(v);
            urn.push(t);
        }
    }
    Ok(Graph::build(n, &edges)?)
}

/// Watts–Strogatz small world: ring lattice with `k / 2` neighbors on each
/// side, then each lattice edge is rewired with probability `p` by replacing
/// its far endpoint with a uniform non-duplicate, non-self target. The edge
/// count `n * k / 2` is preserved exactly.
pub fn gen_ws<T: Scalar>(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph<T>, GenError> {
    check_n(n)?;
    if !k.is_multiple_of(2) || k >= n {
        return Err(GenError::BadRingDegree { k, n });
    }
    check_prob("p", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<std::collections::HashSet<usize>> =
        vec![std::collections::HashSet::new(); n];
    let add = |adj: &mut Vec<std::collections::HashSet<usize>>, a: usize, b: usize| {
        adj[a].insert(b);
        adj[b].insert(a);
    };
    for j in 1..=k / 2 {
        for i in 0..n {
            add(&mut adj, i, (i + j) % n);
        }
    }
    for j in 1..=k / 2 {
        for i in 0..n {
            if !rng.random_bool(p) {
                continue;
            }
            let old = (i + j) % n;
            if adj[i].len() == n - 1 {
                continue; // `i` already adjacent to everyone; nothing to rewire to
            }
            let new = loop {
                let t = rng.random_range(0..n);
                if t != i && !adj[i].contains(&t) {
                    break t;
                }
            };
            adj[i].remove(&old);
            adj[old].remove(&i);
            add(&mut adj, i, new);
        }
    }
    let mut edges = Vec::with_capacity(n * k / 2);
    for (u, set) in adj.iter().enumerate() {
        let mut nbrs: Vec<usize> = set.iter().copied().filter(|&v| v > u).collect();
        nbrs.sort_unstable();
        for v in nbrs {
            edges.push((u, v, T::one()));
        }
    }
    Ok(Graph::build(n, &edges)?)
}

/// Stochastic block model with `groups` near-equal groups (sizes differ by
/// at most one; larger groups first). Intra-group pairs are edges with
/// probability `p_in`, inter-group pairs with probability `p_out`.
///
/// Returns the graph together with the group label of every node.
pub fn gen_sbm<T: Scalar>(
    n: usize,
    groups: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph<T>, Vec<usize>), GenError> {
    check_n(n)?;
    if groups == 0 || groups > n {
        return Err(GenError::BadGroupCount { groups, n });
    }
    check_prob("p_in", p_in)?;
    check_prob("p_out", p_out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let base = n / groups;
    let extra = n % groups;
    let mut starts = Vec::with_capacity(groups + 1);
    starts.push(0);
    let mut labels = Vec::with_capacity(n);
    for g in 0..groups {
        let size = base + usize::from(g < extra);
        labels.extend(std::iter::repeat_n(g, size));
        starts.push(starts[g] + size);
    }

    let mut edges: Vec<(usize, usize, T)> = Vec::new();
    // Intra-group blocks: Bernoulli sampling with geometric skips over the
    // pairs (i, j), j < i, inside each group.
    for g in 0..groups {
        let (lo, hi) = (starts[g], starts[g + 1]);
        sample_block_lower(&mut rng, hi - lo, p_in, |i, j| {
            edges.push((lo + j, lo + i, T::one()));
        });
    }
    // Inter-group blocks, in (a, b) order with a < b.
    for a in 0..groups {
        for b in a + 1..groups {
            let (alo, ahi) = (starts[a], starts[a + 1]);
            let (blo, bhi) = (starts[b], starts[b + 1]);
            sample_block_rect(&mut rng, ahi - alo, bhi - blo, p_out, |i, j| {
                edges.push((alo + i, blo + j, T::one()));
            });
        }
    }
    Ok((Graph::build(n, &edges)?, labels))
}

/// Visits each pair `(i, j)` with `j < i < s` independently with probability
/// `p`, in expected `O(p s^2)` time via geometric skips.
fn sample_block_lower(rng: &mut ChaCha8Rng, s: usize, p: f64, mut emit: impl FnMut(usize, usize)) {
    if p <= 0.0 || s < 2 {
        return;
    }
    if p >= 1.0 {
        for i in 1..s {
            for j in 0..i {
                emit(i, j);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut i = 1usize;
    let mut j = usize::MAX; // current column, advanced before each use
    loop {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor() as usize;
        j = j.wrapping_add(1).saturating_add(skip);
        while i < s && j >= i {
            j -= i;
            i += 1;
        }
        if i >= s {
            return;
        }
        emit(i, j);
    }
}

/// Visits each pair `(i, j)` with `i < rows`, `j < cols` independently with
/// probability `p` via geometric skips.
fn sample_block_rect(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    p: f64,
    mut emit: impl FnMut(usize, usize),
) {
    if p <= 0.0 || rows == 0 || cols == 0 {
        return;
    }
    if p >= 1.0 {
        for i in 0..rows {
            for j in 0..cols {
                emit(i, j);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut i = 0usize;
    let mut j = usize::MAX;
    loop {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor() as usize;
        j = j.wrapping_add(1).saturating_add(skip);
        while j >= cols {
            j -= cols;
            i += 1;
            if i >= rows {
                return;
            }
        }
        emit(i, j);
    }
}

/// Derives model parameters hitting a target average degree, for sweeps.
///
/// * ER: `m = round(n * d / 2)` (exact in expectation and count).
/// * BA: `k = max(1, round(d / 2))`, since the BA average degree tends to
///   `2k`.
/// * WS: `k` is `d` rounded to the nearest even value (minimum 2), with
///   rewiring probability fixed at 0.1.
/// * SBM: 10 near-equal groups (fewer on small graphs) with `p_in` five
///   times `p_out`, scaled to the target degree.
///
/// The achieved degree for BA/WS is the nearest the model supports; records
/// downstream always report the actual `2m / n`.
pub fn params_for_avg_degree(kind: ModelKind, n: usize, avg_degree: f64) -> GenModel {
    match kind {
        ModelKind::Er => GenModel::Er {
            m: (n as f64 * avg_degree / 2.0).round() as usize,
        },
        ModelKind::Ba => GenModel::Ba {
            k: ((avg_degree / 2.0).round() as usize).max(1),
        },
        ModelKind::Ws => {
            let k = (2.0 * (avg_degree / 2.0).round()).max(2.0) as usize;
            GenModel::Ws {
                k: k.min(if n.is_multiple_of(2) { n - 2 } else { n - 1 }),
                p: 0.1,
            }
        }
        ModelKind::Sbm => {
            let groups = 10.min(n / 2).max(1);
            let s = n as f64 / groups as f64;
            let ratio = 5.0;
            // Solve p_in * (s - 1) + p_out * (n - s) = d with p_in = ratio * p_out.
            let p_out = (avg_degree / (ratio * (s - 1.0) + (n as f64 - s))).clamp(0.0, 1.0);
            let p_in = (ratio * p_out).clamp(0.0, 1.0);
            GenModel::Sbm { groups, p_in, p_out }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_has_exact_edge_count() {
        let g: Graph<f64> = gen_er(10, 15, 7).unwrap();
        assert_eq!(g.n(), 10);
        assert_eq!(g.m(), 15);
        assert!(g.is_well_formed());
    }

    #[test]
    fn er_saturated_is_complete() {
        let g: Graph<f64> = gen_er(4, 6, 1).unwrap();
        assert_eq!(g.m(), 6);
        for u in 0..4 {
            assert_eq!(g.neighbors(u).len(), 3);
        }
    }

    #[test]
    fn er_rejects_overfull_budget() {
        assert!(matches!(
            gen_er::<f64>(4, 7, 0),
            Err(GenError::TooManyEdges { max: 6, .. })
        ));
    }

    #[test]
    fn ba_edge_count_formula() {
        let g: Graph<f64> = gen_ba(100, 3, 42).unwrap();
        assert_eq!(g.m(), 2 + 3 * 97);
        assert!(g.is_well_formed());
    }

    #[test]
    fn ba_with_k1_is_a_connected_tree() {
        let g: Graph<f64> = gen_ba(50, 1, 3).unwrap();
        assert_eq!(g.m(), 49);
        assert_eq!(g.connected_components().count, 1);
    }

    #[test]
    fn ba_rejects_bad_k() {
        assert!(matches!(gen_ba::<f64>(5, 0, 0), Err(GenError::BadAttachment { .. })));
        assert!(matches!(gen_ba::<f64>(5, 5, 0), Err(GenError::BadAttachment { .. })));
    }

    #[test]
    fn ws_without_rewiring_is_the_ring_lattice() {
        let g: Graph<f64> = gen_ws(10, 4, 0.0, 5).unwrap();
        assert_eq!(g.m(), 20);
        for u in 0..10 {
            assert_eq!(g.neighbors(u).len(), 4);
        }
        assert!(g.neighbors(0).contains(&1));
        assert!(g.neighbors(0).contains(&2));
        assert!(g.neighbors(0).contains(&8));
        assert!(g.neighbors(0).contains(&9));
    }

    #[test]
    fn ws_preserves_edge_count_under_full_rewiring() {
        let g: Graph<f64> = gen_ws(30, 6, 1.0, 11).unwrap();
        assert_eq!(g.m(), 90);
        assert!(g.is_well_formed());
    }

    #[test]
    fn ws_rejects_odd_or_large_k() {
        assert!(matches!(gen_ws::<f64>(10, 3, 0.1, 0), Err(GenError::BadRingDegree { .. })));
        assert!(matches!(gen_ws::<f64>(10, 10, 0.1, 0), Err(GenError::BadRingDegree { .. })));
    }

    #[test]
    fn sbm_extremes_form_disjoint_cliques() {
        let (g, labels): (Graph<f64>, _) = gen_sbm(20, 2, 1.0, 0.0, 9).unwrap();
        assert_eq!(g.m(), 2 * (10 * 9 / 2));
        let comps = g.connected_components();
        assert_eq!(comps.count, 2);
        assert_eq!(comps.sizes, vec![10, 10]);
        assert_eq!(labels[0..10], [0; 10]);
        assert_eq!(labels[10..20], [1; 10]);
    }

    #[test]
    fn sbm_group_sizes_are_near_equal() {
        let (_, labels): (Graph<f64>, _) = gen_sbm(11, 3, 0.5, 0.1, 1).unwrap();
        let mut sizes = [0usize; 3];
        for &l in &labels {
            sizes[l] += 1;
        }
        assert_eq!(sizes, [4, 4, 3]);
    }

    #[test]
    fn sbm_edge_count_is_statistically_plausible() {
        // Expected m = p_in * intra_pairs + p_out * inter_pairs; check the
        // observation lies within four standard deviations.
        let (n, groups, p_in, p_out) = (200usize, 4usize, 0.1f64, 0.01f64);
        let s = n / groups;
        let intra = groups as f64 * (s * (s - 1) / 2) as f64;
        let inter = (n * (n - 1) / 2) as f64 - intra;
        let mean = p_in * intra + p_out * inter;
        let var = intra * p_in * (1.0 - p_in) + inter * p_out * (1.0 - p_out);
        let sd = var.sqrt();
        let (g, _): (Graph<f64>, _) = gen_sbm(n, groups, p_in, p_out, 12345).unwrap();
        let m = g.m() as f64;
        assert!(
            (m - mean).abs() <= 4.0 * sd,
            "m = {m}, expected {mean} +/- {:.1}",
            4.0 * sd
        );
    }

    #[test]
    fn sbm_with_one_group_behaves_like_gnp() {
        let (n, p) = (200usize, 0.1f64);
        let pairs = (n * (n - 1) / 2) as f64;
        let mean = p * pairs;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        let (g, labels): (Graph<f64>, _) = gen_sbm(n, 1, p, 0.0, 77).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        assert!(((g.m() as f64) - mean).abs() <= 4.0 * sd);
    }

    #[test]
    fn sbm_rejects_bad_probabilities() {
        assert!(matches!(
            gen_sbm::<f64>(10, 2, 1.5, 0.0, 0),
            Err(GenError::BadProbability { name: "p_in", .. })
        ));
        assert!(matches!(
            gen_sbm::<f64>(10, 2, 0.5, -0.1, 0),
            Err(GenError::BadProbability { name: "p_out", .. })
        ));
    }

    #[test]
    fn generators_are_deterministic_in_the_seed() {
        let spec = |model| GenSpec { n: 60, model, seed: 99 };
        for model in [
            GenModel::Er { m: 120 },
            GenModel::Ba { k: 2 },
            GenModel::Ws { k: 4, p: 0.3 },
            GenModel::Sbm { groups: 3, p_in: 0.4, p_out: 0.05 },
        ] {
            let a: Graph<f64> = spec(model.clone()).generate().unwrap();
            let b: Graph<f64> = spec(model.clone()).generate().unwrap();
            assert_eq!(a, b, "model {model:?} not deterministic");
            let c: Graph<f64> = GenSpec { n: 60, model: model.clone(), seed: 100 }
                .generate()
                .unwrap();
            assert_ne!(a, c, "model {model:?} ignored the seed");
        }
    }

    #[test]
    fn degree_targets_are_roughly_hit() {
        let n = 400usize;
        for kind in ModelKind::ALL {
            for d in [2.0, 8.0] {
                let spec = GenSpec {
                    n,
                    model: params_for_avg_degree(kind, n, d),
                    seed: 5,
                };
                let g: Graph<f64> = spec.generate().unwrap();
                let actual = 2.0 * g.m() as f64 / n as f64;
                assert!(
                    (actual - d).abs() <= 1.0 + 0.25 * d,
                    "{kind}: target {d}, got {actual}"
                );
            }
        }
    }
}
