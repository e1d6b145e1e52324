//! Barabási-Albert graphs and their topology diagnostics.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkParams {
    pub n: usize,
    /// Edges added by each arriving node.
    pub m: usize,
    /// Size of the seed clique.
    pub m0: usize,
    pub seed: u64,
}

impl NetworkParams {
    /// Parameters with the default seed clique `m0 = m + 1`.
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        NetworkParams { n, m, m0: m + 1, seed }
    }

    pub fn with_m0(mut self, m0: usize) -> Self {
        self.m0 = m0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Param("m must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::Param("N must be at least 2"));
        }
        if self.m > self.m0 {
            return Err(Error::Param("m must not exceed the seed clique size m0"));
        }
        if self.m0 > self.n {
            return Err(Error::Param("seed clique size m0 must not exceed N"));
        }
        Ok(())
    }

    /// `m0(m0-1)/2 + m(N-m0)`.
    pub fn expected_edge_count(&self) -> usize {
        self.m0 * (self.m0 - 1) / 2 + self.m * (self.n - self.m0)
    }
}

/// Immutable simple undirected graph in compressed sparse row form.
///
/// Neighbor lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Rejects self-loops,
    /// repeated edges and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::Param("node count does not fit in 32 bits"));
        }
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Param("edge endpoint out of range"));
            }
            if u == v {
                return Err(Error::NotSimple("self-loop"));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[fill[u]] = v as u32;
            fill[u] += 1;
            neighbors[fill[v]] = u as u32;
            fill[v] += 1;
        }
        for i in 0..n {
            let list = &mut neighbors[offsets[i]..offsets[i + 1]];
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NotSimple("duplicate edge"));
            }
        }
        Ok(Graph { offsets, neighbors })
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().min().unwrap_or(0)
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }
}

/// Grows a Barabási-Albert graph: a complete graph on `m0` nodes, then each
/// new node links to `m` distinct existing nodes picked with probability
/// proportional to their current degree.
///
/// Picks are drawn uniformly from a flat list holding every node once per
/// unit of degree; a pick already chosen for the same new node is redrawn.
pub fn generate_ba<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    if params.n > u32::MAX as usize {
        return Err(Error::Param("node count does not fit in 32 bits"));
    }
    let NetworkParams { n, m, m0, .. } = *params;
    let mut edges = Vec::with_capacity(params.expected_edge_count());
    let mut targets: Vec<u32> = Vec::with_capacity(2 * params.expected_edge_count());
    for u in 0..m0 {
        for v in (u + 1)..m0 {
            edges.push((u, v));
            targets.push(u as u32);
            targets.push(v as u32);
        }
    }
    // m0 == 1 (only possible with m == 1) leaves no degree mass to sample
    // from; the second node attaches to node 0 unconditionally.
    let mut picked: Vec<u32> = Vec::with_capacity(m);
    for v in m0..n {
        picked.clear();
        if targets.is_empty() {
            picked.push(0);
        } else {
            while picked.len() < m {
                let t = targets[rng.random_range(0..targets.len())];
                if !picked.contains(&t) {
                    picked.push(t);
                }
            }
        }
        for &t in &picked {
            edges.push((t as usize, v));
            targets.push(t);
            targets.push(v as u32);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Complementary cumulative degree distribution at each observed degree:
/// `(k, fraction of nodes with degree >= k)`, ascending in `k`.
pub fn degree_ccdf(g: &Graph) -> Vec<(usize, f64)> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let mut counts = vec![0usize; g.max_degree() + 1];
    for d in g.degrees() {
        counts[d] += 1;
    }
    let mut out = Vec::new();
    let mut at_least = n;
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            out.push((k, at_least as f64 / n as f64));
        }
        at_least -= c;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFit {
    /// Density exponent: `1 + |slope|` of the log-log CCDF.
    pub gamma_hat: f64,
    pub k_min_used: usize,
    pub r2: f64,
    /// Empirical prefactor `A` of `P(k) ≈ A k^-gamma_hat`, derived from the
    /// fitted CCDF intercept. Reported, not validated.
    pub prefactor: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Least-squares line through `(ln k, ln CCDF(k))` for `k >= k_min`.
pub fn fit_power_law(ccdf: &[(usize, f64)], k_min: usize) -> Result<DegreeFit> {
    let pts: Vec<(f64, f64)> = ccdf
        .iter()
        .filter(|&&(k, p)| k >= k_min && k > 0 && p > 0.0)
        .map(|&(k, p)| (libm::log(k as f64), libm::log(p)))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let gamma_hat = 1.0 + libm::fabs(slope);
    if !(gamma_hat > 1.0) {
        return Err(Error::Domain("flat CCDF gives no power-law exponent"));
    }
    Ok(DegreeFit {
        gamma_hat,
        k_min_used: k_min,
        r2,
        prefactor: libm::exp(intercept) * (gamma_hat - 1.0),
        points: pts.len(),
    })
}

const UNREACHED: u32 = u32::MAX;

/// Hop distances from `source`; unreachable nodes hold `u32::MAX`.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHED; g.n()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        for &v in g.neighbors(u) {
            let v = v as usize;
            if dist[v] == UNREACHED {
                dist[v] = du + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Farthest node from `source` (lowest id on ties) and its distance.
fn farthest(g: &Graph, source: usize) -> Result<(usize, usize)> {
    let dist = bfs_distances(g, source);
    let mut best = (source, 0u32);
    for (v, &d) in dist.iter().enumerate() {
        if d == UNREACHED {
            return Err(Error::Disconnected);
        }
        if d > best.1 {
            best = (v, d);
        }
    }
    Ok((best.0, best.1 as usize))
}

pub fn eccentricity(g: &Graph, v: usize) -> Result<usize> {
    farthest(g, v).map(|(_, d)| d)
}

/// Double-sweep estimate of the diameter: BFS from node 0 to its farthest
/// node `u`, then the eccentricity of `u`. A lower bound on the true
/// diameter, exact on trees.
pub fn approx_diameter(g: &Graph) -> Result<usize> {
    if g.n() == 0 {
        return Ok(0);
    }
    let (u, _) = farthest(g, 0)?;
    eccentricity(g, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ba(n: usize, m: usize, seed: u64) -> Graph {
        let p = NetworkParams::new(n, m, seed);
        generate_ba(&p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn seed_clique_only_when_n_equals_m0() {
        let g = ba(3, 2, 7);
        assert_eq!(g.edge_count(), 3);
        assert!(g.degrees().all(|d| d == 2));
    }

    #[test]
    fn tree_edge_count_is_forced() {
        for seed in 0..20 {
            let p = NetworkParams::new(5, 1, seed);
            assert_eq!(p.m0, 2);
            let g = generate_ba(&p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(g.edge_count(), 4);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = [
            NetworkParams::new(10, 3, 0).with_m0(2),
            NetworkParams::new(3, 3, 0),
            NetworkParams::new(1, 1, 0),
            NetworkParams::new(10, 0, 0),
        ];
        for p in bad {
            assert!(matches!(generate_ba(&p, &mut rng), Err(Error::Param(_))), "{p:?}");
        }
    }

    #[test]
    fn from_edges_rejects_non_simple() {
        assert_eq!(Graph::from_edges(2, &[(0, 0)]), Err(Error::NotSimple("self-loop")));
        assert_eq!(
            Graph::from_edges(2, &[(0, 1), (1, 0)]),
            Err(Error::NotSimple("duplicate edge"))
        );
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn ccdf_small_cases() {
        let k3 = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(degree_ccdf(&k3), vec![(2, 1.0)]);
        assert_eq!(degree_ccdf(&star(4)), vec![(1, 1.0), (4, 0.2)]);
    }

    #[test]
    fn ccdf_starts_at_one_and_never_increases() {
        let g = ba(2000, 2, 3);
        let c = degree_ccdf(&g);
        assert_eq!(c[0], (2, 1.0));
        assert!(c.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let ccdf: Vec<_> = (1..=200).map(|k| (k, libm::pow(k as f64, -2.0))).collect();
        let fit = fit_power_law(&ccdf, 1).unwrap();
        assert!((fit.gamma_hat - 3.0).abs() < 1e-9, "{}", fit.gamma_hat);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.prefactor - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fit_needs_five_points() {
        let ccdf: Vec<_> = (1..=4).map(|k| (k, 1.0 / k as f64)).collect();
        assert_eq!(fit_power_law(&ccdf, 1), Err(Error::TooFewPoints { needed: 5, got: 4 }));
        let ccdf: Vec<_> = (1..=10).map(|k| (k, 1.0 / k as f64)).collect();
        assert!(fit_power_law(&ccdf, 7).is_err());
    }

    #[test]
    fn diameter_small_cases() {
        let k3 = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(approx_diameter(&k3), Ok(1));
        assert_eq!(approx_diameter(&path(5)), Ok(4));
        assert_eq!(approx_diameter(&star(6)), Ok(2));
        let split = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(approx_diameter(&split), Err(Error::Disconnected));
    }

    #[test]
    fn deterministic_for_seed() {
        assert_eq!(ba(500, 3, 11), ba(500, 3, 11));
        assert_ne!(ba(500, 3, 11), ba(500, 3, 12));
    }

    #[test]
    fn m0_larger_than_m_is_honoured() {
        let p = NetworkParams::new(50, 2, 1).with_m0(5);
        let g = generate_ba(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(g.edge_count(), 10 + 2 * 45);
        assert!((0..5).all(|u| (0..5).all(|v| u == v || g.contains_edge(u, v))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ba_structural_invariants(n in 2usize..300, m in 1usize..5, extra in 0usize..3, seed: u64) {
            let m0 = m + 1 + extra;
            prop_assume!(m0 <= n);
            let p = NetworkParams::new(n, m, seed).with_m0(m0);
            let g = generate_ba(&p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(g.n(), n);
            prop_assert_eq!(g.edge_count(), p.expected_edge_count());
            prop_assert_eq!(g.degrees().sum::<usize>(), 2 * g.edge_count());
            prop_assert!(g.min_degree() >= m);
            for u in 0..n {
                let nb = g.neighbors(u);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                for &v in nb {
                    prop_assert!(v as usize != u);
                    prop_assert!(g.contains_edge(v as usize, u));
                }
            }
            prop_assert!(approx_diameter(&g).is_ok());
        }
    }
}
