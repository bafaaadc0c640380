//! Pairwise distance matrices, triangle-inequality audit, minimum spanning tree
//! and tree evaluation metrics.

use std::collections::VecDeque;

use serde::Serialize;

use crate::alignment::{aligned_correlation, zero_lag_return_correlation, AcConfig, Candidate};
use crate::error::{Error, Result};
use crate::par;
use crate::series::TimeSeries;

/// Per-pair statistics of an aligned-correlation comparison; `x` is row `i`, `y` row `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairStats {
    pub i: usize,
    pub j: usize,
    pub x_label: String,
    pub y_label: String,
    pub ac_distance: f64,
    pub aligned_correlation: f64,
    pub zero_lag_correlation: f64,
    pub average_lag: f64,
    pub nonzero_ratio: f64,
    pub chosen_window: Candidate,
}

/// Symmetric, non-negative, zero-diagonal matrix with labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: Vec<Vec<f64>>,
    /// One entry per unordered pair `i < j` in row-major order, when built from series.
    pair_stats: Vec<PairStats>,
}

impl DistanceMatrix {
    pub fn from_rows(labels: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if d.len() != n || d.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig(format!("distance matrix must be {n} x {n}")));
        }
        for i in 0..n {
            if d[i][i] != 0.0 {
                return Err(Error::InvalidConfig(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                if !(d[i][j] >= 0.0) || !d[i][j].is_finite() || d[i][j] != d[j][i] {
                    return Err(Error::InvalidConfig(format!("entry ({i}, {j}) breaks symmetry or is negative")));
                }
            }
        }
        Ok(Self { labels, d, pair_stats: Vec::new() })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.d
    }

    pub fn pair_stats(&self) -> &[PairStats] {
        &self.pair_stats
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairStats> {
        let (i, j) = (i.min(j), i.max(j));
        self.pair_stats.iter().find(|p| p.i == i && p.j == j)
    }
}

/// Aligned-correlation distance between every pair of series.
///
/// Pairs are evaluated in parallel (per `cfg.execution`). Any failing pair fails
/// the whole build with [`Error::InvalidPair`].
pub fn build_distance_matrix(panel: &[TimeSeries], cfg: &AcConfig) -> Result<DistanceMatrix> {
    let n = panel.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 series, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    // pairs run concurrently, so keep each alignment's window loop sequential
    let inner = AcConfig { execution: par::Execution::Sequential, ..cfg.clone() };
    let stats = par::try_map(cfg.execution, &pairs, |&(i, j)| {
        let (x, y) = (&panel[i], &panel[j]);
        let wrap = |e: Error| Error::InvalidPair(x.label().to_string(), y.label().to_string(), Box::new(e));
        let r = aligned_correlation(x, y, &inner).map_err(wrap)?;
        let zero_lag = zero_lag_return_correlation(x, y).map_err(wrap)?;
        Ok::<_, Error>(PairStats {
            i,
            j,
            x_label: x.label().to_string(),
            y_label: y.label().to_string(),
            ac_distance: r.ac_distance,
            aligned_correlation: r.aligned_correlation,
            zero_lag_correlation: zero_lag,
            average_lag: r.profile.average_lag,
            nonzero_ratio: r.profile.nonzero_ratio,
            chosen_window: r.chosen,
        })
    })?;
    let mut d = vec![vec![0.0; n]; n];
    for s in &stats {
        d[s.i][s.j] = s.ac_distance;
        d[s.j][s.i] = s.ac_distance;
    }
    Ok(DistanceMatrix { labels: panel.iter().map(|s| s.label().to_string()).collect(), d, pair_stats: stats })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleAudit {
    /// Unordered triples in which some side exceeds the sum of the other two.
    pub violations: usize,
    pub triples_checked: usize,
    /// `(i, j, k, excess)`: `d[i][k] - d[i][j] - d[j][k]` for the largest excess found.
    pub worst: Option<(usize, usize, usize, f64)>,
}

const TRIANGLE_TOL: f64 = 1e-12;

pub fn triangle_audit(m: &DistanceMatrix) -> TriangleAudit {
    let n = m.len();
    let mut audit = TriangleAudit { violations: 0, triples_checked: 0, worst: None };
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                audit.triples_checked += 1;
                // the long side sits opposite the middle vertex
                let checks = [(a, b, c), (a, c, b), (b, a, c)];
                let mut violated = false;
                for (i, j, k) in checks {
                    let excess = m.get(i, k) - m.get(i, j) - m.get(j, k);
                    if excess > TRIANGLE_TOL {
                        violated = true;
                        if audit.worst.is_none_or(|w| excess > w.3) {
                            audit.worst = Some((i, j, k, excess));
                        }
                    }
                }
                audit.violations += usize::from(violated);
            }
        }
    }
    audit
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MsTree {
    pub nodes: usize,
    pub edges: Vec<Edge>,
}

impl MsTree {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes];
        for e in &self.edges {
            deg[e.source] += 1;
            deg[e.target] += 1;
        }
        deg
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for e in &self.edges {
            adj[e.source].push((e.target, e.weight));
            adj[e.target].push((e.source, e.weight));
        }
        adj
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal's algorithm; edges sorted by `(weight, i, j)` with `i < j`, so equal
/// weights resolve to the lexicographically smallest edge set.
pub fn minimum_spanning_tree(m: &DistanceMatrix) -> MsTree {
    let n = m.len();
    let mut candidates: Vec<Edge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| Edge { source: i, target: j, weight: m.get(i, j) })
        .collect();
    candidates
        .sort_by(|a, b| a.weight.total_cmp(&b.weight).then(a.source.cmp(&b.source)).then(a.target.cmp(&b.target)));
    let mut ds = DisjointSet::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for e in candidates {
        if ds.union(e.source, e.target) {
            edges.push(e);
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    MsTree { nodes: n, edges }
}

/// Where the characteristic path length measures shortest paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PathGraph {
    /// Unique paths inside the spanning tree.
    #[default]
    Tree,
    /// Shortest paths over the complete distance graph.
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetworkMetrics {
    pub mean_dissimilarity: f64,
    pub normalized_tree_length: f64,
    pub characterized_path_length: f64,
    pub non_leaf_nodes: usize,
}

/// Sum over ordered pairs `i != j` of the tree-path weight between them.
pub fn tree_path_sum(tree: &MsTree) -> f64 {
    let adj = tree.adjacency();
    let mut total = 0.0;
    for root in 0..tree.nodes {
        let mut dist = vec![f64::NAN; tree.nodes];
        dist[root] = 0.0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, w) in &adj[u] {
                if dist[v].is_nan() {
                    dist[v] = dist[u] + w;
                    queue.push_back(v);
                }
            }
        }
        total += dist.iter().filter(|d| !d.is_nan()).sum::<f64>();
    }
    total
}

fn complete_graph_path_sum(m: &DistanceMatrix) -> f64 {
    let n = m.len();
    let mut d: Vec<Vec<f64>> = m.rows().to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.iter().flatten().sum()
}

pub fn network_metrics(m: &DistanceMatrix, tree: &MsTree, paths: PathGraph) -> Result<NetworkMetrics> {
    let n = m.len();
    if n < 2 || tree.nodes != n || tree.edges.len() + 1 != n {
        return Err(Error::InvalidConfig(format!("tree does not span the {n} matrix nodes")));
    }
    let pairs = (n * (n - 1)) as f64;
    let off_diagonal: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).sum();
    let path_sum = match paths {
        PathGraph::Tree => tree_path_sum(tree),
        PathGraph::Complete => complete_graph_path_sum(m),
    };
    Ok(NetworkMetrics {
        mean_dissimilarity: 2.0 * off_diagonal / pairs,
        normalized_tree_length: tree.total_weight() / (n - 1) as f64,
        characterized_path_length: path_sum / pairs,
        non_leaf_nodes: tree.degrees().iter().filter(|&&d| d >= 2).count(),
    })
}
