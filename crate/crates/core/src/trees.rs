//! Labelled spanning trees over small point sets and the geometry used to
//! compare a query point against a tree.
//!
//! A complete graph on `gamma` points has `gamma^(gamma-2)` spanning trees
//! (Cayley). They are enumerated by decoding every Prüfer sequence of length
//! `gamma - 2` in lexicographic order, so tree `k` of an enumeration is always
//! the same tree for the same node order.

use std::sync::Arc;

use thiserror::Error;

use crate::numeric::distance;

/// Largest neighbourhood enumerated unless the caller raises the cap
/// (`6^4 = 1296` trees).
pub const DEFAULT_MAX_GAMMA: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("a spanning tree needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("gamma {gamma} above enumeration cap {cap}")]
    GammaAboveCap { gamma: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Prüfer sequence for {gamma} nodes needs {expected} entries, got {found}")]
    SequenceLength {
        gamma: usize,
        expected: usize,
        found: usize,
    },
    #[error("Prüfer entry {entry} out of range for {gamma} nodes")]
    EntryOutOfRange { entry: usize, gamma: usize },
    #[error("edge list is not a spanning tree on {0} nodes")]
    NotSpanning(usize),
}

/// A tree vertex: the source instance id and its feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub features: Vec<f64>,
}

impl TreeNode {
    pub fn new(id: usize, features: Vec<f64>) -> Self {
        Self { id, features }
    }
}

/// A spanning tree over a shared node set. Edges are index pairs `(i, j)` with
/// `i < j` into `nodes`; `edge_lengths[k]` is the Euclidean length of
/// `edges[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTree {
    nodes: Arc<[TreeNode]>,
    edges: Vec<(usize, usize)>,
    edge_lengths: Vec<f64>,
    weight_sum: f64,
}

impl LabeledTree {
    /// Builds a tree from an explicit edge list, checking that it spans the
    /// nodes without cycles.
    pub fn from_edges(
        nodes: Arc<[TreeNode]>,
        edges: &[(usize, usize)],
    ) -> Result<Self, TreeError> {
        let n = nodes.len();
        if n < 2 {
            return Err(TreeError::TooFewNodes(n));
        }
        check_dimensions(&nodes)?;
        if !is_spanning_tree(n, edges) {
            return Err(TreeError::NotSpanning(n));
        }
        let edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let lengths = edges
            .iter()
            .map(|&(i, j)| distance(&nodes[i].features, &nodes[j].features))
            .collect();
        Ok(Self::assemble(nodes, edges, lengths))
    }

    fn assemble(nodes: Arc<[TreeNode]>, edges: Vec<(usize, usize)>, edge_lengths: Vec<f64>) -> Self {
        let weight_sum = edge_lengths.iter().sum();
        Self {
            nodes,
            edges,
            edge_lengths,
            weight_sum,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node_ids(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    /// Sum of the edge lengths.
    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn dimension(&self) -> usize {
        self.nodes[0].features.len()
    }

    /// Edge lengths sorted ascending.
    pub fn sorted_edge_lengths(&self) -> Vec<f64> {
        let mut lengths = self.edge_lengths.clone();
        lengths.sort_by(f64::total_cmp);
        lengths
    }
}

fn check_dimensions(nodes: &[TreeNode]) -> Result<(), TreeError> {
    let expected = nodes[0].features.len();
    for node in nodes {
        if node.features.len() != expected {
            return Err(TreeError::DimensionMismatch {
                expected,
                found: node.features.len(),
            });
        }
    }
    Ok(())
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// True when `edges` has `n - 1` in-range edges, no self loop and no cycle.
pub fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 || edges.len() != n - 1 {
        return false;
    }
    let mut sets = DisjointSet::new(n);
    edges
        .iter()
        .all(|&(a, b)| a < n && b < n && a != b && sets.union(a, b))
}

/// Decodes a Prüfer sequence into the edges of a labelled tree on `gamma`
/// nodes. Edges come out as `(min, max)` pairs in decoding order.
pub fn decode_pruefer(seq: &[usize], gamma: usize) -> Result<Vec<(usize, usize)>, TreeError> {
    if gamma < 2 {
        return Err(TreeError::TooFewNodes(gamma));
    }
    if seq.len() != gamma - 2 {
        return Err(TreeError::SequenceLength {
            gamma,
            expected: gamma - 2,
            found: seq.len(),
        });
    }
    if let Some(&entry) = seq.iter().find(|&&e| e >= gamma) {
        return Err(TreeError::EntryOutOfRange { entry, gamma });
    }
    let mut degree = vec![1usize; gamma];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(gamma - 1);
    for &x in seq {
        let leaf = (0..gamma).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf.min(x), leaf.max(x)));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let mut rest = (0..gamma).filter(|&v| degree[v] == 1);
    let (u, v) = (rest.next().unwrap(), rest.next().unwrap());
    edges.push((u, v));
    Ok(edges)
}

/// Every Prüfer sequence of length `gamma - 2`, lexicographically.
fn pruefer_sequences(gamma: usize) -> impl Iterator<Item = Vec<usize>> {
    let len = gamma.saturating_sub(2);
    let total = gamma.pow(len as u32);
    (0..total).map(move |mut code| {
        let mut seq = vec![0usize; len];
        for slot in seq.iter_mut().rev() {
            *slot = code % gamma;
            code /= gamma;
        }
        seq
    })
}

/// All `gamma^(gamma-2)` spanning trees over `points`, using the default cap.
pub fn enumerate_spanning_trees(points: &[TreeNode]) -> Result<Vec<LabeledTree>, TreeError> {
    enumerate_spanning_trees_capped(points, DEFAULT_MAX_GAMMA)
}

pub fn enumerate_spanning_trees_capped(
    points: &[TreeNode],
    max_gamma: usize,
) -> Result<Vec<LabeledTree>, TreeError> {
    let gamma = points.len();
    if gamma < 2 {
        return Err(TreeError::TooFewNodes(gamma));
    }
    if gamma > max_gamma {
        return Err(TreeError::GammaAboveCap {
            gamma,
            cap: max_gamma,
        });
    }
    check_dimensions(points)?;
    let nodes: Arc<[TreeNode]> = points.to_vec().into();
    let mut pairwise = vec![0.0; gamma * gamma];
    for i in 0..gamma {
        for j in i + 1..gamma {
            pairwise[i * gamma + j] = distance(&nodes[i].features, &nodes[j].features);
        }
    }
    pruefer_sequences(gamma)
        .map(|seq| {
            let edges = decode_pruefer(&seq, gamma)?;
            let lengths = edges.iter().map(|&(i, j)| pairwise[i * gamma + j]).collect();
            Ok(LabeledTree::assemble(Arc::clone(&nodes), edges, lengths))
        })
        .collect()
}

/// Distance from a point to one edge, and whether the perpendicular foot fell
/// on the segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDistance {
    pub distance: f64,
    pub projected: bool,
}

/// Distance from `z` to the segment `xi`–`xj`.
///
/// With `t = (xj - xi)ᵀ(z - xi) / ‖xj - xi‖²`, the distance is that to the
/// foot `xi + t (xj - xi)` when `0 <= t <= 1`, otherwise the nearer endpoint.
/// A zero-length edge falls back to the endpoint distance. The endpoints are
/// put in a canonical order first so the result is exactly symmetric.
pub fn point_to_edge_distance(z: &[f64], xi: &[f64], xj: &[f64]) -> Result<EdgeDistance, TreeError> {
    for other in [xi, xj] {
        if other.len() != z.len() {
            return Err(TreeError::DimensionMismatch {
                expected: z.len(),
                found: other.len(),
            });
        }
    }
    Ok(edge_distance(z, xi, xj))
}

pub(crate) fn edge_distance(z: &[f64], xi: &[f64], xj: &[f64]) -> EdgeDistance {
    let (a, b) = if lexicographic_le(xi, xj) { (xi, xj) } else { (xj, xi) };
    let mut len2 = 0.0;
    let mut dot = 0.0;
    for k in 0..z.len() {
        let d = b[k] - a[k];
        len2 += d * d;
        dot += d * (z[k] - a[k]);
    }
    if len2 == 0.0 {
        return EdgeDistance {
            distance: distance(z, a),
            projected: false,
        };
    }
    let t = dot / len2;
    if (0.0..=1.0).contains(&t) {
        let mut sq = 0.0;
        for k in 0..z.len() {
            let r = (z[k] - a[k]) - t * (b[k] - a[k]);
            sq += r * r;
        }
        EdgeDistance {
            distance: sq.sqrt(),
            projected: true,
        }
    } else {
        EdgeDistance {
            distance: distance(z, a).min(distance(z, b)),
            projected: false,
        }
    }
}

fn lexicographic_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    true
}

/// Per-edge distances from a point to a tree and their minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeDistance {
    pub per_edge: Vec<f64>,
    pub min_dist: f64,
}

impl TreeDistance {
    pub(crate) fn from_per_edge(per_edge: Vec<f64>) -> Self {
        let min_dist = per_edge.iter().copied().fold(f64::INFINITY, f64::min);
        Self { per_edge, min_dist }
    }
}

pub fn point_to_tree_distance(z: &[f64], h: &LabeledTree) -> Result<TreeDistance, TreeError> {
    if z.len() != h.dimension() {
        return Err(TreeError::DimensionMismatch {
            expected: h.dimension(),
            found: z.len(),
        });
    }
    let nodes = h.nodes();
    let per_edge = h
        .edges()
        .iter()
        .map(|&(i, j)| edge_distance(z, &nodes[i].features, &nodes[j].features).distance)
        .collect();
    Ok(TreeDistance::from_per_edge(per_edge))
}

/// Distances from one query to every edge of the complete graph on a node set.
/// Trees enumerated over the same nodes share these, so each edge is measured
/// once per query.
pub(crate) struct EdgeDistanceTable {
    gamma: usize,
    table: Vec<f64>,
}

impl EdgeDistanceTable {
    pub(crate) fn new(z: &[f64], nodes: &[TreeNode]) -> Self {
        let gamma = nodes.len();
        let mut table = vec![0.0; gamma * gamma];
        for i in 0..gamma {
            for j in i + 1..gamma {
                table[i * gamma + j] = edge_distance(z, &nodes[i].features, &nodes[j].features).distance;
            }
        }
        Self { gamma, table }
    }

    pub(crate) fn tree_distance(&self, h: &LabeledTree) -> TreeDistance {
        let per_edge = h
            .edges()
            .iter()
            .map(|&(i, j)| self.table[i * self.gamma + j])
            .collect();
        TreeDistance::from_per_edge(per_edge)
    }
}

/// Boundary threshold of a tree: the edge length at index
/// `min(floor(alpha * n), n - 1)` of the ascending lengths. `alpha = 0.5`
/// gives the median for an odd edge count.
pub fn tree_threshold(h: &LabeledTree, boundary_alpha: f64) -> f64 {
    threshold_of_sorted(&h.sorted_edge_lengths(), boundary_alpha)
}

pub(crate) fn quantile_index(alpha: f64, n: usize) -> usize {
    ((alpha * n as f64).floor() as usize).min(n - 1)
}

pub(crate) fn threshold_of_sorted(sorted: &[f64], alpha: f64) -> f64 {
    sorted[quantile_index(alpha, sorted.len())]
}
