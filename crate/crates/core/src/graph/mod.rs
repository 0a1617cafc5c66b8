//! Simple graphs, bipartite graphs and the deviation function
//! `L(X, Y) = |X||Y| d(A, B) - e(X, Y)`.
//!
//! Adjacency is stored one bit per node pair, so `e(X, Y)` is a sum of
//! popcounts over the rows selected by `X`.

mod brute;
pub mod io;

pub use brute::{brute_min_max_deviation, Extrema, BRUTE_FORCE_LIMIT};

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Number of coin-flip rounds tried before a split with an empty side is
/// reported as an error.
pub const MAX_SPLIT_ATTEMPTS: usize = 16;

/// An undirected graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<FixedBitSet>,
    node_ids: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on nodes labelled `0..n`.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![FixedBitSet::with_capacity(n); n],
            node_ids: (0..n as u64).collect(),
        }
    }

    /// Builds a graph on nodes `0..n` from index pairs. Duplicate edges are
    /// merged; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at node {u}")));
            }
            g.adjacency[u].insert(v);
            g.adjacency[v].insert(u);
        }
        Ok(g)
    }

    /// Replaces the external node labels. Labels must be unique.
    pub fn with_ids(mut self, ids: Vec<u64>) -> Result<Self> {
        if ids.len() != self.n() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} nodes",
                ids.len(),
                self.n()
            )));
        }
        let mut seen = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if seen.insert(id, i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate node id {id}")));
            }
        }
        self.node_ids = ids;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[u64] {
        &self.node_ids
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.node_ids.iter().position(|&x| x == id)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(v)
    }

    pub fn neighbors(&self, u: usize) -> &FixedBitSet {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    /// Edge pairs `(u, v)` with `u < v`, by node index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.ones().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Fraction of node pairs that are linked; zero for graphs with fewer
    /// than two nodes.
    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1) / 2) as f64
    }

    /// Subgraph induced by the given node indices (in the given order).
    pub fn induced(&self, indices: &[usize]) -> Graph {
        let k = indices.len();
        let mut adjacency = vec![FixedBitSet::with_capacity(k); k];
        for (i, &u) in indices.iter().enumerate() {
            for (j, &v) in indices.iter().enumerate().skip(i + 1) {
                if self.adjacency[u].contains(v) {
                    adjacency[i].insert(j);
                    adjacency[j].insert(i);
                }
            }
        }
        Graph {
            adjacency,
            node_ids: indices.iter().map(|&u| self.node_ids[u]).collect(),
        }
    }

    /// Induced subgraph on every node except those labelled in `ids`.
    pub fn remove_nodes(&self, ids: &[u64]) -> Result<Graph> {
        let index: HashMap<u64, usize> = self
            .node_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let mut drop = FixedBitSet::with_capacity(self.n());
        for id in ids {
            match index.get(id) {
                Some(&i) => drop.insert(i),
                None => return Err(Error::UnknownNode(*id)),
            }
        }
        let keep: Vec<usize> = (0..self.n()).filter(|&i| !drop.contains(i)).collect();
        Ok(self.induced(&keep))
    }
}

/// A pair of node subsets `X` of the left part and `Y` of the right part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetPair {
    pub x: FixedBitSet,
    pub y: FixedBitSet,
}

impl SubsetPair {
    pub fn empty(n_left: usize, n_right: usize) -> Self {
        Self {
            x: FixedBitSet::with_capacity(n_left),
            y: FixedBitSet::with_capacity(n_right),
        }
    }

    pub fn full(n_left: usize, n_right: usize) -> Self {
        let mut p = Self::empty(n_left, n_right);
        p.x.insert_range(..);
        p.y.insert_range(..);
        p
    }

    pub fn from_indices(n_left: usize, n_right: usize, xs: &[usize], ys: &[usize]) -> Self {
        let mut p = Self::empty(n_left, n_right);
        xs.iter().for_each(|&i| p.x.insert(i));
        ys.iter().for_each(|&j| p.y.insert(j));
        p
    }

    /// Decodes a binary assignment whose first `n_left` entries select left
    /// nodes and whose remaining entries select right nodes.
    pub fn from_assignment(n_left: usize, bits: &[u8]) -> Self {
        let n_right = bits.len() - n_left;
        let mut p = Self::empty(n_left, n_right);
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                if i < n_left {
                    p.x.insert(i);
                } else {
                    p.y.insert(i - n_left);
                }
            }
        }
        p
    }

    pub fn to_assignment(&self) -> Vec<u8> {
        let mut bits = vec![0u8; self.x.len() + self.y.len()];
        self.x.ones().for_each(|i| bits[i] = 1);
        self.y.ones().for_each(|j| bits[self.x.len() + j] = 1);
        bits
    }

    /// The assignment read as an integer, left bits lowest. Only defined for
    /// pairs with at most 64 nodes in total.
    pub fn pattern(&self) -> u64 {
        let shift = self.x.len();
        assert!(shift + self.y.len() <= 64, "pattern needs at most 64 nodes");
        let x: u64 = self.x.ones().map(|i| 1u64 << i).sum();
        let y: u64 = self.y.ones().map(|j| 1u64 << (j + shift)).sum();
        x | y
    }

    pub fn from_pattern(n_left: usize, n_right: usize, pattern: u64) -> Self {
        let mut p = Self::empty(n_left, n_right);
        for i in 0..n_left {
            if pattern >> i & 1 == 1 {
                p.x.insert(i);
            }
        }
        for j in 0..n_right {
            if pattern >> (n_left + j) & 1 == 1 {
                p.y.insert(j);
            }
        }
        p
    }

    pub fn x_len(&self) -> usize {
        self.x.count_ones(..)
    }

    pub fn y_len(&self) -> usize {
        self.y.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_clear() && self.y.is_clear()
    }

    pub fn fits(&self, g: &BipartiteGraph) -> bool {
        self.x.len() == g.n_left() && self.y.len() == g.n_right()
    }
}

/// A bipartite graph `G(A, B)` given by its biadjacency matrix.
///
/// The overall density `d(A, B)` is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    rows: Vec<FixedBitSet>,
    n_right: usize,
    left_ids: Vec<u64>,
    right_ids: Vec<u64>,
    edges: usize,
    density: f64,
}

impl BipartiteGraph {
    /// Builds from `(a, b)` index pairs with `a < n_left`, `b < n_right`.
    /// Left nodes are labelled `0..n_left`, right nodes `n_left..n_left+n_right`.
    pub fn from_edges<I>(n_left: usize, n_right: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rows = vec![FixedBitSet::with_capacity(n_right); n_left];
        for (a, b) in edges {
            if a >= n_left || b >= n_right {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) out of range for a {n_left}x{n_right} bipartite graph"
                )));
            }
            rows[a].insert(b);
        }
        let left_ids = (0..n_left as u64).collect();
        let right_ids = (n_left as u64..(n_left + n_right) as u64).collect();
        Ok(Self::from_parts(rows, n_right, left_ids, right_ids))
    }

    /// Builds from a dense biadjacency matrix (`rows[a][b]`).
    pub fn from_matrix(rows: &[Vec<bool>]) -> Result<Self> {
        let n_right = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_right) {
            return Err(Error::InvalidParameter("ragged biadjacency matrix".into()));
        }
        let edges = rows.iter().enumerate().flat_map(|(a, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, &bit)| bit)
                .map(move |(b, _)| (a, b))
        });
        Self::from_edges(rows.len(), n_right, edges)
    }

    pub fn with_ids(mut self, left_ids: Vec<u64>, right_ids: Vec<u64>) -> Result<Self> {
        if left_ids.len() != self.n_left() || right_ids.len() != self.n_right {
            return Err(Error::InvalidParameter("label count mismatch".into()));
        }
        self.left_ids = left_ids;
        self.right_ids = right_ids;
        Ok(self)
    }

    fn from_parts(
        rows: Vec<FixedBitSet>,
        n_right: usize,
        left_ids: Vec<u64>,
        right_ids: Vec<u64>,
    ) -> Self {
        let edges: usize = rows.iter().map(|r| r.count_ones(..)).sum();
        let pairs = rows.len() * n_right;
        let density = if pairs == 0 {
            0.0
        } else {
            edges as f64 / pairs as f64
        };
        Self {
            rows,
            n_right,
            left_ids,
            right_ids,
            edges,
            density,
        }
    }

    pub fn n_left(&self) -> usize {
        self.rows.len()
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn left_ids(&self) -> &[u64] {
        &self.left_ids
    }

    pub fn right_ids(&self) -> &[u64] {
        &self.right_ids
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    /// Right-neighbourhood of left node `a`.
    pub fn row(&self, a: usize) -> &FixedBitSet {
        &self.rows[a]
    }

    /// `e(A, B)`.
    pub fn total_edges(&self) -> usize {
        self.edges
    }

    /// `d(A, B)`; zero when a part is empty.
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.ones().map(move |b| (a, b)))
    }

    pub fn ensure_nonempty_parts(&self) -> Result<()> {
        if self.n_left() == 0 || self.n_right == 0 {
            return Err(Error::EmptyPart);
        }
        Ok(())
    }

    /// `e(X, Y)`: number of edges with one end in `X` and the other in `Y`.
    ///
    /// # Panics
    ///
    /// If `p` was built for a graph of different part sizes.
    pub fn edge_count(&self, p: &SubsetPair) -> usize {
        assert!(p.fits(self), "subset pair does not match graph part sizes");
        p.x.ones()
            .map(|a| self.rows[a].intersection_count(&p.y))
            .sum()
    }

    /// `d(X, Y) = e(X, Y) / (|X||Y|)`; an error when either subset is empty.
    pub fn link_density(&self, p: &SubsetPair) -> Result<f64> {
        let (nx, ny) = (p.x_len(), p.y_len());
        if nx == 0 || ny == 0 {
            return Err(Error::EmptySubset);
        }
        Ok(self.edge_count(p) as f64 / (nx * ny) as f64)
    }

    /// `L(X, Y) = |X||Y| d(A, B) - e(X, Y)`.
    pub fn deviation(&self, p: &SubsetPair) -> f64 {
        let size = (p.x_len() * p.y_len()) as f64;
        size * self.density - self.edge_count(p) as f64
    }

    /// Sub-block on the given left and right indices, keeping labels.
    pub fn restrict(&self, left: &[usize], right: &[usize]) -> BipartiteGraph {
        let rows = left
            .iter()
            .map(|&a| {
                let mut r = FixedBitSet::with_capacity(right.len());
                for (j, &b) in right.iter().enumerate() {
                    if self.rows[a].contains(b) {
                        r.insert(j);
                    }
                }
                r
            })
            .collect();
        Self::from_parts(
            rows,
            right.len(),
            left.iter().map(|&a| self.left_ids[a]).collect(),
            right.iter().map(|&b| self.right_ids[b]).collect(),
        )
    }
}

/// Fair-coin side assignment for `n` nodes: `true` puts a node in part A.
/// Resamples when a side comes out empty.
pub fn split_sides(n: usize, seed: u64) -> Result<Vec<bool>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "random split needs at least 2 nodes, got {n}"
        )));
    }
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut rng = rng::stream(seed, Stream::Split, attempt as u64);
        let sides: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let left = sides.iter().filter(|&&s| s).count();
        if left > 0 && left < n {
            return Ok(sides);
        }
    }
    Err(Error::DegenerateSplit(MAX_SPLIT_ATTEMPTS))
}

/// Random bipartization: every node joins A or B by a fair coin flip, and
/// only the edges crossing between A and B are kept. The returned graph
/// carries the original node ids as its labels.
pub fn random_split(g: &Graph, seed: u64) -> Result<BipartiteGraph> {
    let sides = split_sides(g.n(), seed)?;
    Ok(bipartize(g, &sides))
}

/// Random bipartite graph `G(n_left, n_right, p)`: every cross pair is linked
/// independently with probability `p`.
pub fn random_bipartite(n_left: usize, n_right: usize, p: f64, seed: u64) -> Result<BipartiteGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng::stream(seed, Stream::Generator, 0);
    let mut edges = Vec::new();
    for a in 0..n_left {
        for b in 0..n_right {
            if rng.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    BipartiteGraph::from_edges(n_left, n_right, edges)
}

/// Bipartite graph of the edges crossing a given side assignment.
pub fn bipartize(g: &Graph, sides: &[bool]) -> BipartiteGraph {
    let left: Vec<usize> = (0..g.n()).filter(|&i| sides[i]).collect();
    let right: Vec<usize> = (0..g.n()).filter(|&i| !sides[i]).collect();
    let rows = left
        .iter()
        .map(|&u| {
            let mut r = FixedBitSet::with_capacity(right.len());
            for (j, &v) in right.iter().enumerate() {
                if g.has_edge(u, v) {
                    r.insert(j);
                }
            }
            r
        })
        .collect();
    BipartiteGraph::from_parts(
        rows,
        right.len(),
        left.iter().map(|&u| g.node_ids[u]).collect(),
        right.iter().map(|&v| g.node_ids[v]).collect(),
    )
}
