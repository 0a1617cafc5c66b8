//! Stochastic block models: sampling, the assortativity check that panning
//! relies on, and the corner oracle for the expected deviation.
//!
//! A model `SBM(n, k, P, D)` draws each node label independently from `P`
//! and links each unordered pair `{u, v}` with probability `D[σu][σv]`.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream, Stream};

/// Largest community count accepted by [`expected_l_corner_min`].
pub const CORNER_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

impl SbmParams {
    pub fn new(n: usize, p: Vec<f64>, d: Vec<Vec<f64>>) -> Result<Self> {
        let params = Self { n, k: p.len(), p, d };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.p.len() != self.k {
            return bad(format!("P has {} entries for k = {}", self.p.len(), self.k));
        }
        if self.d.len() != self.k || self.d.iter().any(|r| r.len() != self.k) {
            return bad(format!("D must be {0}x{0}", self.k));
        }
        if self.p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return bad("P entries must lie in [0, 1]".into());
        }
        let total: f64 = self.p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("P sums to {total}, not 1"));
        }
        for i in 0..self.k {
            for j in 0..self.k {
                if !(0.0..=1.0).contains(&self.d[i][j]) {
                    return bad(format!("D[{i}][{j}] is outside [0, 1]"));
                }
                if self.d[i][j] != self.d[j][i] {
                    return bad(format!("D is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(())
    }
}

/// A sampled graph with its true labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGraph {
    pub graph: Graph,
    /// Community of each node index, in `0..k`.
    pub labels: Vec<usize>,
    pub k: usize,
}

impl PlantedGraph {
    /// Node indices of community `c`.
    pub fn community(&self, c: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&u| self.labels[u] == c).collect()
    }

    /// Node ids of community `c`.
    pub fn community_ids(&self, c: usize) -> Vec<u64> {
        let ids = self.graph.node_ids();
        self.community(c).into_iter().map(|u| ids[u]).collect()
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Empirical link density between (and within) communities; `None`
    /// where there are no node pairs.
    pub fn block_densities(&self) -> Vec<Vec<Option<f64>>> {
        let sizes = self.community_sizes();
        let mut edges = vec![vec![0usize; self.k]; self.k];
        for (u, v) in self.graph.edges() {
            let (a, b) = (self.labels[u], self.labels[v]);
            edges[a][b] += 1;
            if a != b {
                edges[b][a] += 1;
            }
        }
        (0..self.k)
            .map(|a| {
                (0..self.k)
                    .map(|b| {
                        let pairs = if a == b {
                            sizes[a] * sizes[a].saturating_sub(1) / 2
                        } else {
                            sizes[a] * sizes[b]
                        };
                        (pairs > 0).then(|| edges[a][b] as f64 / pairs as f64)
                    })
                    .collect()
            })
            .collect()
    }

    /// The `node label` file, one line per node.
    pub fn labels_text(&self) -> String {
        let mut out = String::new();
        for (id, l) in self.graph.node_ids().iter().zip(&self.labels) {
            let _ = writeln!(out, "{id} {l}");
        }
        out
    }
}

/// Parses a `node label` file.
pub fn parse_labels(text: &str) -> Result<Vec<(u64, usize)>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(ln, l)| {
            let mut toks = l.split_whitespace();
            let mut next = |what: &str| {
                toks.next()
                    .ok_or_else(|| Error::parse(ln, format!("missing {what}")))
            };
            let node = next("node")?;
            let label = next("label")?;
            let node = node
                .parse()
                .map_err(|_| Error::parse(ln, format!("invalid node `{node}`")))?;
            let label = label
                .parse()
                .map_err(|_| Error::parse(ln, format!("invalid label `{label}`")))?;
            Ok((node, label))
        })
        .collect()
}

/// Draws a planted graph; deterministic per seed.
pub fn sample_sbm(params: &SbmParams, seed: u64) -> Result<PlantedGraph> {
    params.validate()?;
    let mut rng = stream(seed, Stream::Sbm, 0);
    let labels: Vec<usize> = (0..params.n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (c, &p) in params.p.iter().enumerate() {
                acc += p;
                if u < acc {
                    return c;
                }
            }
            // u landed in the rounding gap above the last partial sum
            params.p.iter().rposition(|&p| p > 0.0).unwrap_or(0)
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..params.n {
        for v in u + 1..params.n {
            if rng.random::<f64>() < params.d[labels[u]][labels[v]] {
                edges.push((u, v));
            }
        }
    }
    Ok(PlantedGraph {
        graph: Graph::from_edges(params.n, edges)?,
        labels,
        k: params.k,
    })
}

/// Outcome of the assortativity check: every community must be strictly
/// denser inside than the graph as a whole.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition4 {
    pub holds: bool,
    pub graph_density: f64,
    /// `D_ii - d(G)` per community; `None` when the community has fewer
    /// than two nodes and its internal density is undefined.
    pub margins: Vec<Option<f64>>,
    /// Communities with exactly one node. Empty communities are ignored.
    pub flagged: Vec<usize>,
}

/// Checks the condition on empirical densities.
pub fn check_condition4(pg: &PlantedGraph) -> Condition4 {
    let sizes = pg.community_sizes();
    let mut internal = vec![0usize; pg.k];
    for (u, v) in pg.graph.edges() {
        if pg.labels[u] == pg.labels[v] {
            internal[pg.labels[u]] += 1;
        }
    }
    let dg = pg.graph.density();
    let margins: Vec<Option<f64>> = (0..pg.k)
        .map(|c| {
            let s = sizes[c];
            (s >= 2).then(|| internal[c] as f64 / (s * (s - 1) / 2) as f64 - dg)
        })
        .collect();
    let flagged: Vec<usize> = (0..pg.k).filter(|&c| sizes[c] == 1).collect();
    let holds = flagged.is_empty()
        && margins.iter().any(Option::is_some)
        && margins.iter().flatten().all(|&m| m > 0.0);
    Condition4 {
        holds,
        graph_density: dg,
        margins,
        flagged,
    }
}

/// The expected deviation over community-wise selections.
///
/// `a[i]` and `b[i]` are the sizes of community `i` on the two sides of a
/// split and `d` the expected density between the sides. Selecting `x[i]`
/// of the `a[i]` and `y[i]` of the `b[i]` nodes has expected deviation
/// `sum_ij x_i y_j (d - D_ij)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedLInstance {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "D")]
    pub dm: Vec<Vec<f64>>,
    pub d: f64,
}

impl ExpectedLInstance {
    /// Builds an instance with `d` set to the expected cross density.
    pub fn new(a: Vec<f64>, b: Vec<f64>, dm: Vec<Vec<f64>>) -> Result<Self> {
        let k = a.len();
        if b.len() != k || dm.len() != k || dm.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParameter("inconsistent community count".into()));
        }
        if a.iter().chain(&b).any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter("negative community size".into()));
        }
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        if sa == 0.0 || sb == 0.0 {
            return Err(Error::EmptyPart);
        }
        let mut cross = 0.0;
        for i in 0..k {
            for j in 0..k {
                cross += a[i] * b[j] * dm[i][j];
            }
        }
        Ok(Self {
            d: cross / (sa * sb),
            a,
            b,
            dm,
        })
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let k = self.k();
        let mut v = 0.0;
        for i in 0..k {
            for j in 0..k {
                v += x[i] * y[j] * (self.d - self.dm[i][j]);
            }
        }
        v
    }

    /// Value of the corner that selects whole communities `set` on both sides.
    pub fn corner_value(&self, set: &[usize]) -> f64 {
        let mut v = 0.0;
        for &i in set {
            for &j in set {
                v += self.a[i] * self.b[j] * (self.d - self.dm[i][j]);
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerMin {
    /// Selected communities, ascending.
    pub subset: Vec<usize>,
    pub value: f64,
}

/// Minimum of the expected deviation over the `2^k` corners
/// `(x_i, y_i) in {(0, 0), (a_i, b_i)}`, including the empty and full
/// selections. Ties (within 1e-12) go to the lexicographically smallest
/// index list.
pub fn expected_l_corner_min(inst: &ExpectedLInstance) -> Result<CornerMin> {
    let k = inst.k();
    if k > CORNER_LIMIT {
        return Err(Error::SizeGuard {
            size: k,
            limit: CORNER_LIMIT,
        });
    }
    let mut best = CornerMin {
        subset: Vec::new(),
        value: 0.0,
    };
    for mask in 1u32..1 << k {
        let subset: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let value = inst.corner_value(&subset);
        let tol = 1e-12 * value.abs().max(best.value.abs()).max(1.0);
        if value < best.value - tol || (value <= best.value + tol && subset < best.subset) {
            best = CornerMin { subset, value };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub jaccard: f64,
    pub exact: bool,
}

/// Jaccard similarity of two node-id sets (two empty sets count as equal).
pub fn community_overlap(found: &[u64], planted: &[u64]) -> Overlap {
    use std::collections::BTreeSet;
    let f: BTreeSet<_> = found.iter().collect();
    let p: BTreeSet<_> = planted.iter().collect();
    let union = f.union(&p).count();
    let inter = f.intersection(&p).count();
    Overlap {
        jaccard: if union == 0 { 1.0 } else { inter as f64 / union as f64 },
        exact: f == p,
    }
}
