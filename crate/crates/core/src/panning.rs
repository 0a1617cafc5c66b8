//! Community panning and the regularity verdict.
//!
//! Panning splits a graph at random into two sides and repeatedly replaces
//! the current bipartite block by its minimum-deviation subgraph. Each step
//! is scored by its energy per node, `L / (|X||Y|)`, which equals the drop
//! in density from the block to the selection with the sign flipped; the
//! search stops at the first step that does not lower it, and the nodes of
//! the last accepted block form the community.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{random_split, BipartiteGraph, Graph, SubsetPair};
use crate::qubo::{build_regularity_qubo, Sense};
use crate::rng::{derive_seed, Stream};
use crate::solvers::QuboSolver;

/// Smallest graph [`pan_once`] accepts.
pub const MIN_PAN_NODES: usize = 4;

// stage seeds are drawn from a separate index range than round seeds
const STAGE_SEED_BASE: u64 = 1 << 32;

/// One accepted (or the final rejected) step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanStage {
    pub stage: usize,
    pub n_left: usize,
    pub n_right: usize,
    /// Link density of the block.
    pub density: f64,
    /// Minimum deviation that selected the block (0 for the initial split).
    pub energy: f64,
    pub energy_per_node: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanTrajectory {
    /// Stage 0 is the random split; every later stage was accepted.
    pub stages: Vec<PanStage>,
    /// The step that failed to improve, if the solver produced one.
    pub rejected: Option<PanStage>,
    /// The solver returned an empty selection; the previous block is kept.
    pub aborted: bool,
    /// Node ids of the final block, ascending.
    pub community: Vec<u64>,
}

impl PanTrajectory {
    pub fn final_stage(&self) -> &PanStage {
        self.stages.last().expect("trajectory has the initial stage")
    }
}

fn block_ids(block: &BipartiteGraph) -> Vec<u64> {
    let mut ids: Vec<u64> = block
        .left_ids()
        .iter()
        .chain(block.right_ids())
        .copied()
        .collect();
    ids.sort_unstable();
    ids
}

/// Pans one community out of `g`.
pub fn pan_once(g: &Graph, solver: &dyn QuboSolver, seed: u64) -> Result<PanTrajectory> {
    if g.n() < MIN_PAN_NODES {
        return Err(Error::InvalidParameter(format!(
            "panning needs at least {MIN_PAN_NODES} nodes, got {}",
            g.n()
        )));
    }
    let mut block = random_split(g, seed)?;
    let mut stages = vec![PanStage {
        stage: 0,
        n_left: block.n_left(),
        n_right: block.n_right(),
        density: block.density(),
        energy: 0.0,
        energy_per_node: 0.0,
    }];
    let mut rejected = None;
    let mut aborted = false;

    for step in 1.. {
        let prev = stages.last().expect("non-empty").energy_per_node;
        let q = build_regularity_qubo(&block, Sense::Minimize)?;
        let r = solver.solve_seeded(&q, derive_seed(seed, Stream::Panning, STAGE_SEED_BASE + step))?;
        let sel = SubsetPair::from_assignment(block.n_left(), &r.best.assignment);
        if sel.x_len() == 0 || sel.y_len() == 0 {
            aborted = true;
            break;
        }
        let (nx, ny) = (sel.x_len(), sel.y_len());
        let energy = block.deviation(&sel);
        let candidate = PanStage {
            stage: step as usize,
            n_left: nx,
            n_right: ny,
            density: block.link_density(&sel)?,
            energy,
            energy_per_node: energy / (nx * ny) as f64,
        };
        if candidate.energy_per_node < prev {
            let left: Vec<usize> = sel.x.ones().collect();
            let right: Vec<usize> = sel.y.ones().collect();
            block = block.restrict(&left, &right);
            stages.push(candidate);
        } else {
            rejected = Some(candidate);
            break;
        }
    }
    if aborted {
        log::warn!("solver returned an empty selection; keeping the previous block");
    }
    Ok(PanTrajectory {
        community: block_ids(&block),
        stages,
        rejected,
        aborted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    /// Stop when a round's energy per node rises by more than this fraction
    /// of the previous round's magnitude.
    pub gap_threshold: f64,
    /// Stop when fewer nodes than this remain.
    pub min_size: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            gap_threshold: 0.5,
            min_size: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Fewer than `min_size` nodes remained; they are left unassigned.
    MinSize,
    /// A round returned every remaining node.
    AllRemaining,
    /// The round energy jumped by more than the gap threshold; the remaining
    /// nodes form the last community.
    Gap,
    /// Too few nodes remained to split; they form the last community.
    TooSmall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub energy_per_node: f64,
    pub community_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanAllResult {
    pub communities: Vec<Vec<u64>>,
    pub rounds: Vec<RoundRecord>,
    /// Nodes left unassigned by the `min_size` rule.
    pub residual: Vec<u64>,
    pub stop: StopReason,
}

/// Pans communities out of `g` one at a time, deleting each from the graph,
/// until a stop rule fires.
pub fn pan_all(g: &Graph, solver: &dyn QuboSolver, seed: u64, stop: StopRule) -> Result<PanAllResult> {
    if g.n() == 0 {
        return Err(Error::InvalidParameter("panning needs a non-empty graph".into()));
    }
    let mut current = g.clone();
    let mut communities = Vec::new();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let sorted_ids = |g: &Graph| {
        let mut ids = g.node_ids().to_vec();
        ids.sort_unstable();
        ids
    };

    let reason = loop {
        if current.n() < stop.min_size || current.n() == 0 {
            break StopReason::MinSize;
        }
        if current.n() < MIN_PAN_NODES {
            communities.push(sorted_ids(&current));
            break StopReason::TooSmall;
        }
        let round = rounds.len() + 1;
        let t = pan_once(&current, solver, derive_seed(seed, Stream::Panning, round as u64))?;
        let epn = t.final_stage().energy_per_node;
        let prev = rounds.last().map(|r| r.energy_per_node);
        rounds.push(RoundRecord {
            round,
            energy_per_node: epn,
            community_size: t.community.len(),
        });
        if t.community.len() == current.n() {
            communities.push(t.community);
            break StopReason::AllRemaining;
        }
        if let Some(prev) = prev.filter(|&p| p != 0.0) {
            if (epn - prev) / prev.abs() > stop.gap_threshold {
                communities.push(sorted_ids(&current));
                break StopReason::Gap;
            }
        }
        current = current.remove_nodes(&t.community)?;
        communities.push(t.community);
    };
    Ok(PanAllResult {
        residual: if reason == StopReason::MinSize {
            sorted_ids(&current)
        } else {
            Vec::new()
        },
        communities,
        rounds,
        stop: reason,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    /// Both extrema are global optima.
    #[serde(rename = "exact")]
    Exact,
    /// The extrema come from a heuristic: an irregular verdict is proven by
    /// its witness, a regular one is not.
    #[serde(rename = "lower-bound witness")]
    LowerBoundWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub epsilon: f64,
    #[serde(rename = "minL")]
    pub min_l: f64,
    #[serde(rename = "maxL")]
    pub max_l: f64,
    pub is_regular: bool,
    /// The pair with the largest `|L|` found.
    pub witness: Witness,
    pub kind: VerdictKind,
}

/// Slack for the `max|L| <= eps |A||B|` comparison, absorbing rounding in `L`.
pub const VERDICT_TOLERANCE: f64 = 1e-9;

/// Whether deviations `min_l`, `max_l` make an `n_left` x `n_right` pair
/// epsilon-regular (constant fixed at 1).
pub fn is_regular(min_l: f64, max_l: f64, epsilon: f64, n_left: usize, n_right: usize) -> bool {
    min_l.abs().max(max_l.abs()) <= epsilon * (n_left * n_right) as f64 + VERDICT_TOLERANCE
}

/// Minimizes and maximizes `L` with `solver` and compares against
/// `epsilon |A||B|`.
pub fn check_regularity(g: &BipartiteGraph, epsilon: f64, solver: &dyn QuboSolver) -> Result<RegularityVerdict> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    g.ensure_nonempty_parts()?;
    let nl = g.n_left();
    let lo = solver.solve(&build_regularity_qubo(g, Sense::Minimize)?)?;
    let hi = solver.solve(&build_regularity_qubo(g, Sense::Maximize)?)?;
    let lo_pair = SubsetPair::from_assignment(nl, &lo.best.assignment);
    let hi_pair = SubsetPair::from_assignment(nl, &hi.best.assignment);
    let (min_l, max_l) = (g.deviation(&lo_pair), g.deviation(&hi_pair));
    let (pair, deviation) = if min_l.abs() >= max_l.abs() {
        (lo_pair, min_l)
    } else {
        (hi_pair, max_l)
    };
    Ok(RegularityVerdict {
        epsilon,
        min_l,
        max_l,
        is_regular: is_regular(min_l, max_l, epsilon, nl, g.n_right()),
        witness: Witness {
            x: pair.x.ones().map(|a| g.left_ids()[a]).collect(),
            y: pair.y.ones().map(|b| g.right_ids()[b]).collect(),
            deviation,
        },
        kind: if solver.is_exact() {
            VerdictKind::Exact
        } else {
            VerdictKind::LowerBoundWitness
        },
    })
}

/// `(stage, density)` per stage.
pub fn stage_density_curve(t: &PanTrajectory) -> Vec<(usize, f64)> {
    t.stages.iter().map(|s| (s.stage, s.density)).collect()
}

/// CSV with header `stage,density,energy,energy_per_node`.
pub fn stages_csv(t: &PanTrajectory) -> String {
    let mut out = String::from("stage,density,energy,energy_per_node\n");
    for s in &t.stages {
        let _ = writeln!(out, "{},{},{},{}", s.stage, s.density, s.energy, s.energy_per_node);
    }
    out
}

/// CSV with header `round,energy_per_node,community_size`.
pub fn rounds_csv(r: &PanAllResult) -> String {
    let mut out = String::from("round,energy_per_node,community_size\n");
    for x in &r.rounds {
        let _ = writeln!(out, "{},{},{}", x.round, x.energy_per_node, x.community_size);
    }
    out
}

/// One line of space-separated node ids per community.
pub fn communities_text(communities: &[Vec<u64>]) -> String {
    let mut out = String::new();
    for c in communities {
        let line: Vec<String> = c.iter().map(u64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::brute_min_max_deviation;
    use crate::sbm::{sample_sbm, SbmParams};
    use crate::solvers::{Annealer, Exhaustive, SolverConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bigraph(nl: usize, nr: usize, p: f64, rng: &mut ChaCha8Rng) -> BipartiteGraph {
        let edges: Vec<_> = (0..nl)
            .flat_map(|a| (0..nr).map(move |b| (a, b)))
            .filter(|_| rng.random_bool(p))
            .collect();
        BipartiteGraph::from_edges(nl, nr, edges).unwrap()
    }

    #[test]
    fn complete_and_edgeless_are_regular() {
        let complete = BipartiteGraph::from_matrix(&vec![vec![true; 3]; 4]).unwrap();
        let v = check_regularity(&complete, 0.01, &Exhaustive).unwrap();
        assert!(v.is_regular);
        assert_eq!((v.min_l, v.max_l), (0.0, 0.0));
        assert_eq!(v.kind, VerdictKind::Exact);
        let edgeless = BipartiteGraph::from_edges(3, 3, []).unwrap();
        assert!(check_regularity(&edgeless, 0.01, &Exhaustive).unwrap().is_regular);
        assert!(check_regularity(&edgeless, 0.0, &Exhaustive).is_err());
    }

    #[test]
    fn exhaustive_verdict_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let nl = rng.random_range(1..=7);
            let nr = rng.random_range(1..=14 - nl);
            let g = random_bigraph(nl, nr, 0.5, &mut rng);
            let ext = brute_min_max_deviation(&g).unwrap();
            for eps in [0.02, 0.05, 0.1, 0.2] {
                let v = check_regularity(&g, eps, &Exhaustive).unwrap();
                assert!((v.min_l - ext.min).abs() < 1e-9 && (v.max_l - ext.max).abs() < 1e-9);
                assert_eq!(v.is_regular, is_regular(ext.min, ext.max, eps, nl, nr));
            }
        }
    }

    #[test]
    fn verdict_is_monotone_in_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_bigraph(8, 8, 0.5, &mut rng);
        let verdicts: Vec<bool> = (1..=50)
            .map(|k| check_regularity(&g, k as f64 * 0.01, &Exhaustive).unwrap().is_regular)
            .collect();
        assert!(verdicts.windows(2).all(|w| !w[0] || w[1]));
        let heuristic = check_regularity(&g, 0.1, &Annealer(SolverConfig::default())).unwrap();
        assert_eq!(heuristic.kind, VerdictKind::LowerBoundWitness);
    }

    #[test]
    fn pan_once_contract() {
        let params = SbmParams::new(24, vec![0.5, 0.5], vec![vec![0.9, 0.05], vec![0.05, 0.9]]).unwrap();
        let pg = sample_sbm(&params, 1).unwrap();
        let solver = Annealer(SolverConfig::default());
        let t = pan_once(&pg.graph, &solver, 5).unwrap();
        assert_eq!(t, pan_once(&pg.graph, &solver, 5).unwrap());
        assert_eq!(t.stages[0].density, random_split(&pg.graph, 5).unwrap().density());
        for w in t.stages.windows(2) {
            assert!(w[1].energy_per_node < w[0].energy_per_node);
            assert!(w[1].n_left <= w[0].n_left && w[1].n_right <= w[0].n_right);
        }
        for s in &t.stages[1..] {
            assert!((s.energy_per_node - s.energy / (s.n_left * s.n_right) as f64).abs() < 1e-12);
        }
        if let Some(r) = &t.rejected {
            assert!(r.energy_per_node >= t.final_stage().energy_per_node);
        }
        assert!(pan_once(&Graph::empty(3), &solver, 0).is_err());
    }

    #[test]
    fn complete_graph_pans_to_everything() {
        let n = 12;
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let g = Graph::from_edges(n, edges).unwrap();
        let t = pan_once(&g, &Exhaustive, 3).unwrap();
        assert_eq!(t.stages.len(), 1);
        assert!(t.aborted);
        assert_eq!(t.community, (0..n as u64).collect::<Vec<_>>());
        let all = pan_all(&g, &Exhaustive, 3, StopRule::default()).unwrap();
        assert_eq!(all.communities, vec![(0..n as u64).collect::<Vec<_>>()]);
        assert_eq!(all.stop, StopReason::AllRemaining);
    }

    #[test]
    fn tiny_remainders() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let r = pan_all(&g, &Exhaustive, 0, StopRule::default()).unwrap();
        assert_eq!((r.stop, r.communities.len()), (StopReason::TooSmall, 1));
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let r = pan_all(&g, &Exhaustive, 0, StopRule::default()).unwrap();
        assert_eq!((r.stop, r.residual), (StopReason::MinSize, vec![0, 1]));
    }

    #[test]
    fn csv_outputs() {
        let t = PanTrajectory {
            stages: vec![PanStage {
                stage: 0,
                n_left: 2,
                n_right: 2,
                density: 0.5,
                energy: 0.0,
                energy_per_node: 0.0,
            }],
            rejected: None,
            aborted: false,
            community: vec![0, 1, 2, 3],
        };
        assert_eq!(stages_csv(&t), "stage,density,energy,energy_per_node\n0,0.5,0,0\n");
        assert_eq!(stage_density_curve(&t), vec![(0, 0.5)]);
        assert_eq!(communities_text(&[vec![1, 2], vec![3]]), "1 2\n3\n");
    }
}
