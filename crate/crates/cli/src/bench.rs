//! Solver timing sweep.
//!
//! For each size `n` a random bipartite graph with `n / 2` and `n - n / 2`
//! nodes is drawn, its min-deviation QUBO is handed to each solver, and the
//! wall time and best energy are recorded. The exhaustive solver is skipped
//! above its size limit. A solver that hits its time budget is reported as
//! `<name>:truncated`.

use std::fmt::Write as _;
use std::time::Instant;

use regpan::graph::random_bipartite;
use regpan::rng::{derive_seed, Stream};
use regpan::solvers::{SolverConfig, SolverKind, EXHAUSTIVE_LIMIT};
use regpan::{build_regularity_qubo, Error, Result, Sense};
use serde::{Deserialize, Serialize};

/// Agreement required between a reported energy and its recomputation.
const REVALIDATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub solvers: Vec<SolverKind>,
    /// Edge probability of the random graphs.
    pub density: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 12, 16, 20, 24, 32, 48, 64],
            solvers: vec![
                SolverKind::Exhaustive,
                SolverKind::Sa,
                SolverKind::Greedy,
                SolverKind::Decomposed,
            ],
            density: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub size: usize,
    /// Solver name, suffixed with `:truncated` when the budget ran out.
    pub solver: String,
    pub seconds: f64,
    pub best_energy: f64,
}

/// Runs the sweep. Sizes are visited in ascending order without repeats.
pub fn run_bench(
    cfg: &BenchConfig,
    solver_config: &SolverConfig,
    endpoint: Option<&str>,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.first().is_some_and(|&n| n < 2) {
        return Err(Error::InvalidParameter("bench sizes must be at least 2".into()));
    }
    let mut rows = Vec::new();
    for n in sizes {
        let g = random_bipartite(n / 2, n - n / 2, cfg.density, derive_seed(seed, Stream::Generator, n as u64))?;
        let q = build_regularity_qubo(&g, Sense::Minimize)?;
        for &kind in &cfg.solvers {
            if kind == SolverKind::Exhaustive && n > EXHAUSTIVE_LIMIT {
                continue;
            }
            let solver = kind.build(solver_config.clone(), endpoint)?;
            let start = Instant::now();
            let result = solver.solve_seeded(&q, seed)?;
            let seconds = start.elapsed().as_secs_f64();
            let computed = q.energy(&result.best.assignment)?;
            if (computed - result.best.energy).abs() > REVALIDATION_TOLERANCE {
                return Err(Error::EnergyMismatch {
                    index: 0,
                    reported: result.best.energy,
                    computed,
                });
            }
            let mut name = kind.as_str().to_string();
            if result.truncated {
                name.push_str(":truncated");
            }
            rows.push(BenchRow {
                size: n,
                solver: name,
                seconds,
                best_energy: computed,
            });
        }
    }
    Ok(rows)
}

/// CSV with header `size,solver,seconds,best_energy`.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("size,solver,seconds,best_energy\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.6},{}", r.size, r.solver, r.seconds, r.best_energy);
    }
    out
}
