//! Fixtures shared by the benchmarks.

use regpan::graph::random_bipartite;
use regpan::{build_regularity_qubo, QuboProblem, Sense};

/// Min-deviation QUBO of a seeded `G(n / 2, n - n / 2, 0.5)`.
pub fn regularity_instance(n: usize, seed: u64) -> QuboProblem {
    let g = random_bipartite(n / 2, n - n / 2, 0.5, seed).expect("valid probability");
    build_regularity_qubo(&g, Sense::Minimize).expect("non-empty parts")
}
