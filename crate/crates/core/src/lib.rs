//! Regularity checking and community detection on graphs through
//! quadratic binary optimization.
//!
//! The central quantity is the deviation of a subset pair `(X, Y)` of a
//! bipartite graph with parts `A`, `B`:
//! `L(X, Y) = |X||Y| d(A, B) - e(X, Y)`.
//! Minimizing `L` finds an unusually dense subgraph, maximizing it an
//! unusually sparse one. [`qubo::build_regularity_qubo`] turns this into a
//! QUBO, [`solvers`] minimizes QUBOs, and [`panning`] repeats the search on
//! shrinking subgraphs to peel off communities. [`qsim`] holds a small
//! state-vector simulator for the Grover and phase-estimation based
//! existence test.

pub mod error;
pub mod graph;
pub mod panning;
pub mod qsim;
pub mod qubo;
pub mod rng;
pub mod sbm;
pub mod solvers;

pub use error::{Error, ErrorClass, Result};
pub use graph::{BipartiteGraph, Graph, SubsetPair};
pub use qubo::{build_regularity_qubo, QuboProblem, Sample, Sense};
