use std::time::Instant;

use rayon::prelude::*;

use super::{
    finish, initial_state, Deadline, FieldState, SolveResult, SolverConfig, SparseRows,
    ENERGY_TOLERANCE,
};
use crate::error::Result;
use crate::qubo::{QuboProblem, Sample};

/// Steepest single-flip descent from `num_restarts` random starts.
pub fn solve_greedy(q: &QuboProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = Deadline::new(start, cfg.time_budget());
    let rows = SparseRows::new(q);

    let runs: Vec<Option<Run>> = (0..cfg.num_restarts as u64)
        .into_par_iter()
        .map(|r| {
            // restart 0 always runs so there is a result even on a zero budget
            if r > 0 && deadline.expired() {
                return None;
            }
            Some(descend_from(q, &rows, initial_state(q.n(), cfg.seed, r)))
        })
        .collect();
    Ok(merge(q, runs, start))
}

/// Outcome of one restart; `cut` marks a restart stopped by the time budget.
pub(crate) struct Run {
    pub(crate) sample: Sample,
    pub(crate) evaluations: u64,
    pub(crate) cut: bool,
}

pub(crate) fn descend_from(q: &QuboProblem, rows: &SparseRows, s: Vec<u8>) -> Run {
    let mut state = FieldState::new(q, rows, s);
    let evaluations = state.descend();
    Run {
        sample: Sample::evaluated(q, state.s),
        evaluations,
        cut: false,
    }
}

/// Picks the best restart (lowest restart index among equals) and builds
/// the result; a restart skipped by the time budget marks it truncated.
pub(crate) fn merge(q: &QuboProblem, runs: Vec<Option<Run>>, start: Instant) -> SolveResult {
    let truncated = runs.iter().any(|r| r.as_ref().is_none_or(|r| r.cut));
    let mut history = Vec::with_capacity(runs.len());
    let mut evaluations = 0;
    let mut best: Option<Sample> = None;
    for Run {
        sample,
        evaluations: evals,
        ..
    } in runs.into_iter().flatten()
    {
        history.push(sample.energy);
        evaluations += evals;
        if best.as_ref().is_none_or(|b| sample.energy < b.energy - ENERGY_TOLERANCE) {
            best = Some(sample);
        }
    }
    let best = best.expect("restart 0 always runs");
    finish(q, best.assignment, history, evaluations, start, truncated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::testutil::random_qubo;

    fn has_improving_flip(q: &QuboProblem, s: &[u8]) -> bool {
        (0..q.n()).any(|i| q.flip_delta(s, i) < -1e-12)
    }

    #[test]
    fn zero_problem() {
        let r = solve_greedy(&QuboProblem::new(6), &SolverConfig::default()).unwrap();
        assert_eq!(r.best.energy, 0.0);
    }

    #[test]
    fn all_ones_minimum_from_any_start() {
        let mut q = QuboProblem::new(8);
        for i in 0..8 {
            q.add_linear(i, -1.0).unwrap();
        }
        for seed in 0..5 {
            let r = solve_greedy(&q, &SolverConfig::default().with_seed(seed)).unwrap();
            assert_eq!(r.best.assignment, vec![1; 8]);
            assert_eq!(r.best.energy, -8.0);
        }
    }

    #[test]
    fn ends_in_local_optimum() {
        for seed in 0..20 {
            let q = random_qubo(30, seed);
            let r = solve_greedy(&q, &SolverConfig::default().with_seed(seed)).unwrap();
            assert!(!has_improving_flip(&q, &r.best.assignment));
            assert_eq!(r.best.energy, q.evaluate(&r.best.assignment));
            assert_eq!(r.energy_history.len(), 10);
            let min = r.energy_history.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!((r.best.energy - min).abs() < 1e-9);
        }
    }
}
