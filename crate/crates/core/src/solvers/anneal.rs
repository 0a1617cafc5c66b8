use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::greedy::{descend_from, merge, Run};
use super::{initial_state, Deadline, FieldState, Schedule, SolveResult, SolverConfig, SparseRows};
use crate::error::Result;
use crate::qubo::{QuboProblem, Sample};
use crate::rng::{stream, Stream};

/// A start temperature at or below this fraction of the largest coefficient
/// is a quench: no uphill move could ever be accepted, so the run is carried
/// out as plain steepest descent from the same start.
pub const QUENCH_RATIO: f64 = 1e-9;

const DRIFT_CHECK_EVERY: usize = 1000;

/// Metropolis single-flip annealing with geometric cooling, one temperature
/// per sweep, `num_restarts` independent restarts and a final steepest
/// descent polish.
pub fn solve_sa(q: &QuboProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    let schedule = cfg.schedule(q)?;
    let start = Instant::now();
    let deadline = Deadline::new(start, cfg.time_budget());
    let rows = SparseRows::new(q);
    let scale = match q.max_abs_coefficient() {
        m if m > 0.0 => m,
        _ => 1.0,
    };
    let quench = schedule.t_start <= QUENCH_RATIO * scale;

    let runs: Vec<Option<Run>> = (0..cfg.num_restarts as u64)
        .into_par_iter()
        .map(|r| {
            if r > 0 && deadline.expired() {
                return None;
            }
            let s0 = initial_state(q.n(), cfg.seed, r);
            Some(if quench {
                descend_from(q, &rows, s0)
            } else {
                anneal(q, &rows, s0, &schedule, cfg.seed, r, &deadline)
            })
        })
        .collect();
    Ok(merge(q, runs, start))
}

fn anneal(
    q: &QuboProblem,
    rows: &SparseRows,
    s0: Vec<u8>,
    schedule: &Schedule,
    seed: u64,
    restart: u64,
    deadline: &Deadline,
) -> Run {
    let n = q.n();
    let mut rng = stream(seed, Stream::Anneal, restart);
    let mut state = FieldState::new(q, rows, s0);
    let mut best = (state.energy, state.s.clone());
    let mut evaluations = 0;
    let mut cut = false;

    for sweep in 0..schedule.sweeps {
        if deadline.expired() {
            cut = true;
            break;
        }
        let beta = 1.0 / schedule.temperature(sweep);
        for i in 0..n {
            let d = state.delta(i);
            if d <= 0.0 || rng.random::<f64>() < (-d * beta).exp() {
                state.flip(i);
            }
        }
        evaluations += n as u64;
        if state.energy < best.0 {
            best.0 = state.energy;
            best.1.copy_from_slice(&state.s);
        }
        if cfg!(debug_assertions) && (sweep + 1) % DRIFT_CHECK_EVERY == 0 {
            let drift = state.field_drift(q);
            debug_assert!(drift < 1e-6, "local fields drifted by {drift}");
        }
    }

    evaluations += state.descend();
    let last = Sample::evaluated(q, state.s);
    let snapshot = Sample::evaluated(q, best.1);
    let sample = if snapshot.energy < last.energy {
        snapshot
    } else {
        last
    };
    Run {
        sample,
        evaluations,
        cut,
    }
}
