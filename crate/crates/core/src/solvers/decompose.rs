use std::time::Instant;

use rand::Rng;

use super::{
    finish, solve_greedy, Deadline, FieldState, QuboSolver, SolveResult, SolverConfig, SparseRows,
    ENERGY_TOLERANCE,
};
use crate::error::Result;
use crate::qubo::QuboProblem;
use crate::rng::{derive_seed, stream, Stream};

const MAX_PASSES: u64 = 1000;
// inner-solver seeds live in a separate index range from the pass orderings
const INNER_SEED_BASE: u64 = 1 << 40;

/// Large-neighbourhood search in the style of qbsolv.
///
/// Starting from the greedy incumbent, each pass ranks the variables by the
/// magnitude of their flip delta (random tie-break), slides a window of
/// `subproblem_size` over the ranking with half-window stride, and lets
/// `inner` re-optimize each window with everything else clamped. A window
/// solution is kept unless it is worse. The search stops after a pass that
/// does not lower the energy, or when the time budget runs out.
///
/// `energy_history` holds the incumbent energy before the first pass and
/// after every pass, so it is non-increasing.
pub fn solve_decomposed(
    q: &QuboProblem,
    cfg: &SolverConfig,
    inner: &dyn QuboSolver,
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = q.n();
    let size = cfg.subproblem_size;
    if n <= size {
        return inner.solve_seeded(q, cfg.seed);
    }
    let start = Instant::now();
    let deadline = Deadline::new(start, cfg.time_budget());
    let rows = SparseRows::new(q);

    let incumbent = solve_greedy(q, cfg)?;
    let mut evaluations = incumbent.evaluations;
    let mut truncated = incumbent.truncated;
    let mut state = FieldState::new(q, &rows, incumbent.best.assignment);
    let mut history = vec![state.energy];
    let stride = (size / 2).max(1);

    'passes: for pass in 0..MAX_PASSES {
        let before = state.energy;
        let mut rng = stream(cfg.seed, Stream::Decompose, pass);
        let mut order: Vec<(f64, u64, usize)> = (0..n)
            .map(|i| (state.delta(i).abs(), rng.random::<u64>(), i))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        evaluations += n as u64;

        let mut offset = 0;
        for window_index in 0.. {
            if deadline.expired() {
                truncated = true;
                history.push(state.energy);
                break 'passes;
            }
            let lo = offset.min(n - size);
            let window: Vec<usize> = order[lo..lo + size].iter().map(|t| t.2).collect();
            let sub = clamp(q, &state, &window);
            let current: Vec<u8> = window.iter().map(|&v| state.s[v]).collect();
            let current_energy = sub.evaluate(&current);
            let seed = derive_seed(
                cfg.seed,
                Stream::Decompose,
                INNER_SEED_BASE | pass << 20 | window_index,
            );
            let r = inner.solve_seeded(&sub, seed)?;
            evaluations += r.evaluations;
            if r.best.energy <= current_energy + ENERGY_TOLERANCE * 1e-3 {
                for (k, &v) in window.iter().enumerate() {
                    if state.s[v] != r.best.assignment[k] {
                        state.flip(v);
                    }
                }
            }
            if lo + size >= n {
                break;
            }
            offset += stride;
        }
        // resynchronize the running energy to keep rounding from piling up
        state.energy = q.evaluate(&state.s);
        history.push(state.energy);
        if state.energy >= before - ENERGY_TOLERANCE {
            break;
        }
    }
    Ok(finish(q, state.s, history, evaluations, start, truncated))
}

/// The problem over `window` with every other variable fixed at its value
/// in `state`; its energies equal full-problem energies.
fn clamp(q: &QuboProblem, state: &FieldState, window: &[usize]) -> QuboProblem {
    let m = window.len();
    let mut sub = QuboProblem::new(m);
    let mut rest = state.s.clone();
    for &v in window {
        rest[v] = 0;
    }
    sub.set_offset(q.evaluate(&rest));
    for (a, &va) in window.iter().enumerate() {
        let inside: f64 = window
            .iter()
            .filter(|&&vb| state.s[vb] != 0)
            .map(|&vb| q.quadratic(va, vb))
            .sum();
        sub.add_linear(a, state.fields[va] - inside)
            .expect("window index in range");
        for (b, &vb) in window.iter().enumerate().skip(a + 1) {
            sub.add_quadratic(a, b, q.quadratic(va, vb))
                .expect("window index in range");
        }
    }
    sub
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::testutil::random_qubo;
    use crate::solvers::{solve_exhaustive, Exhaustive};

    #[test]
    fn clamped_energies_match() {
        let q = random_qubo(15, 2);
        let rows = SparseRows::new(&q);
        let s = crate::solvers::initial_state(15, 1, 0);
        let state = FieldState::new(&q, &rows, s.clone());
        let window = [3, 7, 0, 11];
        let sub = clamp(&q, &state, &window);
        for idx in 0..16u8 {
            let mut full = s.clone();
            let part: Vec<u8> = (0..4).map(|k| idx >> k & 1).collect();
            for (k, &v) in window.iter().enumerate() {
                full[v] = part[k];
            }
            assert!((sub.evaluate(&part) - q.evaluate(&full)).abs() < 1e-9);
        }
    }

    #[test]
    fn small_problems_delegate() {
        let q = random_qubo(8, 1);
        let cfg = SolverConfig::default();
        let d = solve_decomposed(&q, &cfg, &Exhaustive).unwrap();
        let e = solve_exhaustive(&q).unwrap();
        assert_eq!(d.best, e.best);
        assert_eq!(d.energy_history, e.energy_history);
    }

    #[test]
    fn passes_never_get_worse() {
        for seed in 0..10 {
            let q = random_qubo(40, seed);
            let cfg = SolverConfig {
                subproblem_size: 10,
                ..SolverConfig::default().with_seed(seed)
            };
            let r = solve_decomposed(&q, &cfg, &Exhaustive).unwrap();
            assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-9));
            let greedy = solve_greedy(&q, &cfg).unwrap();
            assert!(r.best.energy <= greedy.best.energy + 1e-9);
            assert_eq!(r.best.energy, q.evaluate(&r.best.assignment));
        }
    }
}
