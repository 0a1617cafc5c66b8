use std::time::Instant;

use rayon::prelude::*;

use super::{finish, FieldState, SolveResult, SparseRows, ENERGY_TOLERANCE};
use crate::error::{Error, Result};
use crate::qubo::QuboProblem;

/// Largest problem [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 24;

// Assignments are split into 2^CHUNK_BITS chunks by their top bits; each
// chunk walks its low bits in Gray-code order so one flip separates
// consecutive states.
const CHUNK_BITS: usize = 6;

/// Global minimum by enumerating all `2^n` assignments. Among optimal
/// assignments (within 1e-9) the lowest binary integer wins.
pub fn solve_exhaustive(q: &QuboProblem) -> Result<SolveResult> {
    let start = Instant::now();
    let n = q.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeGuard {
            size: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let high = n.min(CHUNK_BITS);
    let low = n - high;
    let rows = SparseRows::new(q);

    let scan_chunk = |chunk: u64| -> (f64, u64) {
        let s: Vec<u8> = (0..n)
            .map(|i| if i >= low { (chunk >> (i - low) & 1) as u8 } else { 0 })
            .collect();
        let mut state = FieldState::new(q, &rows, s);
        let base = chunk << low;
        let mut best = (state.energy, base);
        for k in 1u64..1 << low {
            state.flip(k.trailing_zeros() as usize);
            let idx = base | (k ^ (k >> 1));
            if state.energy < best.0 - ENERGY_TOLERANCE
                || (state.energy <= best.0 + ENERGY_TOLERANCE && idx < best.1)
            {
                best = (state.energy, idx);
            }
        }
        best
    };

    let (_, idx) = (0..1u64 << high)
        .into_par_iter()
        .map(scan_chunk)
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                if b.0 < a.0 - ENERGY_TOLERANCE || (b.0 <= a.0 + ENERGY_TOLERANCE && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let assignment = (0..n).map(|i| (idx >> i & 1) as u8).collect();
    let result = finish(q, assignment, Vec::new(), 1 << n, start, false);
    let energy = result.best.energy;
    Ok(SolveResult {
        energy_history: vec![energy],
        ..result
    })
}
