use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::grover::GroverInstance;
use super::phase::{phase_estimate, phase_estimate_grover_fast, GroverOperator, PhaseEstimate};
use super::{check_qubits, uniform_state};
use crate::error::Result;
use crate::graph::BipartiteGraph;
use crate::panning::VERDICT_TOLERANCE;
use crate::rng::{stream, Stream};

/// Phase-register width used when none is given: `ceil(n / 2) + 1` for
/// `n = n1 + n2` search qubits.
///
/// `ceil(n / 2)` alone leaves too much weight on outcome 0 when exactly one
/// pair is irregular (for even `n` the probability of 0 exceeds 0.7), so
/// the test would miss it; one extra bit brings it below 0.21 for every
/// `n` the simulator can hold.
pub fn default_phase_bits(n: usize) -> usize {
    n.div_ceil(2) + 1
}

#[derive(Debug, Clone, Default)]
pub struct ExistenceOptions {
    /// Phase-register width; `None` means [`default_phase_bits`].
    pub m: Option<usize>,
    /// Use the two-dimensional Grover representation instead of the full
    /// state vector. Same distribution, far cheaper.
    pub fast: bool,
    /// Decide from this many sampled measurements instead of the exact
    /// distribution.
    pub shots: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub exists: bool,
    /// `N sin^2(theta_hat / 2)`, indicative only.
    #[serde(rename = "M_estimate")]
    pub m_estimate: f64,
    /// Modal phase folded into `[0, pi]`.
    pub theta_hat: f64,
    pub ops_count: u64,
    #[serde(skip)]
    pub phase_bits: usize,
    /// Probability (or sampled frequency) of outcome 0.
    #[serde(skip)]
    pub p_zero: f64,
    #[serde(skip)]
    pub estimate: PhaseEstimate,
}

/// Oracle bitmap over all subset pairs: entry `x | y << n1` is set when
/// `|L(X, Y)| > epsilon n1 n2`.
pub fn irregular_pairs(g: &BipartiteGraph, epsilon: f64) -> Result<Vec<bool>> {
    g.ensure_nonempty_parts()?;
    let (nl, nr) = (g.n_left(), g.n_right());
    check_qubits(nl + nr)?;
    let mut cols = vec![0u64; nr];
    for (a, b) in g.edges() {
        cols[b] |= 1 << a;
    }
    let total = g.total_edges() as i64;
    let pairs = (nl * nr) as i64;
    let threshold = epsilon * (nl * nr) as f64 + VERDICT_TOLERANCE;
    let left_mask = (1u64 << nl) - 1;
    Ok((0..1u64 << (nl + nr))
        .map(|p| {
            let (x, y) = (p & left_mask, p >> nl);
            let mut e = 0i64;
            let mut rest = y;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                e += (x & cols[b]).count_ones() as i64;
                rest &= rest - 1;
            }
            let scaled = x.count_ones() as i64 * y.count_ones() as i64 * total - pairs * e;
            (scaled as f64 / pairs as f64).abs() > threshold
        })
        .collect())
}

/// Decides whether some subset pair of `g` has `|L| > epsilon n1 n2` by
/// phase estimation of the Grover iterate over all `2^(n1+n2)` pairs.
///
/// If nothing is marked the iterate is the identity and outcome 0 has
/// probability 1; otherwise its eigenphases `+-theta` pull the mass away
/// from 0. The answer is "no irregular pair" exactly when outcome 0 has
/// probability above 1/2.
pub fn quantum_exists_regularity(
    g: &BipartiteGraph,
    epsilon: f64,
    opts: &ExistenceOptions,
) -> Result<ExistenceReport> {
    let n = g.n_left() + g.n_right();
    let m = opts.m.unwrap_or_else(|| default_phase_bits(n));
    check_qubits(n + m)?;
    let marked = irregular_pairs(g, epsilon)?;
    let inst = GroverInstance::from_predicate(n, |p| marked[p])?;
    let estimate = if opts.fast {
        phase_estimate_grover_fast(&inst, m)?
    } else {
        phase_estimate(&GroverOperator(&inst), &uniform_state(n)?, m)?
    };
    let observed = match opts.shots {
        Some(shots) => sample_frequencies(&estimate.distribution, shots, opts.seed),
        None => estimate.distribution.clone(),
    };
    let view = PhaseEstimate {
        m,
        distribution: observed,
        ops_count: estimate.ops_count,
    };
    let p_zero = view.distribution[0];
    let mut theta = view.theta_hat();
    if theta > PI {
        theta = 2.0 * PI - theta;
    }
    Ok(ExistenceReport {
        exists: p_zero <= 0.5,
        m_estimate: (1u64 << n) as f64 * (theta / 2.0).sin().powi(2),
        theta_hat: theta,
        ops_count: estimate.ops_count,
        phase_bits: m,
        p_zero,
        estimate,
    })
}

fn sample_frequencies(dist: &[f64], shots: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Stream::Shots, 0);
    let mut counts = vec![0usize; dist.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut hit = dist.len() - 1;
        for (a, &p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                hit = a;
                break;
            }
        }
        counts[hit] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / shots.max(1) as f64)
        .collect()
}
