//! QUBO solver backends.
//!
//! All backends minimize. They share [`SolverConfig`] and return a
//! [`SolveResult`] whose best energy is always re-evaluated from scratch, so
//! incremental bookkeeping errors can never leak into reported numbers.

mod anneal;
mod decompose;
mod exhaustive;
mod greedy;
pub mod remote;

use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{QuboProblem, Sample};
use crate::rng::{self, Stream, DEFAULT_SEED};

pub use anneal::solve_sa;
pub use decompose::solve_decomposed;
pub use exhaustive::{solve_exhaustive, EXHAUSTIVE_LIMIT};
pub use greedy::solve_greedy;
pub use remote::solve_remote;

/// Energies closer than this are treated as equal when breaking ties.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    pub num_restarts: usize,
    pub sweeps: usize,
    /// Initial annealing temperature; `None` means `max|coefficient| * n`.
    pub t_start: Option<f64>,
    /// Final annealing temperature; `None` means `1e-3 * max|coefficient|`.
    pub t_end: Option<f64>,
    pub subproblem_size: usize,
    pub time_budget_ms: Option<u64>,
    /// Samples requested from a remote solver.
    pub num_reads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            num_restarts: 10,
            sweeps: 1000,
            t_start: None,
            t_end: None,
            subproblem_size: 12,
            time_budget_ms: None,
            num_reads: 100,
        }
    }
}

/// A resolved geometric cooling schedule: `T_k = t_start * ratio^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_start: f64,
    pub t_end: f64,
    pub ratio: f64,
    pub sweeps: usize,
}

impl Schedule {
    pub fn temperature(&self, sweep: usize) -> f64 {
        self.t_start * self.ratio.powi(sweep as i32)
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.num_restarts == 0 {
            return bad("num_restarts must be at least 1");
        }
        if self.sweeps == 0 {
            return bad("sweeps must be at least 1");
        }
        if self.subproblem_size < 2 {
            return bad("subproblem_size must be at least 2");
        }
        if self.num_reads == 0 {
            return bad("num_reads must be at least 1");
        }
        for t in [self.t_start, self.t_end].into_iter().flatten() {
            if !(t.is_finite() && t > 0.0) {
                return bad("temperatures must be positive and finite");
            }
        }
        Ok(())
    }

    /// The cooling schedule for `q`, filling in the defaults.
    pub fn schedule(&self, q: &QuboProblem) -> Result<Schedule> {
        self.validate()?;
        let scale = match q.max_abs_coefficient() {
            m if m > 0.0 => m,
            _ => 1.0,
        };
        let t_start = self.t_start.unwrap_or(scale * q.n().max(1) as f64);
        let t_end = self.t_end.unwrap_or(1e-3 * scale);
        if t_start <= t_end {
            return Err(Error::InvalidParameter(format!(
                "schedule needs t_start > t_end, got {t_start} <= {t_end}"
            )));
        }
        let ratio = if self.sweeps > 1 {
            (t_end / t_start).powf(1.0 / (self.sweeps - 1) as f64)
        } else {
            1.0
        };
        Ok(Schedule {
            t_start,
            t_end,
            ratio,
            sweeps: self.sweeps,
        })
    }

    pub fn time_budget(&self) -> Option<Duration> {
        self.time_budget_ms.map(Duration::from_millis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub best: Sample,
    /// Best energy per restart (per pass for the decomposition solver).
    pub energy_history: Vec<f64>,
    /// Energy or energy-delta evaluations performed.
    pub evaluations: u64,
    #[serde(skip)]
    pub wall_time: Duration,
    /// The time budget ran out before the solver finished.
    pub truncated: bool,
}

/// A pluggable minimizer.
pub trait QuboSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the returned optimum is guaranteed global.
    fn is_exact(&self) -> bool;

    /// Solves with an explicit seed; deterministic backends ignore it.
    fn solve_seeded(&self, q: &QuboProblem, seed: u64) -> Result<SolveResult>;

    fn seed(&self) -> u64 {
        DEFAULT_SEED
    }

    fn solve(&self, q: &QuboProblem) -> Result<SolveResult> {
        self.solve_seeded(q, self.seed())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl QuboSolver for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn solve_seeded(&self, q: &QuboProblem, _seed: u64) -> Result<SolveResult> {
        solve_exhaustive(q)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Annealer(pub SolverConfig);

impl QuboSolver for Annealer {
    fn name(&self) -> &'static str {
        "sa"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn solve_seeded(&self, q: &QuboProblem, seed: u64) -> Result<SolveResult> {
        solve_sa(q, &self.0.clone().with_seed(seed))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Greedy(pub SolverConfig);

impl QuboSolver for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn solve_seeded(&self, q: &QuboProblem, seed: u64) -> Result<SolveResult> {
        solve_greedy(q, &self.0.clone().with_seed(seed))
    }
}

pub struct Decomposed {
    pub config: SolverConfig,
    pub inner: Box<dyn QuboSolver>,
}

impl QuboSolver for Decomposed {
    fn name(&self) -> &'static str {
        "decomposed"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn solve_seeded(&self, q: &QuboProblem, seed: u64) -> Result<SolveResult> {
        solve_decomposed(q, &self.config.clone().with_seed(seed), self.inner.as_ref())
    }
}

#[derive(Debug, Clone)]
pub struct Remote {
    pub endpoint: String,
    pub config: SolverConfig,
}

impl QuboSolver for Remote {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn solve_seeded(&self, q: &QuboProblem, _seed: u64) -> Result<SolveResult> {
        solve_remote(q, &self.endpoint, &self.config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exhaustive,
    Sa,
    Greedy,
    Decomposed,
    Remote,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exhaustive" => Self::Exhaustive,
            "sa" => Self::Sa,
            "greedy" => Self::Greedy,
            "decomposed" => Self::Decomposed,
            "remote" => Self::Remote,
            _ => return Err(Error::InvalidParameter(format!("unknown solver `{s}`"))),
        })
    }
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::Sa => "sa",
            Self::Greedy => "greedy",
            Self::Decomposed => "decomposed",
            Self::Remote => "remote",
        }
    }

    /// Builds a solver handle. The decomposition solver gets an exhaustive
    /// inner solver; `endpoint` is required for the remote one.
    pub fn build(self, config: SolverConfig, endpoint: Option<&str>) -> Result<Box<dyn QuboSolver>> {
        config.validate()?;
        Ok(match self {
            Self::Exhaustive => Box::new(Exhaustive),
            Self::Sa => Box::new(Annealer(config)),
            Self::Greedy => Box::new(Greedy(config)),
            Self::Decomposed => Box::new(Decomposed {
                config,
                inner: Box::new(Exhaustive),
            }),
            Self::Remote => Box::new(Remote {
                endpoint: endpoint
                    .ok_or_else(|| Error::InvalidParameter("remote solver needs an endpoint".into()))?
                    .to_string(),
                config,
            }),
        })
    }
}

/// Non-zero couplings in compressed rows, for fast local-field updates.
pub(crate) struct SparseRows {
    start: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl SparseRows {
    pub(crate) fn new(q: &QuboProblem) -> Self {
        let n = q.n();
        let mut start = Vec::with_capacity(n + 1);
        let (mut idx, mut val) = (Vec::new(), Vec::new());
        start.push(0);
        for i in 0..n {
            for (j, &v) in q.coupling_row(i).iter().enumerate() {
                if v != 0.0 {
                    idx.push(j);
                    val.push(v);
                }
            }
            start.push(idx.len());
        }
        Self { start, idx, val }
    }

    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.start[i]..self.start[i + 1];
        self.idx[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }
}

/// Local-field state of one assignment: `fields[i] = h_i + sum_j J_ij s_j`.
pub(crate) struct FieldState<'a> {
    pub(crate) rows: &'a SparseRows,
    pub(crate) s: Vec<u8>,
    pub(crate) fields: Vec<f64>,
    pub(crate) energy: f64,
}

impl<'a> FieldState<'a> {
    pub(crate) fn new(q: &QuboProblem, rows: &'a SparseRows, s: Vec<u8>) -> Self {
        let fields = recompute_fields(q, rows, &s);
        let energy = q.evaluate(&s);
        Self {
            rows,
            s,
            fields,
            energy,
        }
    }

    #[inline]
    pub(crate) fn delta(&self, i: usize) -> f64 {
        if self.s[i] == 0 {
            self.fields[i]
        } else {
            -self.fields[i]
        }
    }

    #[inline]
    pub(crate) fn flip(&mut self, i: usize) {
        self.energy += self.delta(i);
        let sign = if self.s[i] == 0 { 1.0 } else { -1.0 };
        self.s[i] ^= 1;
        for (j, v) in self.rows.row(i) {
            self.fields[j] += sign * v;
        }
    }

    /// Steepest descent: flip the most improving bit (lowest index on ties)
    /// until no flip improves. Returns the number of delta evaluations.
    pub(crate) fn descend(&mut self) -> u64 {
        let n = self.s.len();
        let mut evals = 0;
        loop {
            let mut best = (-ENERGY_TOLERANCE * 1e-3, usize::MAX);
            for i in 0..n {
                let d = self.delta(i);
                if d < best.0 {
                    best = (d, i);
                }
            }
            evals += n as u64;
            if best.1 == usize::MAX {
                return evals;
            }
            self.flip(best.1);
        }
    }

    /// Largest disagreement between cached and recomputed fields.
    pub(crate) fn field_drift(&self, q: &QuboProblem) -> f64 {
        recompute_fields(q, self.rows, &self.s)
            .iter()
            .zip(&self.fields)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn recompute_fields(q: &QuboProblem, rows: &SparseRows, s: &[u8]) -> Vec<f64> {
    let mut f = q.linear().to_vec();
    for (i, _) in s.iter().enumerate().filter(|(_, &b)| b != 0) {
        for (j, v) in rows.row(i) {
            f[j] += v;
        }
    }
    f
}

/// The random initial assignment of restart `restart`, shared by the
/// annealer and greedy descent so that both start from the same point.
pub fn initial_state(n: usize, seed: u64, restart: u64) -> Vec<u8> {
    let mut rng = rng::stream(seed, Stream::Start, restart);
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// `a` is strictly better than `b`: lower energy, or equal energy within
/// tolerance and a lower assignment read as a binary integer (bit 0 = var 0).
pub(crate) fn better_sample(a: &Sample, b: &Sample) -> bool {
    if a.energy < b.energy - ENERGY_TOLERANCE {
        return true;
    }
    if a.energy > b.energy + ENERGY_TOLERANCE {
        return false;
    }
    a.assignment.iter().rev().lt(b.assignment.iter().rev())
}

pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub(crate) fn new(start: Instant, budget: Option<Duration>) -> Self {
        Self(budget.map(|b| start + b))
    }

    pub(crate) fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

/// Builds the final result, re-evaluating the best energy from scratch.
pub(crate) fn finish(
    q: &QuboProblem,
    assignment: Vec<u8>,
    energy_history: Vec<f64>,
    evaluations: u64,
    start: Instant,
    truncated: bool,
) -> SolveResult {
    SolveResult {
        best: Sample::evaluated(q, assignment),
        energy_history,
        evaluations,
        wall_time: start.elapsed(),
        truncated,
    }
}
