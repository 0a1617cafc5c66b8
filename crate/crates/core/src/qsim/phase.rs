use std::f64::consts::PI;

use num_complex::Complex64;

use super::grover::GroverInstance;
use super::{check_qubits, iqft_register, StateVector};
use crate::error::{Error, Result};

/// A unitary acting on a `2^qubits()` block of amplitudes.
pub trait Unitary: Sync {
    fn qubits(&self) -> usize;

    fn apply(&self, block: &mut [Complex64]);
}

/// `diag(1, e^{i theta})` on one qubit; `|1>` is an eigenstate with phase
/// `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseUnitary {
    pub theta: f64,
}

impl Unitary for PhaseUnitary {
    fn qubits(&self) -> usize {
        1
    }

    fn apply(&self, block: &mut [Complex64]) {
        block[1] *= Complex64::from_polar(1.0, self.theta);
    }
}

/// The Grover iterate as a [`Unitary`].
pub struct GroverOperator<'a>(pub &'a GroverInstance);

impl Unitary for GroverOperator<'_> {
    fn qubits(&self) -> usize {
        self.0.qubits()
    }

    fn apply(&self, block: &mut [Complex64]) {
        self.0.iterate_block(block);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimate {
    /// Width of the phase register.
    pub m: usize,
    /// Probability of each outcome `a` in `0..2^m`.
    pub distribution: Vec<f64>,
    /// Controlled-`U` applications: `2^m - 1`.
    pub ops_count: u64,
}

impl PhaseEstimate {
    /// Most likely outcome, lowest on ties.
    pub fn modal(&self) -> usize {
        let mut best = 0;
        for (a, &p) in self.distribution.iter().enumerate() {
            if p > self.distribution[best] + 1e-12 {
                best = a;
            }
        }
        best
    }

    /// `2 pi a / 2^m` for the modal outcome `a`.
    pub fn theta_hat(&self) -> f64 {
        2.0 * PI * self.modal() as f64 / (1u64 << self.m) as f64
    }
}

/// Phase estimation with an `m`-qubit phase register.
///
/// The phase register starts in the uniform state above `initial`; for each
/// phase qubit `j`, `U` is applied `2^j` times to the blocks where that
/// qubit is 1, then the inverse QFT is applied to the phase register and
/// the system register is traced out.
pub fn phase_estimate(u: &dyn Unitary, initial: &StateVector, m: usize) -> Result<PhaseEstimate> {
    let q = u.qubits();
    if initial.qubits() != q {
        return Err(Error::LengthMismatch {
            expected: q,
            got: initial.qubits(),
        });
    }
    check_qubits(q + m)?;
    let block = 1usize << q;
    let scale = 1.0 / ((1u64 << m) as f64).sqrt();
    let mut amps = Vec::with_capacity(block << m);
    for _ in 0..1usize << m {
        amps.extend(initial.amplitudes().iter().map(|z| z * scale));
    }

    let mut ops_count = 0u64;
    for j in 0..m {
        let power = 1u64 << j;
        for (a, chunk) in amps.chunks_mut(block).enumerate() {
            if a >> j & 1 == 1 {
                for _ in 0..power {
                    u.apply(chunk);
                }
            }
        }
        ops_count += power;
    }
    let mut state = StateVector::from_amplitudes(amps)?;
    iqft_register(&mut state, q, m);
    Ok(PhaseEstimate {
        m,
        distribution: state
            .amplitudes()
            .chunks(block)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect(),
        ops_count,
    })
}

/// Phase estimation of the Grover iterate from the uniform state, computed
/// in the two-dimensional plane spanned by the uniform superpositions of
/// unmarked and of marked states. Agrees with [`phase_estimate`] on
/// [`GroverOperator`] but costs `O(m 2^m)` instead of `O(4^m N)`.
pub fn phase_estimate_grover_fast(inst: &GroverInstance, m: usize) -> Result<PhaseEstimate> {
    check_qubits(1 + m)?;
    let theta = inst.theta();
    let half = theta / 2.0;
    // in the (unmarked, marked) basis the iterate rotates by theta, so U^a
    // applied to the uniform state (cos, sin)(theta/2) lands on angle
    // theta/2 + a theta
    let scale = 1.0 / ((1u64 << m) as f64).sqrt();
    let mut amps = Vec::with_capacity(2 << m);
    for a in 0..1u64 << m {
        let angle = half + a as f64 * theta;
        amps.push(Complex64::new(angle.cos() * scale, 0.0));
        amps.push(Complex64::new(angle.sin() * scale, 0.0));
    }
    let mut state = StateVector::from_amplitudes(amps)?;
    iqft_register(&mut state, 1, m);
    Ok(PhaseEstimate {
        m,
        distribution: state
            .amplitudes()
            .chunks(2)
            .map(|c| c[0].norm_sqr() + c[1].norm_sqr())
            .collect(),
        ops_count: (1u64 << m) - 1,
    })
}
