//! Exact state-vector simulation of Grover search, the quantum Fourier
//! transform, phase estimation, and the quantum test for the existence of an
//! irregular subset pair.
//!
//! Qubit `j` is bit `j` of the basis index. Registers are contiguous bit
//! ranges; phase estimation puts the phase register above the system
//! register, so each phase value owns a contiguous block of amplitudes.

mod existence;
mod grover;
mod phase;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use existence::{
    default_phase_bits, irregular_pairs, quantum_exists_regularity, ExistenceOptions,
    ExistenceReport,
};
pub use grover::{grover_iterate, grover_search, marked_probability, rotation_probability, GroverInstance, GroverOutcome};
pub use phase::{
    phase_estimate, phase_estimate_grover_fast, GroverOperator, PhaseEstimate, PhaseUnitary,
    Unitary,
};

/// Largest simulated register, about four million amplitudes.
pub const MAX_QUBITS: usize = 22;

pub(crate) fn check_qubits(q: usize) -> Result<()> {
    if q > MAX_QUBITS {
        return Err(Error::QubitCap {
            requested: q,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    q: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `q` qubits.
    pub fn zero(q: usize) -> Result<Self> {
        Self::basis(q, 0)
    }

    pub fn basis(q: usize, index: usize) -> Result<Self> {
        check_qubits(q)?;
        if index >= 1 << q {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << q];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { q, amps })
    }

    /// Wraps amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{len} amplitudes is not a power of two")));
        }
        let q = len.trailing_zeros() as usize;
        check_qubits(q)?;
        let mut s = Self { q, amps };
        let norm = s.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state has zero norm".into()));
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Measurement probabilities `|z|^2` per basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn hadamard(&mut self, target: usize) {
        let bit = 1 << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// Multiplies by `e^{i phi}` the states where both qubits are 1.
    pub fn controlled_phase(&mut self, control: usize, target: usize, phi: f64) {
        let mask = 1 << control | 1 << target;
        let w = Complex64::from_polar(1.0, phi);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= w;
            }
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (ba, bb) = (1 << a, 1 << b);
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amps.swap(i, i ^ ba ^ bb);
            }
        }
    }
}

/// The uniform superposition `2^{-q/2} sum_x |x>`.
pub fn uniform_state(q: usize) -> Result<StateVector> {
    check_qubits(q)?;
    let a = Complex64::new((1u64 << q) as f64, 0.0).sqrt().inv();
    Ok(StateVector {
        q,
        amps: vec![a; 1 << q],
    })
}

#[derive(Debug, Clone, Copy)]
enum Gate {
    H(usize),
    Phase(usize, usize, f64),
    Swap(usize, usize),
}

/// Gate sequence of the QFT on qubits `offset..offset + width`.
fn qft_circuit(offset: usize, width: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for j in (0..width).rev() {
        gates.push(Gate::H(offset + j));
        for k in (0..j).rev() {
            gates.push(Gate::Phase(offset + k, offset + j, PI / (1u64 << (j - k)) as f64));
        }
    }
    for i in 0..width / 2 {
        gates.push(Gate::Swap(offset + i, offset + width - 1 - i));
    }
    gates
}

fn apply(s: &mut StateVector, gate: Gate, inverse: bool) {
    match gate {
        Gate::H(t) => s.hadamard(t),
        Gate::Phase(c, t, phi) => s.controlled_phase(c, t, if inverse { -phi } else { phi }),
        Gate::Swap(a, b) => s.swap(a, b),
    }
}

/// QFT on a register: `|a> -> N^{-1/2} sum_k e^{2 pi i a k / N} |k>` with
/// `N = 2^width`, built from Hadamard, controlled-phase and swap gates.
pub fn qft_register(s: &mut StateVector, offset: usize, width: usize) {
    assert!(offset + width <= s.q, "register exceeds the state");
    for g in qft_circuit(offset, width) {
        apply(s, g, false);
    }
}

/// Inverse of [`qft_register`]: the circuit reversed with conjugated phases.
pub fn iqft_register(s: &mut StateVector, offset: usize, width: usize) {
    assert!(offset + width <= s.q, "register exceeds the state");
    for g in qft_circuit(offset, width).into_iter().rev() {
        apply(s, g, true);
    }
}

pub fn qft(s: &StateVector) -> StateVector {
    let mut out = s.clone();
    qft_register(&mut out, 0, s.q);
    out
}

pub fn iqft(s: &StateVector) -> StateVector {
    let mut out = s.clone();
    iqft_register(&mut out, 0, s.q);
    out
}

/// CSV with header `outcome,probability`.
pub fn distribution_csv(probabilities: &[f64]) -> String {
    let mut out = String::from("outcome,probability\n");
    for (a, p) in probabilities.iter().enumerate() {
        let _ = writeln!(out, "{a},{p}");
    }
    out
}
