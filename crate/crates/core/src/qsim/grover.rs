use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_qubits, uniform_state, StateVector};
use crate::error::{Error, Result};

/// A search problem over `N = 2^q` basis states with a marked subset.
#[derive(Debug, Clone, PartialEq)]
pub struct GroverInstance {
    q: usize,
    marked: Vec<bool>,
    count: usize,
}

impl GroverInstance {
    pub fn from_predicate(q: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        check_qubits(q)?;
        let marked: Vec<bool> = (0..1usize << q).map(f).collect();
        let count = marked.iter().filter(|&&m| m).count();
        Ok(Self { q, marked, count })
    }

    pub fn from_marked(q: usize, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >> q != 0) {
            return Err(Error::InvalidParameter(format!("marked index {bad} out of range")));
        }
        Self::from_predicate(q, |x| indices.contains(&x))
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    /// `N`.
    pub fn size(&self) -> usize {
        1 << self.q
    }

    /// `M`.
    pub fn marked_count(&self) -> usize {
        self.count
    }

    pub fn is_marked(&self, x: usize) -> bool {
        self.marked[x]
    }

    /// Rotation angle `theta = 2 asin(sqrt(M / N))` of one iterate.
    pub fn theta(&self) -> f64 {
        2.0 * (self.count as f64 / self.size() as f64).sqrt().asin()
    }

    /// `floor(pi/4 sqrt(N / M))`; `None` when nothing is marked.
    pub fn default_iterations(&self) -> Option<usize> {
        (self.count > 0)
            .then(|| (PI / 4.0 * (self.size() as f64 / self.count as f64).sqrt()).floor() as usize)
    }

    /// One iterate `R_D R_f` on a block of `N` amplitudes.
    pub(crate) fn iterate_block(&self, block: &mut [Complex64]) {
        debug_assert_eq!(block.len(), self.size());
        for (a, &m) in block.iter_mut().zip(&self.marked) {
            if m {
                *a = -*a;
            }
        }
        // 2|D><D| - I maps every amplitude to twice the mean minus itself
        let mean = block.iter().sum::<Complex64>() / self.size() as f64;
        for a in block.iter_mut() {
            *a = 2.0 * mean - *a;
        }
    }
}

/// Applies `U = R_D R_f` in place.
pub fn grover_iterate(s: &mut StateVector, inst: &GroverInstance) -> Result<()> {
    if s.qubits() != inst.q {
        return Err(Error::LengthMismatch {
            expected: inst.q,
            got: s.qubits(),
        });
    }
    inst.iterate_block(s.amplitudes_mut());
    Ok(())
}

/// Total probability of the marked states.
pub fn marked_probability(s: &StateVector, inst: &GroverInstance) -> f64 {
    s.amplitudes()
        .iter()
        .zip(&inst.marked)
        .filter(|(_, &m)| m)
        .map(|(a, _)| a.norm_sqr())
        .sum()
}

/// `sin^2((2t + 1) theta / 2)`: the marked probability after `t` iterates.
pub fn rotation_probability(n: usize, m: usize, t: usize) -> f64 {
    let theta = 2.0 * (m as f64 / n as f64).sqrt().asin();
    ((2 * t + 1) as f64 * theta / 2.0).sin().powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroverOutcome {
    /// Measurement distribution over all `N` basis states.
    pub distribution: Vec<f64>,
    pub iterations: usize,
    pub success_probability: f64,
}

/// Runs `t` iterates (default `floor(pi/4 sqrt(N / M))`) from the uniform
/// state and returns the exact measurement distribution.
pub fn grover_search(inst: &GroverInstance, t: Option<usize>) -> Result<GroverOutcome> {
    let iterations = match t {
        Some(t) => t,
        None => inst.default_iterations().ok_or(Error::NoMarkedItems)?,
    };
    let mut s = uniform_state(inst.q)?;
    for _ in 0..iterations {
        inst.iterate_block(s.amplitudes_mut());
    }
    Ok(GroverOutcome {
        success_probability: marked_probability(&s, inst),
        distribution: s.probabilities(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_marked_is_identity_on_uniform() {
        let inst = GroverInstance::from_marked(4, &[]).unwrap();
        let mut s = uniform_state(4).unwrap();
        grover_iterate(&mut s, &inst).unwrap();
        let u = uniform_state(4).unwrap();
        assert!(s.amplitudes().iter().zip(u.amplitudes()).all(|(a, b)| (a - b).norm() < 1e-15));
        assert!(matches!(grover_search(&inst, None), Err(Error::NoMarkedItems)));
    }

    #[test]
    fn four_items_one_marked_needs_one_iterate() {
        let inst = GroverInstance::from_marked(2, &[2]).unwrap();
        assert!((inst.theta() - PI / 3.0).abs() < 1e-15);
        let out = grover_search(&inst, Some(1)).unwrap();
        assert!((out.success_probability - 1.0).abs() < 1e-12);
        assert!((out.distribution[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_examples() {
        let inst = GroverInstance::from_marked(4, &[11]).unwrap();
        let out = grover_search(&inst, None).unwrap();
        assert_eq!(out.iterations, 3);
        assert!(out.success_probability > 1.0 - 1.0 / 16.0);

        let inst = GroverInstance::from_marked(4, &[1, 5, 9]).unwrap();
        let out = grover_search(&inst, Some(0)).unwrap();
        assert!((out.success_probability - 3.0 / 16.0).abs() < 1e-12);

        let all = GroverInstance::from_predicate(2, |_| true).unwrap();
        assert!((grover_search(&all, Some(0)).unwrap().success_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dynamics_stay_in_the_plane() {
        let inst = GroverInstance::from_marked(6, &[3, 17, 40, 41]).unwrap();
        let mut s = uniform_state(6).unwrap();
        for t in 1..=30 {
            grover_iterate(&mut s, &inst).unwrap();
            let spread = |marked: bool| {
                let vals: Vec<Complex64> = (0..64)
                    .filter(|&x| inst.is_marked(x) == marked)
                    .map(|x| s.amplitudes()[x])
                    .collect();
                vals.iter().map(|v| (v - vals[0]).norm()).fold(0.0, f64::max)
            };
            assert!(spread(true) < 1e-10 && spread(false) < 1e-10);
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let p = marked_probability(&s, &inst);
            assert!((p - rotation_probability(64, 4, t)).abs() < 1e-9);
        }
    }
}
