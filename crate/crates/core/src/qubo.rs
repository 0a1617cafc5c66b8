//! Quadratic binary problems, their Ising form, and the regularity-check
//! QUBO of a bipartite graph.
//!
//! A [`QuboProblem`] has energy
//! `offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j` over `s` in `{0,1}^n`.
//! Each unordered pair is stored once; coefficients supplied on the diagonal
//! are folded into the linear term because `s_i^2 = s_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuboJson", into = "QuboJson")]
pub struct QuboProblem {
    n: usize,
    linear: Vec<f64>,
    // dense symmetric n*n, zero diagonal; J_ij lives at [i*n+j] and [j*n+i]
    coupling: Vec<f64>,
    offset: f64,
}

/// Wire/file representation: `{"n", "linear", "quadratic": [[i, j, v], ..], "offset"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboJson {
    pub n: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: f64,
}

impl TryFrom<QuboJson> for QuboProblem {
    type Error = Error;

    fn try_from(j: QuboJson) -> Result<Self> {
        if j.linear.len() != j.n {
            return Err(Error::InvalidParameter(format!(
                "linear has {} entries for n = {}",
                j.linear.len(),
                j.n
            )));
        }
        let mut q = QuboProblem::new(j.n);
        q.linear = j.linear;
        q.offset = j.offset;
        for (i, jj, v) in j.quadratic {
            q.add_quadratic(i, jj, v)?;
        }
        q.check_finite()?;
        Ok(q)
    }
}

impl From<QuboProblem> for QuboJson {
    fn from(q: QuboProblem) -> Self {
        let quadratic = q.quadratic_terms().collect();
        QuboJson {
            n: q.n,
            linear: q.linear,
            quadratic,
            offset: q.offset,
        }
    }
}

impl QuboProblem {
    /// The zero problem on `n` variables.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: vec![0.0; n],
            coupling: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn add_linear(&mut self, i: usize, v: f64) -> Result<()> {
        self.check_index(i)?;
        self.linear[i] += v;
        Ok(())
    }

    /// Adds `v` to the coefficient of `s_i s_j`; `i == j` goes to the linear term.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            self.linear[i] += v;
        } else {
            self.coupling[i * self.n + j] += v;
            self.coupling[j * self.n + i] += v;
        }
        Ok(())
    }

    /// `J_ij` for `i != j` (symmetric), zero on the diagonal.
    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n + j]
    }

    /// Row `i` of the symmetric coupling matrix.
    pub fn coupling_row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.n..(i + 1) * self.n]
    }

    /// Non-zero couplings as `(i, j, J_ij)` with `i < j`.
    pub fn quadratic_terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n)
                .map(move |j| (i, j, self.coupling[i * self.n + j]))
                .filter(|t| t.2 != 0.0)
        })
    }

    /// Largest absolute linear or quadratic coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.coupling.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidParameter(format!(
                "variable {i} out of range for n = {}",
                self.n
            )));
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.offset.is_finite()
            && self.linear.iter().all(|v| v.is_finite())
            && self.coupling.iter().all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidParameter("non-finite coefficient".into()))
        }
    }

    pub fn check_assignment(&self, s: &[u8]) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        if let Some(&bad) = s.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("assignment entry {bad} is not 0 or 1")));
        }
        Ok(())
    }

    /// Energy of a binary assignment.
    pub fn energy(&self, s: &[u8]) -> Result<f64> {
        self.check_assignment(s)?;
        Ok(self.evaluate(s))
    }

    /// Energy without validation.
    ///
    /// # Panics
    ///
    /// If `s` is shorter than `n`.
    pub fn evaluate(&self, s: &[u8]) -> f64 {
        let ones: Vec<usize> = (0..self.n).filter(|&i| s[i] != 0).collect();
        let mut e = self.offset;
        for (k, &i) in ones.iter().enumerate() {
            e += self.linear[i];
            let row = self.coupling_row(i);
            e += ones[k + 1..].iter().map(|&j| row[j]).sum::<f64>();
        }
        e
    }

    /// `h_i + sum_j J_ij s_j`.
    pub fn local_field(&self, s: &[u8], i: usize) -> f64 {
        let row = self.coupling_row(i);
        self.linear[i]
            + row
                .iter()
                .zip(s)
                .filter(|(_, &b)| b != 0)
                .map(|(j, _)| j)
                .sum::<f64>()
    }

    /// Energy change from flipping bit `i`: `(1 - 2 s_i)(h_i + sum_j J_ij s_j)`.
    pub fn flip_delta(&self, s: &[u8], i: usize) -> f64 {
        let sign = if s[i] == 0 { 1.0 } else { -1.0 };
        sign * self.local_field(s, i)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("QUBO serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A binary assignment and its energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub assignment: Vec<u8>,
    pub energy: f64,
}

impl Sample {
    pub fn evaluated(q: &QuboProblem, assignment: Vec<u8>) -> Self {
        let energy = q.evaluate(&assignment);
        Self { assignment, energy }
    }

    /// The assignment as a binary integer, variable 0 being the lowest bit.
    /// Only meaningful for up to 64 variables.
    pub fn index(&self) -> u64 {
        self.assignment
            .iter()
            .enumerate()
            .take(64)
            .filter(|(_, &b)| b != 0)
            .map(|(i, _)| 1u64 << i)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// The regularity-check QUBO of a bipartite graph.
///
/// Variables `0..n_left` select left nodes, the rest select right nodes. The
/// coupling between left node `a` and right node `b` is `d(A, B) - a_ab`
/// (negated for [`Sense::Maximize`]), couplings within a part are zero, and
/// there are no linear terms, so the energy of an assignment is exactly
/// `L(X, Y)` (or `-L(X, Y)`).
pub fn build_regularity_qubo(g: &BipartiteGraph, sense: Sense) -> Result<QuboProblem> {
    g.ensure_nonempty_parts()?;
    let (nl, nr) = (g.n_left(), g.n_right());
    let d = g.density();
    let sign = match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut q = QuboProblem::new(nl + nr);
    let n = q.n;
    for a in 0..nl {
        for b in 0..nr {
            let adj = if g.has_edge(a, b) { 1.0 } else { 0.0 };
            let v = sign * (d - adj);
            let j = nl + b;
            q.coupling[a * n + j] = v;
            q.coupling[j * n + a] = v;
        }
    }
    Ok(q)
}

/// Energy over spins `sigma` in `{-1, +1}^n`:
/// `offset + sum_i h_i sigma_i + sum_{i<j} J_ij sigma_i sigma_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    h: Vec<f64>,
    coupling: Vec<f64>,
    offset: f64,
}

impl IsingProblem {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            h: vec![0.0; n],
            coupling: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n + j]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_field(&mut self, i: usize, v: f64) {
        self.h[i] = v;
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "Ising couplings are off-diagonal");
        self.coupling[i * self.n + j] = v;
        self.coupling[j * self.n + i] = v;
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: spins.len(),
            });
        }
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(bad));
        }
        let mut e = self.offset;
        for i in 0..self.n {
            let si = spins[i] as f64;
            e += self.h[i] * si;
            for j in i + 1..self.n {
                e += self.coupling[i * self.n + j] * si * spins[j] as f64;
            }
        }
        Ok(e)
    }
}

/// Energy of an Ising problem; see [`IsingProblem::energy`].
pub fn ising_energy(p: &IsingProblem, spins: &[i8]) -> Result<f64> {
    p.energy(spins)
}

/// Spin image `sigma_i = 2 b_i - 1` of a bit vector.
pub fn bits_to_spins(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect()
}

pub fn spins_to_bits(spins: &[i8]) -> Vec<u8> {
    spins.iter().map(|&s| u8::from(s > 0)).collect()
}

/// Rewrites a QUBO over spins via `b = (sigma + 1) / 2`, keeping every
/// energy (the constant parts move into the offset).
pub fn qubo_to_ising(q: &QuboProblem) -> IsingProblem {
    let n = q.n;
    let mut p = IsingProblem::new(n);
    p.offset = q.offset;
    for i in 0..n {
        p.h[i] += q.linear[i] / 2.0;
        p.offset += q.linear[i] / 2.0;
    }
    for (i, j, v) in q.quadratic_terms() {
        let quarter = v / 4.0;
        p.coupling[i * n + j] = quarter;
        p.coupling[j * n + i] = quarter;
        p.h[i] += quarter;
        p.h[j] += quarter;
        p.offset += quarter;
    }
    p
}

/// Inverse of [`qubo_to_ising`], via `sigma = 2b - 1`.
pub fn ising_to_qubo(p: &IsingProblem) -> QuboProblem {
    let n = p.n;
    let mut q = QuboProblem::new(n);
    q.offset = p.offset;
    for i in 0..n {
        q.linear[i] += 2.0 * p.h[i];
        q.offset -= p.h[i];
    }
    for i in 0..n {
        for j in i + 1..n {
            let v = p.coupling[i * n + j];
            if v == 0.0 {
                continue;
            }
            q.coupling[i * n + j] = 4.0 * v;
            q.coupling[j * n + i] = 4.0 * v;
            q.linear[i] -= 2.0 * v;
            q.linear[j] -= 2.0 * v;
            q.offset += v;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SubsetPair;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_qubo(n: usize, rng: &mut ChaCha8Rng) -> QuboProblem {
        let mut q = QuboProblem::new(n);
        for i in 0..n {
            q.add_linear(i, rng.random_range(-1.0..1.0)).unwrap();
            for j in i + 1..n {
                q.add_quadratic(i, j, rng.random_range(-1.0..1.0)).unwrap();
            }
        }
        q.set_offset(rng.random_range(-1.0..1.0));
        q
    }

    fn bits(n: usize, idx: u64) -> Vec<u8> {
        (0..n).map(|i| (idx >> i & 1) as u8).collect()
    }

    #[test]
    fn energy_examples() {
        let mut q = QuboProblem::new(3);
        q.set_offset(1.5);
        assert_eq!(q.energy(&[0, 0, 0]).unwrap(), 1.5);
        let mut single = QuboProblem::new(1);
        single.add_linear(0, 2.0).unwrap();
        assert_eq!(single.energy(&[1]).unwrap(), 2.0);
        assert!(matches!(
            single.energy(&[1, 0]),
            Err(Error::LengthMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn diagonal_folds_into_linear() {
        let mut q = QuboProblem::new(2);
        q.add_quadratic(1, 1, 3.0).unwrap();
        q.add_quadratic(1, 0, -1.0).unwrap();
        assert_eq!(q.linear(), &[0.0, 3.0]);
        assert_eq!(q.quadratic(0, 1), -1.0);
        assert_eq!(q.energy(&[1, 1]).unwrap(), 2.0);
    }

    #[test]
    fn regularity_qubo_examples() {
        let edgeless = BipartiteGraph::from_edges(2, 2, []).unwrap();
        let q = build_regularity_qubo(&edgeless, Sense::Minimize).unwrap();
        assert_eq!(q.quadratic_terms().count(), 0);

        let complete = BipartiteGraph::from_matrix(&[vec![true; 2], vec![true; 2]]).unwrap();
        let q = build_regularity_qubo(&complete, Sense::Minimize).unwrap();
        assert_eq!(q.quadratic_terms().count(), 0);

        let g = BipartiteGraph::from_edges(2, 2, [(0, 0)]).unwrap();
        let q = build_regularity_qubo(&g, Sense::Minimize).unwrap();
        let mut cross: Vec<f64> = [(0, 2), (0, 3), (1, 2), (1, 3)]
            .iter()
            .map(|&(i, j)| q.quadratic(i, j))
            .collect();
        assert_eq!(cross, vec![-0.75, 0.25, 0.25, 0.25]);
        assert_eq!(q.quadratic(0, 1), 0.0);
        assert_eq!(q.quadratic(2, 3), 0.0);
        assert_eq!(q.energy(&[1, 0, 1, 0]).unwrap(), -0.75);

        let qmax = build_regularity_qubo(&g, Sense::Maximize).unwrap();
        cross = [(0, 2), (1, 3)].iter().map(|&(i, j)| qmax.quadratic(i, j)).collect();
        assert_eq!(cross, vec![0.75, -0.25]);

        let empty_part = BipartiteGraph::from_edges(0, 2, []).unwrap();
        assert!(matches!(
            build_regularity_qubo(&empty_part, Sense::Minimize),
            Err(Error::EmptyPart)
        ));
    }

    #[test]
    fn regularity_energy_is_deviation_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (nl, nr) = (rng.random_range(1..=6), rng.random_range(1..=6));
            let edges: Vec<_> = (0..nl)
                .flat_map(|a| (0..nr).map(move |b| (a, b)))
                .filter(|_| rng.random_bool(0.5))
                .collect();
            let g = BipartiteGraph::from_edges(nl, nr, edges).unwrap();
            let q = build_regularity_qubo(&g, Sense::Minimize).unwrap();
            let qmax = build_regularity_qubo(&g, Sense::Maximize).unwrap();
            for idx in 0..1u64 << (nl + nr) {
                let s = bits(nl + nr, idx);
                let l = g.deviation(&SubsetPair::from_assignment(nl, &s));
                assert!((q.evaluate(&s) - l).abs() < 1e-9);
                assert!((qmax.evaluate(&s) + l).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn regularity_energy_matches_deviation_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut draws = 0;
        while draws < 10_000 {
            let (nl, nr) = (rng.random_range(1..=15), rng.random_range(1..=15));
            let p = rng.random_range(0.0..1.0);
            let edges: Vec<_> = (0..nl)
                .flat_map(|a| (0..nr).map(move |b| (a, b)))
                .filter(|_| rng.random_bool(p))
                .collect();
            let g = BipartiteGraph::from_edges(nl, nr, edges).unwrap();
            let q = build_regularity_qubo(&g, Sense::Minimize).unwrap();
            for _ in 0..100 {
                let s: Vec<u8> = (0..nl + nr).map(|_| rng.random_range(0..2)).collect();
                let l = g.deviation(&SubsetPair::from_assignment(nl, &s));
                assert!((q.energy(&s).unwrap() - l).abs() < 1e-9);
                draws += 1;
            }
        }
    }

    #[test]
    fn flip_delta_matches_reevaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(1..20);
            let q = random_qubo(n, &mut rng);
            let mut s: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            for _ in 0..100 {
                let i = rng.random_range(0..n);
                let before = q.evaluate(&s);
                let delta = q.flip_delta(&s, i);
                s[i] ^= 1;
                assert!((q.evaluate(&s) - before - delta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ising_examples() {
        let zero = qubo_to_ising(&QuboProblem::new(3));
        assert_eq!(zero, IsingProblem::new(3));

        let mut one = QuboProblem::new(1);
        one.add_linear(0, 1.0).unwrap();
        let p = qubo_to_ising(&one);
        assert_eq!(p.h(), &[0.5]);
        assert_eq!(p.offset(), 0.5);
        assert_eq!(p.energy(&[-1]).unwrap(), 0.0);
        assert_eq!(p.energy(&[1]).unwrap(), 1.0);

        let mut fields = IsingProblem::new(2);
        fields.set_field(0, 1.0);
        fields.set_field(1, -1.0);
        assert_eq!(ising_energy(&fields, &[1, 1]).unwrap(), 0.0);

        let mut pair = IsingProblem::new(2);
        pair.set_coupling(0, 1, 1.0);
        assert_eq!(ising_energy(&pair, &[1, -1]).unwrap(), -1.0);
        assert!(matches!(ising_energy(&pair, &[1, 0]), Err(Error::InvalidSpin(0))));
    }

    #[test]
    fn ising_ground_state_is_qubo_ground_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let n = rng.random_range(1..=10);
            let q = random_qubo(n, &mut rng);
            let p = qubo_to_ising(&q);
            let argmin = |f: &dyn Fn(u64) -> f64| {
                (0..1u64 << n)
                    .min_by(|&a, &b| f(a).partial_cmp(&f(b)).unwrap())
                    .unwrap()
            };
            let qa = argmin(&|i| q.evaluate(&bits(n, i)));
            let pa = argmin(&|i| p.energy(&bits_to_spins(&bits(n, i))).unwrap());
            assert_eq!(qa, pa);
        }
    }

    proptest! {
        #[test]
        fn ising_round_trip_preserves_spectrum(seed in 0u64..1000, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_qubo(n, &mut rng);
            let p = qubo_to_ising(&q);
            let back = ising_to_qubo(&p);
            for idx in 0..1u64 << n {
                let b = bits(n, idx);
                let e = q.evaluate(&b);
                prop_assert!((p.energy(&bits_to_spins(&b)).unwrap() - e).abs() < 1e-9);
                prop_assert!((back.evaluate(&b) - e).abs() < 1e-9);
            }
        }

        #[test]
        fn json_round_trip(seed in 0u64..1000, n in 0usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_qubo(n, &mut rng);
            prop_assert_eq!(QuboProblem::from_json(&q.to_json()).unwrap(), q);
        }
    }

    #[test]
    fn json_shape() {
        let mut q = QuboProblem::new(2);
        q.add_linear(0, 1.0).unwrap();
        q.add_quadratic(0, 1, -2.0).unwrap();
        q.set_offset(0.5);
        assert_eq!(
            q.to_json(),
            r#"{"n":2,"linear":[1.0,0.0],"quadratic":[[0,1,-2.0]],"offset":0.5}"#
        );
        assert!(QuboProblem::from_json(r#"{"n":2,"linear":[1.0],"quadratic":[]}"#).is_err());
        assert!(QuboProblem::from_json(r#"{"n":1,"linear":[1.0],"quadratic":[[0,3,1.0]]}"#).is_err());
    }
}
