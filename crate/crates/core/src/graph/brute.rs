use rayon::prelude::*;

use super::{BipartiteGraph, SubsetPair};
use crate::error::{Error, Result};

/// Largest `n_left + n_right` accepted by [`brute_min_max_deviation`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exact extrema of the deviation function over all subset pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin: SubsetPair,
    pub max: f64,
    pub argmax: SubsetPair,
}

// (scaled value, y pattern, x pattern)
type Candidate = (i64, u32, u32);

/// Global minimum and maximum of `L` over all `2^(n_left + n_right)` pairs.
///
/// Works in integers: `L(X, Y) * |A||B| = sum over b in Y of
/// (|X| e(A, B) - |A||B| e(X, {b}))`, so for a fixed `X` the best `Y` takes
/// exactly the right nodes whose term has the wanted sign. Among optimal
/// pairs the one with the smallest bit pattern (left bits low, right bits
/// high) wins.
pub fn brute_min_max_deviation(g: &BipartiteGraph) -> Result<Extrema> {
    g.ensure_nonempty_parts()?;
    let (nl, nr) = (g.n_left(), g.n_right());
    if nl + nr > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            size: nl + nr,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    // column masks: left neighbours of each right node
    let mut cols = vec![0u32; nr];
    for (a, b) in g.edges() {
        cols[b] |= 1 << a;
    }
    let total = g.total_edges() as i64;
    let pairs = (nl * nr) as i64;

    let scan = |x: u32| -> (Candidate, Candidate) {
        let size = x.count_ones() as i64 * total;
        let (mut lo, mut lo_y, mut hi, mut hi_y) = (0i64, 0u32, 0i64, 0u32);
        for (b, &col) in cols.iter().enumerate() {
            let term = size - pairs * (x & col).count_ones() as i64;
            if term < 0 {
                lo += term;
                lo_y |= 1 << b;
            } else if term > 0 {
                hi += term;
                hi_y |= 1 << b;
            }
        }
        ((lo, lo_y, x), (-hi, hi_y, x))
    };

    let (min, max) = (0..1u32 << nl)
        .into_par_iter()
        .map(scan)
        .reduce(
            || ((0, 0, 0), (0, 0, 0)),
            |a, b| (better(a.0, b.0), better(a.1, b.1)),
        );

    let decode = |c: Candidate| {
        SubsetPair::from_pattern(nl, nr, c.2 as u64 | (c.1 as u64) << nl)
    };
    Ok(Extrema {
        min: min.0 as f64 / pairs as f64,
        argmin: decode(min),
        max: -max.0 as f64 / pairs as f64,
        argmax: decode(max),
    })
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    if (a.0, a.1, a.2) <= (b.0, b.1, b.2) {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Every pair, evaluated from scratch.
    fn naive(g: &BipartiteGraph) -> (f64, u64, f64, u64) {
        let (nl, nr) = (g.n_left(), g.n_right());
        let (mut lo, mut lo_p, mut hi, mut hi_p) = (f64::INFINITY, 0, f64::NEG_INFINITY, 0);
        for p in 0..1u64 << (nl + nr) {
            let l = g.deviation(&SubsetPair::from_pattern(nl, nr, p));
            if l < lo - 1e-9 || ((l - lo).abs() <= 1e-9 && p < lo_p) {
                lo = l;
                lo_p = p;
            }
            if l > hi + 1e-9 || ((l - hi).abs() <= 1e-9 && p < hi_p) {
                hi = l;
                hi_p = p;
            }
        }
        (lo, lo_p, hi, hi_p)
    }

    fn random_graph(nl: usize, nr: usize, p: f64, seed: u64) -> BipartiteGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..nl)
            .flat_map(|a| (0..nr).map(move |b| (a, b)))
            .filter(|_| rng.random_bool(p))
            .collect();
        BipartiteGraph::from_edges(nl, nr, edges).unwrap()
    }

    #[test]
    fn edgeless_and_complete_have_zero_extrema() {
        let empty = BipartiteGraph::from_edges(3, 4, []).unwrap();
        let e = brute_min_max_deviation(&empty).unwrap();
        assert_eq!((e.min, e.max), (0.0, 0.0));
        assert!(e.argmin.is_empty() && e.argmax.is_empty());

        let complete = BipartiteGraph::from_matrix(&vec![vec![true; 4]; 3]).unwrap();
        let e = brute_min_max_deviation(&complete).unwrap();
        assert_eq!((e.min, e.max), (0.0, 0.0));
    }

    #[test]
    fn matches_naive_enumeration() {
        for seed in 0..40 {
            let nl = 1 + seed as usize % 8;
            let nr = 1 + (seed as usize * 7) % 8;
            let g = random_graph(nl, nr, 0.2 + 0.015 * seed as f64, seed);
            let e = brute_min_max_deviation(&g).unwrap();
            let (lo, lo_p, hi, hi_p) = naive(&g);
            assert!((e.min - lo).abs() < 1e-9, "seed {seed}");
            assert!((e.max - hi).abs() < 1e-9, "seed {seed}");
            assert_eq!(e.argmin.pattern(), lo_p, "seed {seed}");
            assert_eq!(e.argmax.pattern(), hi_p, "seed {seed}");
            assert!((g.deviation(&e.argmin) - e.min).abs() < 1e-9);
            assert!(e.min <= 0.0 && e.max >= 0.0);
        }
    }

    #[test]
    fn size_guard() {
        let g = BipartiteGraph::from_edges(13, 12, []).unwrap();
        assert!(matches!(
            brute_min_max_deviation(&g),
            Err(Error::SizeGuard { size: 25, limit: 24 })
        ));
    }
}
