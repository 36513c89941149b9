//! Random instance generators for property tests and benchmarks.
//!
//! Preorders are built from shortest-path quasi-metrics, so transitivity
//! holds by construction up to rounding.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::connectives::Bijection;
use crate::relation::{Dataset, FuzzyRelation};
use crate::rough::FuzzySet;

/// Knobs for the preorder generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreorderShape {
    /// Probability that a direct arc exists between two instances.
    pub density: f64,
    pub symmetric: bool,
    /// Snap arc lengths to multiples of 0.05, producing many ties.
    pub quantized: bool,
}

impl Default for PreorderShape {
    fn default() -> Self {
        PreorderShape {
            density: 0.6,
            symmetric: false,
            quantized: false,
        }
    }
}

/// Shortest-path distances over random arc lengths drawn by `length`.
fn quasi_metric<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    shape: PreorderShape,
    mut length: impl FnMut(&mut R) -> f64,
) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for u in 0..n {
        d[u * n + u] = 0.0;
        for v in 0..n {
            if u == v || (shape.symmetric && v < u) {
                continue;
            }
            if rng.gen_bool(shape.density.clamp(0.0, 1.0)) {
                let mut w = length(rng);
                if shape.quantized {
                    w = (w / 0.05).round() * 0.05;
                }
                d[u * n + v] = w;
                if shape.symmetric {
                    d[v * n + u] = w;
                }
            }
        }
    }
    for k in 0..n {
        for u in 0..n {
            for v in 0..n {
                let via = d[u * n + k] + d[k * n + v];
                if via < d[u * n + v] {
                    d[u * n + v] = via;
                }
            }
        }
    }
    d
}

/// A T_L-preorder `R = 1 − min(1, d)`.
pub fn lukasiewicz_preorder<R: Rng + ?Sized>(rng: &mut R, n: usize, shape: PreorderShape) -> FuzzyRelation {
    let d = quasi_metric(rng, n, shape, |r| r.gen_range(0.0..1.2));
    let values = d.into_iter().map(|x| 1.0 - x.min(1.0)).collect();
    FuzzyRelation::new(n, values).expect("generated relation is valid")
}

/// A T_P-preorder `R = exp(−d)`.
pub fn product_preorder<R: Rng + ?Sized>(rng: &mut R, n: usize, shape: PreorderShape) -> FuzzyRelation {
    let d = quasi_metric(rng, n, shape, |r| r.gen_range(0.0..2.5));
    let values = d.into_iter().map(|x| (-x).exp()).collect();
    FuzzyRelation::new(n, values).expect("generated relation is valid")
}

/// A crisp preorder: reflexive transitive closure of a random digraph.
pub fn crisp_preorder<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> FuzzyRelation {
    let mut reach = vec![false; n * n];
    for u in 0..n {
        reach[u * n + u] = true;
        for v in 0..n {
            if u != v && rng.gen_bool(density.clamp(0.0, 1.0)) {
                reach[u * n + v] = true;
            }
        }
    }
    for k in 0..n {
        for u in 0..n {
            if reach[u * n + k] {
                for v in 0..n {
                    if reach[k * n + v] {
                        reach[u * n + v] = true;
                    }
                }
            }
        }
    }
    let values = reach.into_iter().map(f64::from).collect();
    FuzzyRelation::new(n, values).expect("generated relation is valid")
}

/// The relation whose φ-image is `r_phi`: a preorder for the φ-conjugated
/// family whenever `r_phi` is one for the base family.
pub fn pull_back(r_phi: &FuzzyRelation, phi: &Bijection) -> FuzzyRelation {
    let values = r_phi.values().iter().map(|&x| phi.inverse(x)).collect();
    FuzzyRelation::new(r_phi.n(), values).expect("bijection maps into [0, 1]")
}

pub fn random_bijection<R: Rng + ?Sized>(rng: &mut R) -> Bijection {
    match rng.gen_range(0..3) {
        0 => Bijection::Identity,
        1 => Bijection::Power(rng.gen_range(0.5..2.5)),
        _ => {
            let k = rng.gen_range(1..4);
            let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.95)).collect();
            let mut ys: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.95)).collect();
            xs.sort_by(f64::total_cmp);
            ys.sort_by(f64::total_cmp);
            xs.dedup_by(|a, b| (*a - *b).abs() < 0.02);
            ys.dedup_by(|a, b| (*a - *b).abs() < 0.02);
            let k = xs.len().min(ys.len());
            let mut bp = vec![(0.0, 0.0)];
            bp.extend(xs[..k].iter().copied().zip(ys[..k].iter().copied()));
            bp.push((1.0, 1.0));
            Bijection::piecewise_linear(bp).unwrap_or(Bijection::Identity)
        }
    }
}

/// Memberships in `[0, 1]` with a share of exact zeros and ones.
pub fn fuzzy_set<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FuzzySet {
    let values = (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..=1.0),
        })
        .collect();
    FuzzySet::new(values).expect("generated memberships are degrees")
}

pub fn crisp_labels<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect()
}

/// `n` instances with `m` attributes on a coarse grid and a random decision.
pub fn dataset<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Dataset {
    let attributes = (0..n)
        .map(|_| (0..m).map(|_| f64::from(rng.gen_range(0..20u8)) * 0.5).collect())
        .collect();
    let decision = fuzzy_set(rng, n).into_vec();
    let ranges = (0..m).map(|_| 10.0).collect();
    Dataset::new(attributes, decision, Some(ranges)).expect("generated dataset is valid")
}

/// A random permutation of `0..n`.
pub fn permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
