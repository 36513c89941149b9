#![allow(dead_code)]

use granulate::connectives::{Family, ResidualTriplet};
use granulate::random::{self, PreorderShape};
use granulate::{FuzzyRelation, FuzzySet, GranularProblem, SolveOptions};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn iris() -> (FuzzyRelation, FuzzySet) {
    let r = FuzzyRelation::from_rows(&[
        vec![1.0, 0.917, 0.525, 0.208],
        vec![0.917, 1.0, 0.492, 0.292],
        vec![0.525, 0.492, 1.0, 0.667],
        vec![0.208, 0.292, 0.667, 1.0],
    ])
    .unwrap();
    (r, FuzzySet::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap())
}

pub fn estate() -> (FuzzyRelation, FuzzySet) {
    let r = FuzzyRelation::from_rows(&[
        vec![1.0, 0.6, 0.569, 0.5, 0.6],
        vec![0.6, 1.0, 0.687, 0.696, 0.454],
        vec![0.569, 0.687, 1.0, 0.591, 0.635],
        vec![0.5, 0.696, 0.591, 1.0, 0.6],
        vec![0.6, 0.454, 0.635, 0.6, 1.0],
    ])
    .unwrap();
    (r, FuzzySet::new(vec![0.18, 0.54, 0.158, 0.938, 0.195]).unwrap())
}

/// The iris matrix is rounded to three decimals and misses transitivity by 0.001.
pub fn rounded_table_options() -> SolveOptions {
    SolveOptions {
        transitivity_tolerance: 0.002,
        ..SolveOptions::default()
    }
}

/// A random valid problem of the given family, with a random bijection.
pub fn random_problem(rng: &mut StdRng, family: Family, n: usize) -> GranularProblem {
    let shape = PreorderShape {
        density: rng.gen_range(0.2..0.9),
        symmetric: rng.gen_bool(0.3),
        quantized: rng.gen_bool(0.3),
    };
    let phi = random::random_bijection(rng);
    let r_phi = match family {
        Family::LukasiewiczIso => random::lukasiewicz_preorder(rng, n, shape),
        Family::ProductIso => random::product_preorder(rng, n, shape),
        other => panic!("no generator for {other}"),
    };
    let r = random::pull_back(&r_phi, &phi);
    let a = random::fuzzy_set(rng, n);
    GranularProblem::new(r, a, ResidualTriplet::new(family, phi), SolveOptions::default())
        .expect("generated problem is valid")
}

pub fn random_family(rng: &mut StdRng) -> Family {
    if rng.gen_bool(0.5) {
        Family::LukasiewiczIso
    } else {
        Family::ProductIso
    }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |w, (x, y)| w.max((x - y).abs()))
}
