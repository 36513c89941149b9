mod common;

use granulate::connectives::{Family, ResidualTriplet};
use granulate::random;
use granulate::rough::{
    granular_reconstruction, granularity_report, is_granularly_representable, lower_approximation,
    upper_approximation,
};
use granulate::FuzzySet;
use rand::Rng;

fn random_case(seed: u64) -> Vec<(granulate::FuzzyRelation, ResidualTriplet, FuzzySet)> {
    let mut rng = common::rng(seed);
    (0..150)
        .map(|_| {
            let family = common::random_family(&mut rng);
            let n = rng.gen_range(1..15);
            let p = common::random_problem(&mut rng, family, n);
            (p.relation().clone(), p.triplet().clone(), p.observed().clone())
        })
        .collect()
}

#[test]
fn approximations_sandwich_and_are_representable() {
    for (r, t, a) in random_case(1) {
        let lo = lower_approximation(&r, &t, &a).unwrap();
        let up = upper_approximation(&r, &t, &a).unwrap();
        for u in 0..a.len() {
            assert!(lo.get(u) <= a.get(u) + 1e-9 && a.get(u) <= up.get(u) + 1e-9);
        }
        assert!(granularity_report(&r, &t, &lo, 1e-8).unwrap().representable);
        assert!(granularity_report(&r, &t, &up, 1e-8).unwrap().representable);
        let lo2 = lower_approximation(&r, &t, &lo).unwrap();
        let up2 = upper_approximation(&r, &t, &up).unwrap();
        assert!(lo2.max_abs_diff(&lo) < 1e-8 && up2.max_abs_diff(&up) < 1e-8);
    }
}

#[test]
fn representable_sets_are_their_own_reconstruction() {
    for (r, t, a) in random_case(2) {
        let up = upper_approximation(&r, &t, &a).unwrap();
        let rec = granular_reconstruction(&r, &t, &up).unwrap();
        assert!(rec.max_abs_diff(&up) < 1e-8);
    }
}

#[test]
fn finite_averages_stay_representable() {
    let mut rng = common::rng(3);
    for (r, t, a) in random_case(4) {
        let k = rng.gen_range(2..5);
        let mut sets = vec![upper_approximation(&r, &t, &a).unwrap()];
        for _ in 1..k {
            let b = random::fuzzy_set(&mut rng, a.len());
            sets.push(lower_approximation(&r, &t, &b).unwrap());
        }
        // Averages are taken in φ-space, where the constraints are linear or
        // convex in the membership values.
        let phi = t.bijection();
        let mean: Vec<f64> = (0..a.len())
            .map(|u| phi.inverse(sets.iter().map(|s| phi.forward(s.get(u))).sum::<f64>() / k as f64))
            .collect();
        let mean = FuzzySet::new(mean).unwrap();
        assert!(granularity_report(&r, &t, &mean, 1e-8).unwrap().representable, "{t:?}");
    }
}

#[test]
fn iris_violation_report() {
    let (r, a) = common::iris();
    let rep = is_granularly_representable(&r, &ResidualTriplet::lukasiewicz(), &a).unwrap();
    assert!(!rep.representable);
    assert_eq!((rep.violations[0].u, rep.violations[0].v), (0, 2));
    assert!((rep.max_slack() - 0.525).abs() < 1e-12);
}

#[test]
fn estate_approximations() {
    let (r, a) = common::estate();
    let t = ResidualTriplet::new(Family::LukasiewiczIso, Default::default());
    let lo = lower_approximation(&r, &t, &a).unwrap();
    let up = upper_approximation(&r, &t, &a).unwrap();
    assert!(common::max_diff(lo.memberships(), &[0.18, 0.471, 0.158, 0.567, 0.195]) < 0.0015);
    assert!(common::max_diff(up.memberships(), &[0.438, 0.634, 0.529, 0.938, 0.538]) < 0.0015);
}
