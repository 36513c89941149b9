mod common;

use granulate::approx::crisp_cost;
use granulate::connectives::{Family, ResidualTriplet};
use granulate::oracle::{self, kkt_check, simplex_solve, LpOutcome, QuadraticProgram};
use granulate::rough::{granularity_report, lower_approximation, upper_approximation};
use granulate::{
    complement_solve, granular_approx_mse, granular_approx_quantile, monotone_approximation_crisp,
    random, Error, FuzzyRelation, FuzzySet, GranularProblem, LossSpec, SolveOptions,
};
use rand::Rng;

fn lp_optimum(problem: &GranularProblem, p: f64) -> f64 {
    let product = problem.triplet().family() == Family::ProductIso;
    match simplex_solve(&oracle::quantile_lp(problem.r_phi(), problem.abar_phi(), product, p)).unwrap() {
        LpOutcome::Optimal { value, .. } => value,
        other => panic!("{other:?}"),
    }
}

#[test]
fn iris_quantile_rows() {
    let (r, a) = common::iris();
    let problem = GranularProblem::new(r, a, ResidualTriplet::lukasiewicz(), common::rounded_table_options()).unwrap();
    let rows = [
        (0.0, [0.0, 0.0, 0.475, 0.708]),
        (0.25, [0.0, 0.0, 0.475, 0.708]),
        (0.5, [0.325, 0.292, 0.8, 1.0]),
        (0.75, [0.525, 0.492, 1.0, 1.0]),
        (1.0, [0.525, 0.492, 1.0, 1.0]),
    ];
    for (p, want) in rows {
        let got = problem.quantile(p).unwrap();
        assert!(common::max_diff(got.memberships.memberships(), &want) <= 0.005, "p={p}: {:?}", got.memberships);
    }
}

#[test]
fn estate_quantile_rows_and_band() {
    let (r, a) = common::estate();
    let problem = GranularProblem::new(r, a, ResidualTriplet::lukasiewicz(), Default::default()).unwrap();
    let rows = [
        (0.0, [0.18, 0.472, 0.158, 0.567, 0.195]),
        (0.25, [0.18, 0.472, 0.158, 0.567, 0.195]),
        (0.75, [0.343, 0.54, 0.435, 0.843, 0.444]),
        (1.0, [0.438, 0.634, 0.529, 0.938, 0.538]),
    ];
    for (p, want) in rows {
        let got = problem.quantile(p).unwrap();
        assert!(common::max_diff(got.memberships.memberships(), &want) <= 0.005, "p={p}");
    }
    // At p = 0.5 the optimum is not unique; the published row lies in the band.
    let published = [0.18, 0.54, 0.226, 0.594, 0.195];
    let (lo, up) = problem.band(0.5, 1e-4).unwrap();
    for u in 0..5 {
        assert!(lo.memberships.get(u) - 0.0015 <= published[u] && published[u] <= up.memberships.get(u) + 0.0015);
    }
    let at = problem.quantile(0.5).unwrap();
    assert!((at.objective - 0.206).abs() < 1e-9);
    assert!((LossSpec::Quantile(0.5).total(problem.abar_phi(), &published) - at.objective).abs() < 0.001);
}

#[test]
fn golden_mse() {
    let (r, a) = common::iris();
    let problem = GranularProblem::new(r, a, ResidualTriplet::lukasiewicz(), common::rounded_table_options()).unwrap();
    let got = problem.mse().unwrap();
    assert!(common::max_diff(got.memberships.memberships(), &[0.221, 0.187, 0.696, 0.896]) <= 0.005);
    let (r, a) = common::estate();
    let got = granular_approx_mse(&r, &a, &ResidualTriplet::lukasiewicz()).unwrap();
    assert!(common::max_diff(got.memberships.memberships(), &[0.195, 0.54, 0.286, 0.695, 0.295]) <= 0.005);
}

#[test]
fn quantile_objective_equals_simplex() {
    let mut rng = common::rng(100);
    for i in 0..80 {
        let family = if i % 2 == 0 { Family::LukasiewiczIso } else { Family::ProductIso };
        let n = rng.gen_range(1..=8);
        let problem = common::random_problem(&mut rng, family, n);
        let p = f64::from(rng.gen_range(1..10u8)) / 10.0;
        let ga = problem.quantile(p).unwrap();
        let lp = lp_optimum(&problem, p);
        assert!((ga.objective - lp).abs() < 1e-7, "{family} p={p}: {} vs {lp}", ga.objective);
        assert!((ga.diagnostics.dual_objective.unwrap() - lp).abs() < 1e-7);
        let lo = problem.quantile_min(p).unwrap();
        assert!((lo.objective - lp).abs() < 1e-7);
        for u in 0..n {
            assert!(lo.phi_values[u] <= ga.phi_values[u] + 1e-9);
        }
    }
}

#[test]
fn outputs_are_granular_and_bounded_by_rough_approximations() {
    let mut rng = common::rng(101);
    for _ in 0..100 {
        let family = common::random_family(&mut rng);
        let n = rng.gen_range(1..=20);
        let problem = common::random_problem(&mut rng, family, n);
        let (r, t, a) = (problem.relation(), problem.triplet(), problem.observed());
        let lo = lower_approximation(r, t, a).unwrap();
        let up = upper_approximation(r, t, a).unwrap();
        let p = rng.gen_range(0.01..0.99);
        for ga in [problem.quantile(p).unwrap(), problem.quantile_min(p).unwrap(), problem.mse().unwrap()] {
            assert!(granularity_report(r, t, &ga.memberships, 1e-8).unwrap().representable);
            assert!(ga.feasibility_residual <= 1e-9);
            for u in 0..n {
                let x = ga.memberships.get(u);
                assert!(lo.get(u) - 1e-9 <= x && x <= up.get(u) + 1e-9);
            }
        }
        assert!(problem.quantile(0.0).unwrap().memberships.max_abs_diff(&lo) <= 1e-9);
        assert!(problem.quantile(1.0).unwrap().memberships.max_abs_diff(&up) <= 1e-9);
    }
}

#[test]
fn sweep_is_monotone_and_matches_independent_solves() {
    let mut rng = common::rng(102);
    let ps: Vec<f64> = (1..20).map(|k| f64::from(k) * 0.05).collect();
    for _ in 0..40 {
        let family = common::random_family(&mut rng);
        let n = rng.gen_range(1..=12);
        let problem = common::random_problem(&mut rng, family, n);
        let sweep = problem.quantile_sweep(&ps).unwrap();
        for w in sweep.windows(2) {
            for u in 0..n {
                assert!(w[0].memberships.get(u) <= w[1].memberships.get(u) + 1e-8);
            }
        }
        for (ga, &p) in sweep.iter().zip(&ps) {
            assert!((ga.objective - problem.quantile(p).unwrap().objective).abs() < 1e-8);
        }
    }
}

#[test]
fn complement_route_matches_direct_problem() {
    let mut rng = common::rng(103);
    for _ in 0..60 {
        let n = rng.gen_range(1..=10);
        let problem = common::random_problem(&mut rng, Family::LukasiewiczIso, n);
        let p = f64::from(rng.gen_range(1..10u8)) / 10.0;
        let direct = problem.quantile(p).unwrap();
        let co = problem.complement(p).unwrap();
        assert!((direct.objective - co.objective).abs() <= 1e-8);
        let smallest = problem.quantile_min(p).unwrap();
        assert!(common::max_diff(&co.phi_values, &smallest.phi_values) <= 1e-8);
        let (lo, up) = problem.band(p, 1e-6).unwrap();
        for u in 0..n {
            let width = up.memberships.get(u) - lo.memberships.get(u);
            assert!((direct.memberships.get(u) - co.memberships.get(u)).abs() <= width + 1e-8);
        }
    }
    let (r, a) = common::estate();
    assert!(matches!(
        complement_solve(&r, &a, &ResidualTriplet::product(), 0.5),
        Err(Error::UnsupportedFamily(_))
    ));
}

#[test]
fn exact_rational_mode_agrees() {
    let mut rng = common::rng(104);
    for _ in 0..20 {
        let family = common::random_family(&mut rng);
        let n = rng.gen_range(1..=5);
        let problem = common::random_problem(&mut rng, family, n);
        let exact = GranularProblem::new(
            problem.relation().clone(),
            problem.observed().clone(),
            problem.triplet().clone(),
            SolveOptions { exact_rational: true, ..Default::default() },
        )
        .unwrap();
        let a = problem.quantile(0.3).unwrap();
        let b = exact.quantile(0.3).unwrap();
        assert!(b.diagnostics.exact);
        assert!(common::max_diff(&a.phi_values, &b.phi_values) < 1e-9);
    }
}

#[test]
fn crisp_reduction_matches_brute_force() {
    let mut rng = common::rng(105);
    for _ in 0..40 {
        let n = rng.gen_range(1..=10);
        let density = rng.gen_range(0.05..0.4);
        let dom = random::crisp_preorder(&mut rng, n, density);
        let labels = random::crisp_labels(&mut rng, n);
        for p in [0.25, 0.5, 0.75] {
            let fast = monotone_approximation_crisp(&dom, &labels, p).unwrap();
            let (_, best) = oracle::brute_force_crisp(&dom, &labels, p).unwrap();
            assert_eq!(oracle::crisp_labelling_cost(&labels, &fast, p), best);
            assert!((crisp_cost(&labels, &fast, p) - best).abs() < 1e-12);
            for u in 0..n {
                for v in 0..n {
                    if dom.get(u, v) == 1.0 {
                        assert!(fast[u] >= fast[v]);
                    }
                }
            }
        }
    }
}

#[test]
fn mse_is_certified_and_order_independent() {
    let mut rng = common::rng(106);
    for _ in 0..50 {
        let family = common::random_family(&mut rng);
        let n = rng.gen_range(1..=20);
        let problem = common::random_problem(&mut rng, family, n);
        let ga = problem.mse().unwrap();
        assert!(ga.diagnostics.kkt_residual.unwrap() <= 1e-6);
        let product = family == Family::ProductIso;
        let qp = QuadraticProgram::granular(problem.r_phi(), problem.abar_phi(), product);
        let rep = kkt_check(&qp, &ga.phi_values, 1e-7);
        assert!(rep.max_residual() <= 1e-6, "{rep:?}");
        let reversed = GranularProblem::new(
            problem.relation().clone(),
            problem.observed().clone(),
            problem.triplet().clone(),
            SolveOptions { reverse_constraint_order: true, ..Default::default() },
        )
        .unwrap()
        .mse()
        .unwrap();
        assert!(common::max_diff(&ga.phi_values, &reversed.phi_values) <= 1e-6);
    }
}

#[test]
fn representable_input_is_a_fixed_point() {
    let mut rng = common::rng(107);
    for _ in 0..30 {
        let family = common::random_family(&mut rng);
        let n = rng.gen_range(1..=10);
        let problem = common::random_problem(&mut rng, family, n);
        let up = upper_approximation(problem.relation(), problem.triplet(), problem.observed()).unwrap();
        let fixed = GranularProblem::new(problem.relation().clone(), up.clone(), problem.triplet().clone(), Default::default()).unwrap();
        for loss in [LossSpec::Quantile(0.3), LossSpec::SquaredError] {
            let ga = fixed.solve(loss).unwrap();
            assert!(ga.memberships.max_abs_diff(&up) <= 1e-7, "{loss:?}");
        }
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let (r, a) = common::estate();
    let t = ResidualTriplet::lukasiewicz();
    assert!(matches!(granular_approx_quantile(&r, &a, &t, 1.5), Err(Error::InvalidParameter(_))));
    assert!(matches!(
        granular_approx_quantile(&r, &a, &ResidualTriplet::minimum(), 0.5),
        Err(Error::UnsupportedFamily(_))
    ));
    let short = FuzzySet::new(vec![0.1, 0.2]).unwrap();
    assert!(matches!(granular_approx_quantile(&r, &short, &t, 0.5), Err(Error::DimensionMismatch { .. })));
    let bad = FuzzyRelation::from_rows(&[vec![1.0, 0.9, 0.0], vec![0.0, 1.0, 0.9], vec![0.0, 0.0, 1.0]]).unwrap();
    let a3 = FuzzySet::new(vec![0.1, 0.2, 0.3]).unwrap();
    assert!(matches!(granular_approx_mse(&bad, &a3, &t), Err(Error::NotTransitive { .. })));
    let problem = GranularProblem::new(r, a, t, Default::default()).unwrap();
    assert!(problem.band(0.5, 0.0).is_err());
    assert!(problem.band(0.999, 0.01).is_err());
    let dom = FuzzyRelation::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(monotone_approximation_crisp(&dom, &[0, 1], 0.5), Err(Error::NotCrisp { .. })));
}
