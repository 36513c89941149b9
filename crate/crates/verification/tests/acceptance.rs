//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use granulate::connectives::{Bijection, Family, ResidualTriplet};
use granulate::flow::{cheapest_delivery_costs, FlowEngine};
use granulate::oracle::{self, kkt_check, simplex_solve, LpOutcome, QuadraticProgram};
use granulate::random::{self, PreorderShape};
use granulate::relation::triangular_similarity;
use granulate::rough::{granularity_report, lower_approximation, upper_approximation};
use granulate::{monotone_approximation_crisp, FuzzyRelation, FuzzySet, GranularProblem, SolveOptions};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const GOLDEN_TOL: f64 = 0.005;
const CLOSED_FORM_TOL: f64 = 1e-9;
const RUNTIME_LIMIT: Duration = Duration::from_secs(1);
const DUALITY_TOL: f64 = 1e-6;
const SLACK_TOL: f64 = 1e-8;
const BOUNDARY_TOL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-8;
const COMPLEMENT_TOL: f64 = 1e-8;
const KKT_TOL: f64 = 1e-6;
const RUN_TO_RUN_TOL: f64 = 1e-6;
const GRID_TOL: f64 = 1e-9;
const EXCHANGE_TOL: f64 = 1e-7;
/// The published matrices are rounded to 3 decimals.
const TABLE_TRANSITIVITY_TOL: f64 = 0.002;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (x, y)| w.max((x - y).abs()))
}

fn table_problem(rows: &[Vec<f64>], a: &[f64]) -> GranularProblem {
    GranularProblem::new(
        FuzzyRelation::from_rows(rows).unwrap(),
        FuzzySet::new(a.to_vec()).unwrap(),
        ResidualTriplet::lukasiewicz(),
        SolveOptions { transitivity_tolerance: TABLE_TRANSITIVITY_TOL, ..Default::default() },
    )
    .unwrap()
}

fn iris() -> GranularProblem {
    table_problem(
        &[
            vec![1.0, 0.917, 0.525, 0.208],
            vec![0.917, 1.0, 0.492, 0.292],
            vec![0.525, 0.492, 1.0, 0.667],
            vec![0.208, 0.292, 0.667, 1.0],
        ],
        &[0.0, 0.0, 1.0, 1.0],
    )
}

fn estate() -> GranularProblem {
    table_problem(
        &[
            vec![1.0, 0.6, 0.569, 0.5, 0.6],
            vec![0.6, 1.0, 0.687, 0.696, 0.454],
            vec![0.569, 0.687, 1.0, 0.591, 0.635],
            vec![0.5, 0.696, 0.591, 1.0, 0.6],
            vec![0.6, 0.454, 0.635, 0.6, 1.0],
        ],
        &[0.18, 0.54, 0.158, 0.938, 0.195],
    )
}

fn family(rng: &mut StdRng) -> Family {
    if rng.gen_bool(0.5) {
        Family::LukasiewiczIso
    } else {
        Family::ProductIso
    }
}

/// A random T-preorder instance with a random bijection.
fn random_problem(rng: &mut StdRng, family: Family, n: usize) -> GranularProblem {
    let shape = PreorderShape {
        density: rng.gen_range(0.2..0.9),
        symmetric: rng.gen_bool(0.3),
        quantized: rng.gen_bool(0.3),
    };
    let phi = random::random_bijection(rng);
    let r_phi = match family {
        Family::LukasiewiczIso => random::lukasiewicz_preorder(rng, n, shape),
        _ => random::product_preorder(rng, n, shape),
    };
    let r = random::pull_back(&r_phi, &phi);
    let a = random::fuzzy_set(rng, n);
    GranularProblem::new(r, a, ResidualTriplet::new(family, phi), SolveOptions::default()).unwrap()
}

fn golden_rows(problem: &GranularProblem, rows: &[(f64, &[f64])]) -> Vec<(f64, f64)> {
    rows.iter()
        .map(|&(p, want)| (p, max_diff(problem.quantile(p).unwrap().memberships.memberships(), want)))
        .collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let problem = iris();
    let rows: [(f64, &[f64]); 5] = [
        (0.0, &[0.0, 0.0, 0.475, 0.708]),
        (0.25, &[0.0, 0.0, 0.475, 0.708]),
        (0.5, &[0.325, 0.292, 0.8, 1.0]),
        (0.75, &[0.525, 0.492, 1.0, 1.0]),
        (1.0, &[0.525, 0.492, 1.0, 1.0]),
    ];
    let devs = golden_rows(&problem, &rows);
    let (r, t, a) = (problem.relation(), problem.triplet(), problem.observed());
    let lo = lower_approximation(r, t, a).unwrap();
    let up = upper_approximation(r, t, a).unwrap();
    let closed = problem.quantile(0.0).unwrap().memberships.max_abs_diff(&lo)
        .max(problem.quantile(1.0).unwrap().memberships.max_abs_diff(&up));
    let elapsed = start.elapsed();
    let worst = devs.iter().fold(0.0f64, |w, d| w.max(d.1));
    verdict(
        worst <= GOLDEN_TOL && closed <= CLOSED_FORM_TOL && elapsed < RUNTIME_LIMIT,
        format!("max dev {worst:.4}, closed-form dev {closed:.1e}, {elapsed:?}"),
    )
}

fn criterion_2() -> Verdict {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for (make, want) in [
        (iris as fn() -> GranularProblem, &[0.221, 0.187, 0.696, 0.896][..]),
        (estate, &[0.195, 0.54, 0.286, 0.695, 0.295][..]),
    ] {
        let start = Instant::now();
        let ga = make().mse().unwrap();
        slowest = slowest.max(start.elapsed());
        worst = worst.max(max_diff(ga.memberships.memberships(), want));
    }
    verdict(
        worst <= GOLDEN_TOL && slowest < RUNTIME_LIMIT,
        format!("max dev {worst:.4}, slowest {slowest:?}"),
    )
}

fn criterion_3() -> Verdict {
    let problem = estate();
    let published_half = [0.18, 0.54, 0.226, 0.594, 0.195];
    let rows: [(f64, &[f64]); 5] = [
        (0.0, &[0.18, 0.472, 0.158, 0.567, 0.195]),
        (0.25, &[0.18, 0.472, 0.158, 0.567, 0.195]),
        (0.5, &published_half),
        (0.75, &[0.343, 0.54, 0.435, 0.843, 0.444]),
        (1.0, &[0.438, 0.634, 0.529, 0.938, 0.538]),
    ];
    let devs = golden_rows(&problem, &rows);
    let worst = devs.iter().fold(0.0f64, |w, d| w.max(d.1));
    let per_row: Vec<String> = devs.iter().map(|(p, d)| format!("p={p}: {d:.3}")).collect();
    let mut detail = format!("max dev {worst:.3} ({})", per_row.join(", "));
    if worst > GOLDEN_TOL {
        let hi = problem.quantile(0.5).unwrap();
        let lo = problem.quantile_min(0.5).unwrap();
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
        let inside = (0..5).all(|u| {
            lo.memberships.get(u) - GOLDEN_TOL <= published_half[u] && published_half[u] <= hi.memberships.get(u) + GOLDEN_TOL
        });
        detail.push_str(&format!(
            "; p=0.5 optimal set spans [{}] to [{}], objective {:.3} (published row objective {:.3}, inside: {inside})",
            fmt(lo.memberships.memberships()),
            fmt(hi.memberships.memberships()),
            hi.objective,
            problem.objective(granulate::LossSpec::Quantile(0.5), &published_half),
        ));
    }
    verdict(worst <= GOLDEN_TOL, detail)
}

fn criterion_4() -> Verdict {
    let mut rng = rng(4);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let fam = if k % 2 == 0 { Family::LukasiewiczIso } else { Family::ProductIso };
        let n = rng.gen_range(1..=8);
        let problem = random_problem(&mut rng, fam, n);
        for i in 1..=9 {
            let p = f64::from(i) / 10.0;
            let dual = problem.quantile(p).unwrap().diagnostics.dual_objective.unwrap();
            let lp = oracle::quantile_lp(problem.r_phi(), problem.abar_phi(), fam == Family::ProductIso, p);
            let LpOutcome::Optimal { value, .. } = simplex_solve(&lp).unwrap() else {
                return verdict(false, format!("instance {k}: simplex found no optimum"));
            };
            worst = worst.max((dual - value).abs());
        }
    }
    verdict(worst <= DUALITY_TOL, format!("max |flow dual − simplex| {worst:.1e} over 1800 solves"))
}

fn criterion_5() -> Verdict {
    let mut rng = rng(5);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..500 {
        let fam = family(&mut rng);
        let n = rng.gen_range(1..=30);
        let problem = random_problem(&mut rng, fam, n);
        let p = rng.gen_range(0.0..=1.0);
        let outputs = [
            problem.quantile(p).unwrap(),
            problem.quantile_min(p.clamp(0.01, 0.99)).unwrap(),
            problem.mse().unwrap(),
        ];
        for ga in &outputs {
            let rep = granularity_report(problem.relation(), problem.triplet(), &ga.memberships, SLACK_TOL).unwrap();
            worst = worst.max(rep.max_slack());
            failures += usize::from(!rep.representable);
        }
    }
    verdict(failures == 0, format!("{failures} non-representable of 1500, max slack {worst:.1e}"))
}

fn criterion_6() -> Verdict {
    let mut rng = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let fam = family(&mut rng);
        let n = rng.gen_range(1..=30);
        let problem = random_problem(&mut rng, fam, n);
        let (r, t, a) = (problem.relation(), problem.triplet(), problem.observed());
        let lo = lower_approximation(r, t, a).unwrap();
        let up = upper_approximation(r, t, a).unwrap();
        worst = worst
            .max(problem.quantile(0.0).unwrap().memberships.max_abs_diff(&lo))
            .max(problem.quantile(1.0).unwrap().memberships.max_abs_diff(&up));
    }
    verdict(worst <= BOUNDARY_TOL, format!("max dev from lower/upper {worst:.1e}"))
}

fn criterion_7() -> Verdict {
    let mut rng = rng(7);
    let ps: Vec<f64> = (1..=19).map(|k| f64::from(k) * 0.05).collect();
    let mut worst_drop = 0.0f64;
    for _ in 0..200 {
        let fam = family(&mut rng);
        let n = rng.gen_range(1..=20);
        let problem = random_problem(&mut rng, fam, n);
        let sweep = problem.quantile_sweep(&ps).unwrap();
        for w in sweep.windows(2) {
            for u in 0..n {
                worst_drop = worst_drop.max(w[0].memberships.get(u) - w[1].memberships.get(u));
            }
        }
    }
    verdict(worst_drop <= MONOTONE_TOL, format!("largest decrease along the sweep {worst_drop:.1e}"))
}

fn criterion_8() -> Verdict {
    let mut rng = rng(8);
    let (mut obj_gap, mut excess) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(1..=15);
        let problem = random_problem(&mut rng, Family::LukasiewiczIso, n);
        let p = f64::from(rng.gen_range(1..10u8)) / 10.0;
        let direct = problem.quantile(p).unwrap();
        let co = problem.complement(p).unwrap();
        obj_gap = obj_gap.max((direct.objective - co.objective).abs());
        let (lo, up) = problem.band(p, 1e-6).unwrap();
        for u in 0..n {
            let width = up.memberships.get(u) - lo.memberships.get(u);
            excess = excess.max((direct.memberships.get(u) - co.memberships.get(u)).abs() - width);
        }
    }
    verdict(
        obj_gap <= COMPLEMENT_TOL && excess <= COMPLEMENT_TOL,
        format!("objective gap {obj_gap:.1e}, pointwise excess over band width {excess:.1e}"),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = rng(9);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let density = rng.gen_range(0.05..0.4);
        let dom = random::crisp_preorder(&mut rng, n, density);
        let labels = random::crisp_labels(&mut rng, n);
        for p in [0.25, 0.5, 0.75] {
            let fast = monotone_approximation_crisp(&dom, &labels, p).unwrap();
            let (_, best) = oracle::brute_force_crisp(&dom, &labels, p).unwrap();
            let monotone = (0..n).all(|u| (0..n).all(|v| dom.get(u, v) < 0.5 || fast[u] >= fast[v]));
            if !monotone || oracle::crisp_labelling_cost(&labels, &fast, p) != best {
                mismatches += 1;
            }
        }
    }
    verdict(mismatches == 0, format!("{mismatches} of 300 differ from brute force"))
}

fn criterion_10() -> Verdict {
    let mut rng = rng(10);
    let (mut kkt, mut drift) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let fam = family(&mut rng);
        let n = rng.gen_range(1..=30);
        let problem = random_problem(&mut rng, fam, n);
        let ga = problem.mse().unwrap();
        let qp = QuadraticProgram::granular(problem.r_phi(), problem.abar_phi(), fam == Family::ProductIso);
        kkt = kkt.max(kkt_check(&qp, &ga.phi_values, 1e-7).max_residual());
        let again = problem.mse().unwrap();
        let reversed = GranularProblem::new(
            problem.relation().clone(),
            problem.observed().clone(),
            problem.triplet().clone(),
            SolveOptions { reverse_constraint_order: true, ..Default::default() },
        )
        .unwrap()
        .mse()
        .unwrap();
        drift = drift
            .max(max_diff(&ga.phi_values, &again.phi_values))
            .max(max_diff(&ga.phi_values, &reversed.phi_values));
    }
    verdict(
        kkt <= KKT_TOL && drift <= RUN_TO_RUN_TOL,
        format!("max KKT residual {kkt:.1e}, run-to-run {drift:.1e}"),
    )
}

fn criterion_11() -> Verdict {
    let mut rng = rng(11);
    let (mut cycles, mut drops, mut iterations) = (0usize, 0usize, 0usize);
    for _ in 0..100 {
        let fam = family(&mut rng);
        let n = rng.gen_range(1..=12);
        let problem = random_problem(&mut rng, fam, n);
        let net = problem.network(rng.gen_range(0.05..0.95)).unwrap();
        let mut engine = FlowEngine::<f64>::new(&net).unwrap();
        let mut previous = cheapest_delivery_costs(engine.residual()).unwrap();
        let outcome = engine.run_observed(|rec| {
            iterations += 1;
            if rec.residual.find_negative_cycle().is_some() {
                cycles += 1;
            }
            let now = cheapest_delivery_costs(rec.residual).unwrap();
            if now.iter().zip(&previous).any(|(a, b)| *a < b - 1e-9) {
                drops += 1;
            }
            previous = now;
        });
        if let Err(e) = outcome {
            return verdict(false, format!("solver error: {e}"));
        }
    }
    verdict(
        cycles == 0 && drops == 0,
        format!("{iterations} augmentations, {cycles} with negative cycles, {drops} with cheaper deliveries"),
    )
}

fn criterion_12() -> Verdict {
    let grid: Vec<f64> = (0..=20).map(|i| f64::from(i) / 20.0).collect();
    let mut triplets: Vec<ResidualTriplet> =
        Family::ALL.iter().map(|&f| ResidualTriplet::new(f, Bijection::Identity)).collect();
    for phi in [Bijection::power(0.5).unwrap(), Bijection::power(2.0).unwrap()] {
        triplets.push(ResidualTriplet::new(Family::LukasiewiczIso, phi.clone()));
        triplets.push(ResidualTriplet::new(Family::ProductIso, phi));
    }
    let mut broken = Vec::new();
    for t in &triplets {
        let involutive = grid.iter().all(|&x| (t.negator(t.negator(x)) - x).abs() <= GRID_TOL);
        if involutive != t.has_involutive_negator() {
            broken.push(format!("{t}: involutivity"));
        }
        if !t.is_left_continuous() {
            continue;
        }
        let mut residuation = true;
        let mut exchange = true;
        for &x in &grid {
            for &y in &grid {
                for &z in &grid {
                    let i = t.implicator(x, z);
                    if (t.t_norm(x, y) <= z - GRID_TOL && y > i + GRID_TOL)
                        || (y <= i - GRID_TOL && t.t_norm(x, y) > z + GRID_TOL)
                    {
                        residuation = false;
                    }
                    let lhs = t.implicator(x, t.implicator(y, z));
                    let rhs = t.implicator(t.t_norm(x, y), z);
                    exchange &= (lhs - rhs).abs() <= EXCHANGE_TOL;
                }
            }
        }
        if !residuation {
            broken.push(format!("{t}: residuation"));
        }
        if !exchange {
            broken.push(format!("{t}: exchange"));
        }
    }
    let mut rng = rng(12);
    let lukasiewicz = ResidualTriplet::lukasiewicz();
    let mut intransitive = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=50);
        let m = rng.gen_range(1..=10);
        let r = triangular_similarity(&random::dataset(&mut rng, n, m)).unwrap();
        intransitive += usize::from(!r.check_t_transitive(&lukasiewicz).is_empty());
    }
    let pass = broken.is_empty() && intransitive == 0;
    let mut detail = format!("{} triplets on a 21-point grid, {intransitive} of 100 similarities intransitive", triplets.len());
    if !broken.is_empty() {
        detail.push_str(&format!("; failed: {}", broken.join(", ")));
    }
    verdict(pass, detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("iris quantile table", criterion_1),
        ("golden MSE tables", criterion_2),
        ("real-estate quantile table", criterion_3),
        ("strong duality vs simplex", criterion_4),
        ("granular feasibility", criterion_5),
        ("boundary identities", criterion_6),
        ("monotone p-sweep", criterion_7),
        ("complement duality", criterion_8),
        ("crisp brute force", criterion_9),
        ("MSE KKT and stability", criterion_10),
        ("per-augmentation flow invariants", criterion_11),
        ("connectives and similarity", criterion_12),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}: {name}: {}", k + 1, v.detail);
        if !v.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
