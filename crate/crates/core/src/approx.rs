//! Granular approximation solvers.
//!
//! All solving happens in φ-space: with `α_u = φ(Â(u))` the granularity
//! constraints become linear, `α_v − α_u ≤ 1 − R_φ(u,v)` for the nilpotent
//! family and `R_φ(u,v)·α_v ≤ α_u` for the strict one. Quantile problems are
//! solved through their flow duals and the primal is read off as cheapest
//! delivery costs; the squared loss is handled by dual coordinate ascent
//! (Hildreth's method, i.e. Dykstra's projection for half-spaces).

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::connectives::{Family, ResidualTriplet};
use crate::error::{Error, Result};
use crate::flow::{BipartiteFlowNetwork, FlowEngine, FlowMode, Scalar};
use crate::relation::FuzzyRelation;
use crate::rough::{lower_approximation, upper_approximation, FuzzySet};
use crate::EPS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LossSpec {
    /// `L_p(y, ŷ) = p·(y − ŷ)⁺ + (1 − p)·(ŷ − y)⁺`.
    Quantile(f64),
    /// `(y − ŷ)²`.
    SquaredError,
}

impl LossSpec {
    pub fn quantile(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(LossSpec::Quantile(p))
    }

    pub fn loss(&self, y: f64, yhat: f64) -> f64 {
        match *self {
            LossSpec::Quantile(p) => {
                if y >= yhat {
                    p * (y - yhat)
                } else {
                    (1.0 - p) * (yhat - y)
                }
            }
            LossSpec::SquaredError => (y - yhat) * (y - yhat),
        }
    }

    pub fn total(&self, y: &[f64], yhat: &[f64]) -> f64 {
        y.iter().zip(yhat).map(|(&a, &b)| self.loss(a, b)).sum()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} lies outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Slack allowed when validating T-transitivity of the relation.
    pub transitivity_tolerance: f64,
    /// Run the flow engines in exact rational arithmetic.
    pub exact_rational: bool,
    /// Coordinate-ascent stopping threshold on the largest update.
    pub mse_tolerance: f64,
    pub mse_max_sweeps: usize,
    /// Visit the squared-loss constraints in reverse order.
    pub reverse_constraint_order: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            transitivity_tolerance: EPS,
            exact_rational: false,
            mse_tolerance: 1e-10,
            mse_max_sweeps: 1_000_000,
            reverse_constraint_order: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMode {
    ClosedForm,
    AdditiveFlow,
    MultiplicativeFlow,
    CoordinateAscent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mode: SolverMode,
    /// Augmentations or sweeps.
    pub iterations: usize,
    /// `pΣĀ_φ − flow cost` for flow solves.
    pub dual_objective: Option<f64>,
    pub kkt_residual: Option<f64>,
    pub exact: bool,
}

impl Diagnostics {
    fn new(mode: SolverMode) -> Self {
        Diagnostics {
            mode,
            iterations: 0,
            dual_objective: None,
            kkt_residual: None,
            exact: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularApproximation {
    pub loss: LossSpec,
    /// `Â`.
    pub memberships: FuzzySet,
    /// `α_u = φ(Â(u))`.
    pub phi_values: Vec<f64>,
    /// Total loss in φ-space.
    pub objective: f64,
    /// Largest violation of the linear granularity constraints.
    pub feasibility_residual: f64,
    pub diagnostics: Diagnostics,
}

/// Which optimal vertex a quantile solve reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Selection {
    Max,
    Min,
}

/// A validated instance: T-preorder, observations and triplet.
#[derive(Debug, Clone)]
pub struct GranularProblem {
    relation: FuzzyRelation,
    observed: FuzzySet,
    triplet: ResidualTriplet,
    r_phi: FuzzyRelation,
    abar_phi: Vec<f64>,
    options: SolveOptions,
}

impl GranularProblem {
    pub fn new(
        relation: FuzzyRelation,
        observed: FuzzySet,
        triplet: ResidualTriplet,
        options: SolveOptions,
    ) -> Result<Self> {
        match triplet.family() {
            Family::LukasiewiczIso | Family::ProductIso => {}
            other => {
                return Err(Error::UnsupportedFamily(format!(
                    "granular approximation needs the Lukasiewicz or product family, got {other}"
                )))
            }
        }
        if relation.n() != observed.len() {
            return Err(Error::DimensionMismatch {
                expected: relation.n(),
                found: observed.len(),
            });
        }
        relation.validate_preorder(&triplet, options.transitivity_tolerance)?;
        let phi = triplet.bijection();
        let r_phi = relation.phi_image(phi);
        let abar_phi = observed.memberships().iter().map(|&x| phi.forward(x)).collect();
        Ok(GranularProblem {
            relation,
            observed,
            triplet,
            r_phi,
            abar_phi,
            options,
        })
    }

    pub fn relation(&self) -> &FuzzyRelation {
        &self.relation
    }

    pub fn observed(&self) -> &FuzzySet {
        &self.observed
    }

    pub fn triplet(&self) -> &ResidualTriplet {
        &self.triplet
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    pub fn n(&self) -> usize {
        self.relation.n()
    }

    /// `R_φ`.
    pub fn r_phi(&self) -> &FuzzyRelation {
        &self.r_phi
    }

    /// `Ā_φ`.
    pub fn abar_phi(&self) -> &[f64] {
        &self.abar_phi
    }

    pub fn flow_mode(&self) -> FlowMode {
        match self.triplet.family() {
            Family::ProductIso => FlowMode::Multiplicative,
            _ => FlowMode::Additive,
        }
    }

    /// The dual network for demand `p`.
    pub fn network(&self, p: f64) -> Result<BipartiteFlowNetwork> {
        BipartiteFlowNetwork::from_relation(self.flow_mode(), &self.r_phi, &self.abar_phi, p)
    }

    /// Loss of a φ-space vector against `Ā_φ`.
    pub fn objective(&self, loss: LossSpec, alpha: &[f64]) -> f64 {
        loss.total(&self.abar_phi, alpha)
    }

    /// Largest violation of the φ-space granularity constraints over all pairs.
    pub fn feasibility_residual(&self, alpha: &[f64]) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for u in 0..n {
            for v in 0..n {
                let r = self.r_phi.get(u, v);
                let excess = match self.flow_mode() {
                    FlowMode::Additive => alpha[v] - alpha[u] - (1.0 - r),
                    FlowMode::Multiplicative => r * alpha[v] - alpha[u],
                };
                worst = worst.max(excess);
            }
        }
        worst
    }

    fn finish(&self, loss: LossSpec, alpha: Vec<f64>, diagnostics: Diagnostics) -> GranularApproximation {
        let phi = self.triplet.bijection();
        let memberships =
            FuzzySet::from_unchecked(alpha.iter().map(|&a| phi.inverse(a)).collect());
        GranularApproximation {
            loss,
            objective: self.objective(loss, &alpha),
            feasibility_residual: self.feasibility_residual(&alpha),
            memberships,
            phi_values: alpha,
            diagnostics,
        }
    }

    fn closed_form(&self, p: f64) -> Result<GranularApproximation> {
        let set = if p == 0.0 {
            lower_approximation(&self.relation, &self.triplet, &self.observed)?
        } else {
            upper_approximation(&self.relation, &self.triplet, &self.observed)?
        };
        let phi = self.triplet.bijection();
        let alpha: Vec<f64> = set.memberships().iter().map(|&x| phi.forward(x)).collect();
        let mut ga = self.finish(LossSpec::Quantile(p), alpha, Diagnostics::new(SolverMode::ClosedForm));
        ga.memberships = set;
        Ok(ga)
    }

    fn flow_diagnostics(&self) -> Diagnostics {
        let mode = match self.flow_mode() {
            FlowMode::Additive => SolverMode::AdditiveFlow,
            FlowMode::Multiplicative => SolverMode::MultiplicativeFlow,
        };
        let mut d = Diagnostics::new(mode);
        d.exact = self.options.exact_rational;
        d
    }

    fn flow_solve<S: Scalar>(&self, p: f64, select: Selection) -> Result<GranularApproximation> {
        let net = self.network(p)?;
        let mut engine = FlowEngine::<S>::new(&net)?;
        engine.run()?;
        let alpha = match select {
            Selection::Max => engine.primal_max()?,
            Selection::Min => engine.primal_min()?,
        };
        let mut diag = self.flow_diagnostics();
        diag.iterations = engine.iterations();
        diag.dual_objective = Some(self.dual_objective(p, engine.cost().to_f64()));
        Ok(self.finish(LossSpec::Quantile(p), alpha, diag))
    }

    fn dual_objective(&self, p: f64, flow_cost: f64) -> f64 {
        p * self.abar_phi.iter().sum::<f64>() - flow_cost
    }

    fn quantile_select(&self, p: f64, select: Selection) -> Result<GranularApproximation> {
        check_p(p)?;
        if p == 0.0 || p == 1.0 {
            return self.closed_form(p);
        }
        if self.options.exact_rational {
            self.flow_solve::<BigRational>(p, select)
        } else {
            self.flow_solve::<f64>(p, select)
        }
    }

    /// The pointwise largest minimizer of the `p`-quantile loss.
    pub fn quantile(&self, p: f64) -> Result<GranularApproximation> {
        self.quantile_select(p, Selection::Max)
    }

    /// The pointwise smallest minimizer of the `p`-quantile loss.
    pub fn quantile_min(&self, p: f64) -> Result<GranularApproximation> {
        self.quantile_select(p, Selection::Min)
    }

    /// Solves for non-decreasing `ps` on one flow, raising the demand step by
    /// step, so the outputs are pointwise non-decreasing in `p`.
    pub fn quantile_sweep(&self, ps: &[f64]) -> Result<Vec<GranularApproximation>> {
        for &p in ps {
            check_p(p)?;
        }
        if ps.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "p values of a sweep must be non-decreasing".into(),
            ));
        }
        if self.options.exact_rational {
            self.sweep_with::<BigRational>(ps)
        } else {
            self.sweep_with::<f64>(ps)
        }
    }

    fn sweep_with<S: Scalar>(&self, ps: &[f64]) -> Result<Vec<GranularApproximation>> {
        let net = self.network(0.0)?;
        let mut engine = FlowEngine::<S>::new(&net)?;
        let mut out = Vec::with_capacity(ps.len());
        for &p in ps {
            if p == 0.0 || p == 1.0 {
                out.push(self.closed_form(p)?);
                continue;
            }
            engine.set_demand(S::from_f64(p))?;
            let before = engine.iterations();
            engine.run()?;
            let mut diag = self.flow_diagnostics();
            diag.iterations = engine.iterations() - before;
            diag.dual_objective = Some(self.dual_objective(p, engine.cost().to_f64()));
            out.push(self.finish(LossSpec::Quantile(p), engine.primal_max()?, diag));
        }
        Ok(out)
    }

    /// Brackets the optimal set at `p`: the smallest minimizer at `p − eps`
    /// and the largest at `p + eps`.
    pub fn band(&self, p: f64, eps: f64) -> Result<(GranularApproximation, GranularApproximation)> {
        if !(eps > 0.0 && p - eps > 0.0 && p + eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "band needs 0 < p − eps and p + eps < 1, got p = {p}, eps = {eps}"
            )));
        }
        let lower = self.quantile_min(p - eps)?;
        let upper = self.quantile(p + eps)?;
        Ok((lower, upper))
    }

    /// Solves the `L_{1−p}` problem over `R⁻¹` and `coĀ` and maps the answer
    /// back through the negator. The objective is reported for the direct
    /// problem.
    pub fn complement(&self, p: f64) -> Result<GranularApproximation> {
        check_p(p)?;
        if self.triplet.family() != Family::LukasiewiczIso {
            return Err(Error::UnsupportedFamily(
                "the complement route needs an involutive negator (Lukasiewicz family)".into(),
            ));
        }
        let co = GranularProblem::new(
            self.relation.inverse(),
            self.observed.complement(&self.triplet),
            self.triplet.clone(),
            self.options.clone(),
        )?;
        let dual = co.quantile(1.0 - p)?;
        let alpha: Vec<f64> = dual.phi_values.iter().map(|a| (1.0 - a).clamp(0.0, 1.0)).collect();
        let mut ga = self.finish(LossSpec::Quantile(p), alpha, dual.diagnostics);
        ga.memberships = dual.memberships.complement(&self.triplet);
        Ok(ga)
    }

    fn constraints(&self) -> Vec<HalfSpace> {
        let n = self.n();
        let mut cons = Vec::new();
        for u in 0..n {
            for v in 0..n {
                let r = self.r_phi.get(u, v);
                if u == v || r <= EPS {
                    continue;
                }
                cons.push(match self.flow_mode() {
                    FlowMode::Additive => HalfSpace {
                        u,
                        v,
                        coef: 1.0,
                        rhs: 1.0 - r,
                    },
                    FlowMode::Multiplicative => HalfSpace {
                        u,
                        v,
                        coef: r,
                        rhs: 0.0,
                    },
                });
            }
        }
        if self.options.reverse_constraint_order {
            cons.reverse();
        }
        cons
    }

    /// The unique minimizer of the squared loss.
    pub fn mse(&self) -> Result<GranularApproximation> {
        let y = &self.abar_phi;
        let cons = self.constraints();
        let (alpha, lambda, sweeps) = hildreth(y, &cons, &self.options)?;
        let (alpha, lambda) = polish(y, &cons, alpha, lambda);
        let kkt = kkt_residual(y, &cons, &alpha, &lambda);
        let alpha: Vec<f64> = alpha.into_iter().map(|a| a.clamp(0.0, 1.0)).collect();
        let mut diag = Diagnostics::new(SolverMode::CoordinateAscent);
        diag.iterations = sweeps;
        diag.kkt_residual = Some(kkt);
        Ok(self.finish(LossSpec::SquaredError, alpha, diag))
    }

    pub fn solve(&self, loss: LossSpec) -> Result<GranularApproximation> {
        match loss {
            LossSpec::Quantile(p) => self.quantile(p),
            LossSpec::SquaredError => self.mse(),
        }
    }
}

/// `coef·α_v − α_u ≤ rhs`.
#[derive(Debug, Clone, Copy)]
struct HalfSpace {
    u: usize,
    v: usize,
    coef: f64,
    rhs: f64,
}

impl HalfSpace {
    fn value(&self, a: &[f64]) -> f64 {
        self.coef * a[self.v] - a[self.u]
    }

    fn norm2(&self) -> f64 {
        1.0 + self.coef * self.coef
    }
}

fn hildreth(y: &[f64], cons: &[HalfSpace], opts: &SolveOptions) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let mut alpha = y.to_vec();
    let mut lambda = vec![0.0; cons.len()];
    let mut last = f64::INFINITY;
    for sweep in 1..=opts.mse_max_sweeps {
        let mut biggest: f64 = 0.0;
        for (k, c) in cons.iter().enumerate() {
            let norm2 = c.norm2();
            let step = (c.value(&alpha) - c.rhs) / norm2;
            let next = (lambda[k] + step).max(0.0);
            let d = next - lambda[k];
            if d != 0.0 {
                alpha[c.v] -= d * c.coef;
                alpha[c.u] += d;
                lambda[k] = next;
                biggest = biggest.max(d.abs() * norm2.sqrt());
            }
        }
        last = biggest;
        if biggest < opts.mse_tolerance {
            return Ok((alpha, lambda, sweep));
        }
    }
    Err(Error::Convergence {
        iterations: opts.mse_max_sweeps,
        last_update: last,
        kkt_residual: kkt_residual(y, cons, &alpha, &lambda),
    })
}

/// Projects onto the active constraints as equalities; kept only if the
/// result is feasible, has nonnegative multipliers and stays close.
fn polish(y: &[f64], cons: &[HalfSpace], alpha: Vec<f64>, lambda: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let active: Vec<usize> = (0..cons.len()).filter(|&k| lambda[k] > 0.0).collect();
    if active.is_empty() {
        return (alpha, lambda);
    }
    let n = y.len();
    let m = active.len();
    let mut g = DMatrix::<f64>::zeros(m, n);
    let mut h = DVector::<f64>::zeros(m);
    for (row, &k) in active.iter().enumerate() {
        let c = cons[k];
        g[(row, c.v)] += c.coef;
        g[(row, c.u)] -= 1.0;
        h[row] = c.rhs;
    }
    let yv = DVector::from_column_slice(y);
    let gram = &g * g.transpose();
    let Ok(mu) = gram.svd(true, true).solve(&(&g * &yv - &h), 1e-12) else {
        return (alpha, lambda);
    };
    let cand = &yv - g.transpose() * &mu;
    let cand: Vec<f64> = cand.iter().copied().collect();
    let feasible = cons.iter().all(|c| c.value(&cand) - c.rhs <= 1e-12);
    let close = cand.iter().zip(&alpha).all(|(a, b)| (a - b).abs() <= 1e-6);
    if !(feasible && close && mu.iter().all(|&x| x >= -1e-12)) {
        return (alpha, lambda);
    }
    let mut new_lambda = vec![0.0; cons.len()];
    for (row, &k) in active.iter().enumerate() {
        new_lambda[k] = mu[row].max(0.0);
    }
    (cand, new_lambda)
}

fn kkt_residual(y: &[f64], cons: &[HalfSpace], alpha: &[f64], lambda: &[f64]) -> f64 {
    let mut grad: Vec<f64> = alpha.iter().zip(y).map(|(a, b)| a - b).collect();
    let mut worst: f64 = 0.0;
    for (c, &l) in cons.iter().zip(lambda) {
        grad[c.v] += l * c.coef;
        grad[c.u] -= l;
        let slack = c.value(alpha) - c.rhs;
        worst = worst.max(slack).max(l * slack.abs()).max(-l);
    }
    grad.iter().fold(worst, |w, g| w.max(g.abs()))
}

pub fn granular_approx_quantile(
    r: &FuzzyRelation,
    a: &FuzzySet,
    t: &ResidualTriplet,
    p: f64,
) -> Result<GranularApproximation> {
    check_p(p)?;
    GranularProblem::new(r.clone(), a.clone(), t.clone(), SolveOptions::default())?.quantile(p)
}

pub fn granular_approx_mse(
    r: &FuzzyRelation,
    a: &FuzzySet,
    t: &ResidualTriplet,
) -> Result<GranularApproximation> {
    GranularProblem::new(r.clone(), a.clone(), t.clone(), SolveOptions::default())?.mse()
}

pub fn quantile_band(
    r: &FuzzyRelation,
    a: &FuzzySet,
    t: &ResidualTriplet,
    p: f64,
    eps: f64,
) -> Result<(GranularApproximation, GranularApproximation)> {
    GranularProblem::new(r.clone(), a.clone(), t.clone(), SolveOptions::default())?.band(p, eps)
}

pub fn complement_solve(
    r: &FuzzyRelation,
    a: &FuzzySet,
    t: &ResidualTriplet,
    p: f64,
) -> Result<GranularApproximation> {
    if t.family() != Family::LukasiewiczIso {
        return Err(Error::UnsupportedFamily(
            "the complement route needs an involutive negator (Lukasiewicz family)".into(),
        ));
    }
    GranularProblem::new(r.clone(), a.clone(), t.clone(), SolveOptions::default())?.complement(p)
}

/// Monotone relabelling of binary labels under a crisp dominance preorder:
/// `dominance(u, v) = 1` means `u` must not be labelled below `v`.
pub fn monotone_approximation_crisp(
    dominance: &FuzzyRelation,
    labels: &[u8],
    p: f64,
) -> Result<Vec<u8>> {
    check_p(p)?;
    dominance.check_crisp()?;
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParameter(format!("crisp label {bad} is not 0 or 1")));
    }
    let observed = FuzzySet::new(labels.iter().map(|&l| f64::from(l)).collect())?;
    let problem = GranularProblem::new(
        dominance.clone(),
        observed,
        ResidualTriplet::lukasiewicz(),
        SolveOptions::default(),
    )?;
    let ga = problem.quantile(p)?;
    Ok(ga.memberships.memberships().iter().map(|&x| u8::from(x >= 0.5)).collect())
}

/// Total `p`-quantile loss of a relabelling.
pub fn crisp_cost(labels: &[u8], relabelled: &[u8], p: f64) -> f64 {
    let loss = LossSpec::Quantile(p);
    labels
        .iter()
        .zip(relabelled)
        .map(|(&a, &b)| loss.loss(f64::from(a), f64::from(b)))
        .sum()
}
