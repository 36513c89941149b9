//! Slow reference solvers for cross-checking: a dense two-phase simplex, a
//! KKT certificate for squared-loss problems and exhaustive search over
//! crisp labellings. Nothing here is shared with the production solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::FuzzyRelation;

const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
    /// `(lower, upper)` per variable; `None` is unbounded on that side.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LinearProgram {
    /// All variables nonnegative, no constraints yet.
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let bounds = vec![(Some(0.0), None); objective.len()];
        LinearProgram {
            direction,
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(LinearConstraint { coeffs, sense, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.bounds.len(),
            });
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
        }
        let finite = self.objective.iter().all(|x| x.is_finite())
            && self
                .constraints
                .iter()
                .all(|c| c.rhs.is_finite() && c.coeffs.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::InvalidParameter("linear program has non-finite data".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// How an original variable is expressed in nonnegative standard-form columns.
enum VarMap {
    /// `x = offset + col`.
    Shift { col: usize, offset: f64 },
    /// `x = offset − col`.
    Mirror { col: usize, offset: f64 },
    /// `x = plus − minus`.
    Free { plus: usize, minus: usize },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.cols]
    }

    /// Minimizes `cost · x` over columns `allowed`; Bland's rule throughout.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> std::result::Result<(), ()> {
        loop {
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| cost[b] * self.rows[i][j])
                        .sum::<f64>();
                if reduced < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][j];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(()) };
            self.pivot(r, j);
        }
    }
}

/// Textbook two-phase dense simplex with Bland's anti-cycling rule.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let nv = lp.objective.len();

    // Standard form columns for the original variables.
    let mut maps = Vec::with_capacity(nv);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        match (lo, hi) {
            (Some(l), hi) => {
                maps.push(VarMap::Shift { col: ncols, offset: l });
                if let Some(h) = hi {
                    extra_rows.push((ncols, h - l));
                }
                ncols += 1;
            }
            (None, Some(h)) => {
                maps.push(VarMap::Mirror { col: ncols, offset: h });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Free {
                    plus: ncols,
                    minus: ncols + 1,
                });
                ncols += 2;
            }
        }
    }

    // Rows over the structural columns: (coeffs, sense, rhs).
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirror { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Free { plus, minus } => {
                    coeffs[plus] += a;
                    coeffs[minus] -= a;
                }
            }
        }
        rows.push((coeffs, c.sense, rhs));
    }
    for (col, ub) in extra_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Sense::Le, ub));
    }
    for (coeffs, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for a in coeffs.iter_mut() {
                *a = -*a;
            }
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    // Slack/surplus then artificial columns.
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let total = ncols + n_slack + n_art;
    let art_start = ncols + n_slack;
    let mut tab = Tableau {
        rows: vec![vec![0.0; total + 1]; m],
        basis: vec![0; m],
        cols: total,
    };
    let (mut s, mut a) = (ncols, art_start);
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        tab.rows[i][..ncols].copy_from_slice(coeffs);
        tab.rows[i][total] = *rhs;
        match sense {
            Sense::Le => {
                tab.rows[i][s] = 1.0;
                tab.basis[i] = s;
                s += 1;
            }
            Sense::Ge => {
                tab.rows[i][s] = -1.0;
                s += 1;
                tab.rows[i][a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
            Sense::Eq => {
                tab.rows[i][a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
        }
    }

    // Phase one.
    if n_art > 0 {
        let mut cost = vec![0.0; total];
        for c in cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        let allowed = vec![true; total];
        tab.optimize(&cost, &allowed)
            .map_err(|_| Error::InvalidParameter("phase one cannot be unbounded".into()))?;
        let infeas: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.rhs(i))
            .sum();
        if infeas > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase two.
    let sign = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let mut cost = vec![0.0; total];
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += sign * c,
            VarMap::Mirror { col, .. } => cost[col] -= sign * c,
            VarMap::Free { plus, minus } => {
                cost[plus] += sign * c;
                cost[minus] -= sign * c;
            }
        }
    }
    let allowed: Vec<bool> = (0..total).map(|j| j < art_start).collect();
    if tab.optimize(&cost, &allowed).is_err() {
        return Ok(LpOutcome::Unbounded);
    }
    let mut col_value = vec![0.0; total];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_value[b] = tab.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, offset } => offset + col_value[col],
            VarMap::Mirror { col, offset } => offset - col_value[col],
            VarMap::Free { plus, minus } => col_value[plus] - col_value[minus],
        })
        .collect();
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    Ok(LpOutcome::Optimal { value, x })
}

/// The quantile-loss primal in φ-space with variables `(α, x, y)`:
/// minimize `Σ p·x_u + (1 − p)·y_u` subject to `α_u + x_u − y_u = Ā_φ(u)` and
/// the granularity constraints. `α` is free.
pub fn quantile_lp(r_phi: &FuzzyRelation, abar_phi: &[f64], product: bool, p: f64) -> LinearProgram {
    let n = r_phi.n();
    let mut objective = vec![0.0; 3 * n];
    for u in 0..n {
        objective[n + u] = p;
        objective[2 * n + u] = 1.0 - p;
    }
    let mut lp = LinearProgram::new(Direction::Minimize, objective);
    for u in 0..n {
        lp.bounds[u] = (None, None);
        let mut row = vec![0.0; 3 * n];
        row[u] = 1.0;
        row[n + u] = 1.0;
        row[2 * n + u] = -1.0;
        lp.constrain(row, Sense::Eq, abar_phi[u]);
    }
    for (row, rhs) in granularity_rows(r_phi, product) {
        let mut full = row;
        full.resize(3 * n, 0.0);
        lp.constrain(full, Sense::Le, rhs);
    }
    lp
}

/// Rows `g·α ≤ h` of the φ-space granularity constraints over all ordered
/// pairs with positive relation value.
pub fn granularity_rows(r_phi: &FuzzyRelation, product: bool) -> Vec<(Vec<f64>, f64)> {
    let n = r_phi.n();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let r = r_phi.get(u, v);
            if u == v || r <= 0.0 {
                continue;
            }
            let mut row = vec![0.0; n];
            row[u] = -1.0;
            if product {
                row[v] = r;
                out.push((row, 0.0));
            } else {
                row[v] = 1.0;
                out.push((row, 1.0 - r));
            }
        }
    }
    out
}

/// `minimize Σ (x − target)²` subject to `G x ≤ h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProgram {
    pub target: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl QuadraticProgram {
    pub fn granular(r_phi: &FuzzyRelation, abar_phi: &[f64], product: bool) -> Self {
        let (rows, rhs) = granularity_rows(r_phi, product).into_iter().unzip();
        QuadraticProgram {
            target: abar_phi.to_vec(),
            rows,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Infinity norm of `∇f + Σ λ g` after the best nonnegative fit.
    pub stationarity: f64,
    pub primal_infeasibility: f64,
    /// Largest `λ_k · |slack_k|`.
    pub complementarity: f64,
    /// Largest negative multiplier magnitude.
    pub dual_infeasibility: f64,
    pub active: Vec<usize>,
    pub multipliers: Vec<f64>,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity
            .max(self.primal_infeasibility)
            .max(self.complementarity)
            .max(self.dual_infeasibility)
    }
}

/// Reconstructs multipliers on constraints within `active_tol` of binding by
/// nonnegative least squares and reports the KKT residuals.
pub fn kkt_check(qp: &QuadraticProgram, candidate: &[f64], active_tol: f64) -> KktReport {
    let n = candidate.len();
    let slack: Vec<f64> = qp
        .rows
        .iter()
        .zip(&qp.rhs)
        .map(|(g, h)| g.iter().zip(candidate).map(|(a, x)| a * x).sum::<f64>() - h)
        .collect();
    let primal_infeasibility = slack.iter().fold(0.0f64, |w, &s| w.max(s));
    let active: Vec<usize> = (0..slack.len()).filter(|&k| slack[k] >= -active_tol).collect();
    let grad: Vec<f64> = candidate
        .iter()
        .zip(&qp.target)
        .map(|(x, t)| 2.0 * (x - t))
        .collect();
    let mut a = DMatrix::<f64>::zeros(n, active.len());
    for (col, &k) in active.iter().enumerate() {
        for i in 0..n {
            a[(i, col)] = qp.rows[k][i];
        }
    }
    let b = -DVector::from_column_slice(&grad);
    let lambda = nnls(&a, &b);
    let resid = &a * &lambda - &b;
    let stationarity = resid.iter().fold(0.0f64, |w, r| w.max(r.abs()));
    let complementarity = active
        .iter()
        .zip(lambda.iter())
        .fold(0.0f64, |w, (&k, &l)| w.max(l * slack[k].abs()));
    let dual_infeasibility = lambda.iter().fold(0.0f64, |w, &l| w.max(-l));
    KktReport {
        stationarity,
        primal_infeasibility,
        complementarity,
        dual_infeasibility,
        active,
        multipliers: lambda.iter().copied().collect(),
    }
}

/// Lawson–Hanson: `min ‖A x − b‖` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.ncols();
    let mut x = DVector::<f64>::zeros(m);
    if m == 0 {
        return x;
    }
    let mut passive = vec![false; m];
    let tol = 1e-12 * (1.0 + a.amax()) * (1.0 + b.amax()) * (m as f64);
    for _ in 0..(3 * m + 30) {
        let w = a.transpose() * (b - a * &x);
        let next = (0..m)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = next else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..m).filter(|&k| passive[k]).collect();
            let sub = a.select_columns(&idx);
            let z_sub = match sub.clone().svd(true, true).solve(b, 1e-12) {
                Ok(z) => z,
                Err(_) => return x,
            };
            let mut z = DVector::<f64>::zeros(m);
            for (pos, &k) in idx.iter().enumerate() {
                z[k] = z_sub[pos];
            }
            if idx.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut step = f64::INFINITY;
            for &k in &idx {
                if z[k] <= 0.0 {
                    step = step.min(x[k] / (x[k] - z[k]));
                }
            }
            x = &x + (&z - &x) * step;
            for &k in &idx {
                if x[k] <= 1e-15 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

/// Largest instance handled by [`brute_force_crisp`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// `down·p + up·(1 − p)` where `down` counts labels lowered and `up` raised.
pub fn crisp_labelling_cost(labels: &[u8], relabelled: &[u8], p: f64) -> f64 {
    let down = labels.iter().zip(relabelled).filter(|(a, b)| a > b).count();
    let up = labels.iter().zip(relabelled).filter(|(a, b)| a < b).count();
    down as f64 * p + up as f64 * (1.0 - p)
}

/// Exhaustive minimum of the quantile loss over monotone binary labellings:
/// `dominance(u, v) = 1` forces `label(u) ≥ label(v)`.
pub fn brute_force_crisp(dominance: &FuzzyRelation, labels: &[u8], p: f64) -> Result<(Vec<u8>, f64)> {
    let n = dominance.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let dominated: Vec<u32> = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u && dominance.get(u, v) >= 0.5)
                .fold(0u32, |m, v| m | (1 << v))
        })
        .collect();
    let mut best: Option<(u32, f64)> = None;
    let mut cand = vec![0u8; n];
    for mask in 0u32..(1u32 << n) {
        let monotone = (0..n).all(|u| mask & (1 << u) != 0 || dominated[u] & mask == 0);
        if !monotone {
            continue;
        }
        for (u, c) in cand.iter_mut().enumerate() {
            *c = u8::from(mask & (1 << u) != 0);
        }
        let cost = crisp_labelling_cost(labels, &cand, p);
        if best.is_none_or(|(_, b)| cost < b) {
            best = Some((mask, cost));
        }
    }
    let (mask, cost) = best.expect("the all-ones labelling is monotone");
    let out = (0..n).map(|u| u8::from(mask & (1 << u) != 0)).collect();
    Ok((out, cost))
}
