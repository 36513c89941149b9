use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::residual::ResidualNetwork;
use crate::error::{Error, Result};
use crate::relation::FuzzyRelation;
use crate::EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMode {
    /// Cross edges carry costs `M = 1 − R_φ`; all multipliers are one.
    Additive,
    /// Cross edges carry multipliers `R_φ` and no cost.
    Multiplicative,
}

/// Supply node `0`, intermediate nodes `e_u = 1 + u`, destinations
/// `f_u = 1 + n + u`. Supply edges `0 → e_u` cost `Ā_φ(u)` per unit and carry
/// at most one unit; cross edges `e_v → f_u` are unbounded. Every destination
/// demands `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteFlowNetwork {
    n: usize,
    mode: FlowMode,
    supply_cost: Vec<f64>,
    /// Row-major over `(v, u)`: cost or multiplier of `e_v → f_u`, if present.
    cross: Vec<Option<f64>>,
    demand: f64,
}

impl BipartiteFlowNetwork {
    /// `cross[v * n + u]` is the cost (additive) or multiplier
    /// (multiplicative) of `e_v → f_u`; `None` leaves the edge out. Diagonal
    /// edges are mandatory.
    pub fn new(
        mode: FlowMode,
        supply_cost: Vec<f64>,
        cross: Vec<Option<f64>>,
        demand: f64,
    ) -> Result<Self> {
        let n = supply_cost.len();
        if cross.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: cross.len(),
            });
        }
        if !(0.0..=1.0).contains(&demand) {
            return Err(Error::InvalidParameter(format!("demand {demand} outside [0, 1]")));
        }
        for (u, &c) in supply_cost.iter().enumerate() {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "supply cost of instance {u} must be finite and nonnegative, got {c}"
                )));
            }
        }
        for v in 0..n {
            for u in 0..n {
                let w = cross[v * n + u];
                match (mode, w) {
                    (_, None) if u == v => {
                        return Err(Error::InvalidParameter(format!(
                            "diagonal edge ({v}, {v}) is missing"
                        )))
                    }
                    (_, None) => {}
                    (FlowMode::Additive, Some(c)) => {
                        if !(c.is_finite() && c >= 0.0) || (u == v && c.abs() > EPS) {
                            return Err(Error::InvalidParameter(format!(
                                "cost of cross edge ({v}, {u}) is invalid: {c}"
                            )));
                        }
                    }
                    (FlowMode::Multiplicative, Some(m)) => {
                        if !(m > 0.0) {
                            return Err(Error::NonPositiveMultiplier {
                                from: v,
                                to: u,
                                value: m,
                            });
                        }
                        if m > 1.0 + EPS || (u == v && (m - 1.0).abs() > EPS) {
                            return Err(Error::InvalidParameter(format!(
                                "multiplier of cross edge ({v}, {u}) is invalid: {m}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(BipartiteFlowNetwork {
            n,
            mode,
            supply_cost,
            cross,
            demand,
        })
    }

    /// Dual network of the quantile problem for a φ-space relation and
    /// φ-space observations. Multiplicative networks omit edges with
    /// `R_φ ≤ ε`; additive ones keep every pair.
    pub fn from_relation(
        mode: FlowMode,
        r_phi: &FuzzyRelation,
        abar_phi: &[f64],
        demand: f64,
    ) -> Result<Self> {
        let n = r_phi.n();
        if abar_phi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: abar_phi.len(),
            });
        }
        let mut cross = vec![None; n * n];
        for v in 0..n {
            for u in 0..n {
                let r = if u == v { 1.0 } else { r_phi.get(v, u) };
                cross[v * n + u] = match mode {
                    FlowMode::Additive => Some(1.0 - r),
                    FlowMode::Multiplicative if r > EPS => Some(r),
                    FlowMode::Multiplicative => None,
                };
            }
        }
        BipartiteFlowNetwork::new(mode, abar_phi.to_vec(), cross, demand)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> FlowMode {
        self.mode
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }

    pub fn with_demand(&self, demand: f64) -> Result<Self> {
        BipartiteFlowNetwork::new(self.mode, self.supply_cost.clone(), self.cross.clone(), demand)
    }

    pub fn supply_cost(&self, u: usize) -> f64 {
        self.supply_cost[u]
    }

    pub fn supply_costs(&self) -> &[f64] {
        &self.supply_cost
    }

    /// Cost or multiplier of `e_v → f_u`.
    pub fn cross(&self, v: usize, u: usize) -> Option<f64> {
        self.cross[v * self.n + u]
    }

    /// `(v, u, weight)` in row-major order.
    pub fn cross_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.cross
            .iter()
            .enumerate()
            .filter_map(move |(k, w)| w.map(|w| (k / n, k % n, w)))
    }

    pub fn e(&self, u: usize) -> usize {
        1 + u
    }

    pub fn f(&self, u: usize) -> usize {
        1 + self.n + u
    }

    /// Empty-flow dump, one edge per line: `from to cost capacity multiplier flow`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for u in 0..self.n {
            let _ = writeln!(out, "0 {} {} 1 1 0", self.e(u), self.supply_cost[u]);
        }
        for (v, u, w) in self.cross_edges() {
            let (c, m) = match self.mode {
                FlowMode::Additive => (w, 1.0),
                FlowMode::Multiplicative => (0.0, w),
            };
            let _ = writeln!(out, "{} {} {} inf {} 0", self.e(v), self.f(u), c, m);
        }
        out
    }

    pub(crate) fn empty_residual(&self) -> Result<ResidualNetwork<f64>> {
        Ok(super::engine::FlowEngine::<f64>::new(self)?.residual().clone())
    }
}
