//! Network-flow duals of the quantile problems.
//!
//! [`ssp_min_cost`] solves the additive network with successive shortest
//! paths; [`generalized_ssp`] solves the multiplicative one, where flow on a
//! cross edge is scaled by its multiplier. Both run on [`FlowEngine`], which
//! is generic over [`Scalar`] so that small instances can be solved in exact
//! rational arithmetic.

mod engine;
mod network;
mod residual;
mod scalar;

pub use engine::{FlowEngine, IterationRecord};
pub use network::{BipartiteFlowNetwork, FlowMode};
pub use residual::{Arc, Edge, Labels, ResidualNetwork};
pub use scalar::Scalar;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge flows of a bipartite network, in tail units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSolution {
    pub network: BipartiteFlowNetwork,
    /// `z(0, e_u)`.
    pub supply_flow: Vec<f64>,
    /// Row-major `z(e_v, f_u)`; zero where the edge is absent.
    pub cross_flow: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
}

/// A simple supply-to-destination path `(0, e_origin, f_destination)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFlow {
    pub origin: usize,
    pub destination: usize,
    /// Amount leaving the supply node.
    pub withdrawn: f64,
    /// Amount arriving at the destination.
    pub delivered: f64,
}

impl FlowSolution {
    pub fn from_engine<S: Scalar>(network: &BipartiteFlowNetwork, engine: &FlowEngine<S>) -> Self {
        let n = network.n();
        let supply_flow = (0..n).map(|u| engine.supply_flow(u).to_f64()).collect();
        let mut cross_flow = vec![0.0; n * n];
        for (v, u, z) in engine.cross_flows() {
            cross_flow[v * n + u] = z.to_f64();
        }
        FlowSolution {
            network: network.clone(),
            supply_flow,
            cross_flow,
            cost: engine.cost().to_f64(),
            iterations: engine.iterations(),
        }
    }

    pub fn n(&self) -> usize {
        self.network.n()
    }

    pub fn z(&self, v: usize, u: usize) -> f64 {
        self.cross_flow[v * self.n() + u]
    }

    /// Multiplier of `e_v → f_u` (one in additive mode, zero if absent).
    fn gain(&self, v: usize, u: usize) -> f64 {
        match (self.network.mode(), self.network.cross(v, u)) {
            (_, None) => 0.0,
            (FlowMode::Additive, Some(_)) => 1.0,
            (FlowMode::Multiplicative, Some(m)) => m,
        }
    }

    fn edge_cost(&self, v: usize, u: usize) -> f64 {
        match (self.network.mode(), self.network.cross(v, u)) {
            (FlowMode::Additive, Some(c)) => c,
            _ => 0.0,
        }
    }

    pub fn delivered(&self, u: usize) -> f64 {
        (0..self.n()).map(|v| self.z(v, u) * self.gain(v, u)).sum()
    }

    pub fn recompute_cost(&self) -> f64 {
        let n = self.n();
        let mut cost: f64 = (0..n)
            .map(|u| self.network.supply_cost(u) * self.supply_flow[u])
            .sum();
        for v in 0..n {
            for u in 0..n {
                cost += self.edge_cost(v, u) * self.z(v, u);
            }
        }
        cost
    }

    /// Largest violation of capacity, conservation and demand constraints.
    pub fn max_violation(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for u in 0..n {
            let s = self.supply_flow[u];
            worst = worst.max(-s).max(s - 1.0);
            let out: f64 = (0..n).map(|w| self.z(u, w)).sum();
            worst = worst.max((s - out).abs());
            worst = worst.max((self.delivered(u) - self.network.demand()).abs());
            for v in 0..n {
                worst = worst.max(-self.z(v, u));
                if self.network.cross(v, u).is_none() {
                    worst = worst.max(self.z(v, u).abs());
                }
            }
        }
        worst
    }

    /// One summand per cross edge with positive flow.
    pub fn decompose(&self) -> Vec<PathFlow> {
        let n = self.n();
        let mut paths = Vec::new();
        for v in 0..n {
            for u in 0..n {
                let z = self.z(v, u);
                if z > 1e-12 {
                    paths.push(PathFlow {
                        origin: v,
                        destination: u,
                        withdrawn: z,
                        delivered: z * self.gain(v, u),
                    });
                }
            }
        }
        paths
    }

    /// `z(0, e_u) > 0 ⇒ z(e_u, f_u) > 0` for every `u`.
    pub fn has_middle_edge_property(&self) -> bool {
        (0..self.n()).all(|u| self.supply_flow[u] <= 1e-12 || self.z(u, u) > 1e-12)
    }

    /// The residual network induced by these flows.
    pub fn residual(&self) -> Result<ResidualNetwork<f64>> {
        let n = self.n();
        let mut res = self.network.empty_residual()?;
        let edges = res.edges_mut();
        for (u, e) in edges.iter_mut().take(n).enumerate() {
            e.flow = self.supply_flow[u];
        }
        for e in edges.iter_mut().skip(n) {
            let v = e.from - 1;
            let u = e.to - 1 - n;
            e.flow = self.cross_flow[v * n + u];
        }
        Ok(res)
    }
}

/// Sums path flows back into `(supply_flow, cross_flow)`.
pub fn recompose(n: usize, paths: &[PathFlow]) -> (Vec<f64>, Vec<f64>) {
    let mut supply = vec![0.0; n];
    let mut cross = vec![0.0; n * n];
    for p in paths {
        supply[p.origin] += p.withdrawn;
        cross[p.origin * n + p.destination] += p.withdrawn;
    }
    (supply, cross)
}

pub fn decompose(sol: &FlowSolution) -> Vec<PathFlow> {
    sol.decompose()
}

fn solve(net: &BipartiteFlowNetwork) -> Result<FlowSolution> {
    let mut engine = FlowEngine::<f64>::new(net)?;
    engine.run()?;
    Ok(FlowSolution::from_engine(net, &engine))
}

/// Successive shortest paths on an additive network.
pub fn ssp_min_cost(net: &BipartiteFlowNetwork) -> Result<FlowSolution> {
    if net.mode() != FlowMode::Additive {
        return Err(Error::InvalidParameter(
            "successive shortest paths needs an additive network".into(),
        ));
    }
    solve(net)
}

/// Generalized successive shortest paths on a multiplicative network.
pub fn generalized_ssp(net: &BipartiteFlowNetwork) -> Result<FlowSolution> {
    if net.mode() != FlowMode::Multiplicative {
        return Err(Error::InvalidParameter(
            "generalized successive shortest paths needs a multiplicative network".into(),
        ));
    }
    solve(net)
}

/// Cheapest cost of one more unit at each destination `f_u` of a bipartite
/// residual network; `+∞` when unreachable.
pub fn cheapest_delivery_costs(res: &ResidualNetwork<f64>) -> Result<Vec<f64>> {
    let n = (res.nodes() - 1) / 2;
    let labels = res.labels().map_err(|cycle| Error::NegativeCycle { cycle })?;
    Ok((0..n)
        .map(|u| labels.dist[1 + n + u].unwrap_or(f64::INFINITY))
        .collect())
}

/// Reroutes flow so that every instance drawing from the supply also serves
/// itself through its middle edge `e_u → f_u`.
///
/// For `u` violating the property, with `z(e_v, f_u) > 0` and
/// `z(e_u, f_w) > 0`, flow is pushed around
/// `e_u → f_u → e_v → f_w → e_u`. Transitivity makes this cycle cost-neutral
/// (or cheaper); pairs whose edge `e_v → f_w` is absent are skipped.
pub fn fix_middle_edges(sol: &FlowSolution) -> FlowSolution {
    const DUST: f64 = 1e-12;
    let n = sol.n();
    let mut out = sol.clone();
    let net = &sol.network;
    for _ in 0..=n * n {
        let mut progressed = false;
        for u in 0..n {
            if out.supply_flow[u] <= DUST || out.z(u, u) > DUST {
                continue;
            }
            let candidate = (0..n)
                .filter(|&v| v != u && out.z(v, u) > DUST)
                .flat_map(|v| (0..n).map(move |w| (v, w)))
                .find(|&(v, w)| {
                    w != u
                        && out.z(u, w) > DUST
                        && net.cross(v, w).is_some()
                        && match net.mode() {
                            FlowMode::Additive => {
                                let c = |a, b| net.cross(a, b).unwrap_or(f64::INFINITY);
                                c(v, w) - c(v, u) - c(u, w) <= 1e-9
                            }
                            FlowMode::Multiplicative => true,
                        }
                });
            let Some((v, w)) = candidate else { continue };
            match net.mode() {
                FlowMode::Additive => {
                    let theta = out.z(v, u).min(out.z(u, w));
                    out.cross_flow[u * n + u] += theta;
                    out.cross_flow[v * n + u] -= theta;
                    out.cross_flow[v * n + w] += theta;
                    out.cross_flow[u * n + w] -= theta;
                }
                FlowMode::Multiplicative => {
                    let r = |a, b| net.cross(a, b).unwrap_or(0.0);
                    let (r_vu, r_uw, r_vw) = (r(v, u), r(u, w), r(v, w));
                    let ratio = r_vw / (r_vu * r_uw);
                    // θ arrives at f_u through the middle edge; e_u gives up Δ on e_u → f_w.
                    let theta = (out.z(v, u) * r_vu).min(out.z(u, w) / ratio);
                    let delta = theta * ratio;
                    out.cross_flow[u * n + u] += theta;
                    out.cross_flow[v * n + u] -= theta / r_vu;
                    out.cross_flow[v * n + w] += theta / r_vu;
                    out.cross_flow[u * n + w] -= delta;
                    out.supply_flow[u] -= delta - theta;
                }
            }
            for z in out.cross_flow.iter_mut().chain(out.supply_flow.iter_mut()) {
                if z.abs() <= DUST {
                    *z = 0.0;
                }
            }
            progressed = true;
        }
        if !progressed {
            break;
        }
    }
    out.cost = out.recompute_cost();
    out
}
