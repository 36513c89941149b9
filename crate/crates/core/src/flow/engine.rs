//! Successive shortest paths on the bipartite dual network, for both the
//! additive (standard) and multiplicative (generalized) variants.

use super::network::{BipartiteFlowNetwork, FlowMode};
use super::residual::{Edge, ResidualNetwork};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// State handed to an observer after each augmentation.
pub struct IterationRecord<'a, S> {
    /// Augmentations since the engine was created.
    pub iteration: usize,
    pub destination: usize,
    pub delivered: S,
    pub residual: &'a ResidualNetwork<S>,
}

#[derive(Debug, Clone)]
pub struct FlowEngine<S> {
    n: usize,
    mode: FlowMode,
    residual: ResidualNetwork<S>,
    /// `(v, u)` for each cross edge, in edge order after the `n` supply edges.
    cross: Vec<(usize, usize)>,
    /// Edge index of the diagonal edge `e_u → f_u`.
    diagonal: Vec<usize>,
    demand: S,
    iterations: usize,
    iteration_cap: usize,
}

impl<S: Scalar> FlowEngine<S> {
    /// Zero flow on `net`; the network's own demand is installed as target.
    pub fn new(net: &BipartiteFlowNetwork) -> Result<Self> {
        let n = net.n();
        let mut edges = Vec::new();
        for u in 0..n {
            edges.push(Edge::new(
                0,
                net.e(u),
                S::from_f64(net.supply_cost(u)),
                Some(S::one()),
                S::one(),
            ));
        }
        let mut cross = Vec::new();
        let mut diagonal = vec![usize::MAX; n];
        let mut min_mult = 1.0f64;
        for (v, u, w) in net.cross_edges() {
            let (cost, mult) = match net.mode() {
                FlowMode::Additive => (S::from_f64(w), S::one()),
                FlowMode::Multiplicative => {
                    min_mult = min_mult.min(w);
                    (S::zero(), S::from_f64(w))
                }
            };
            if u == v {
                diagonal[u] = edges.len();
            }
            edges.push(Edge::new(net.e(v), net.f(u), cost, None, mult));
            cross.push((v, u));
        }
        let residual = ResidualNetwork::new(2 * n + 1, 0, edges)?;
        let n2 = (n * n).max(1);
        let iteration_cap = 10usize
            .saturating_mul(n2)
            .saturating_mul(1 + (1.0 / min_mult).ceil().min(1e12) as usize);
        let mut engine = FlowEngine {
            n,
            mode: net.mode(),
            residual,
            cross,
            diagonal,
            demand: S::zero(),
            iterations: 0,
            iteration_cap,
        };
        engine.set_demand(S::from_f64(net.demand()))?;
        Ok(engine)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> FlowMode {
        self.mode
    }

    pub fn residual(&self) -> &ResidualNetwork<S> {
        &self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn iteration_cap(&self) -> usize {
        self.iteration_cap
    }

    pub fn demand(&self) -> &S {
        &self.demand
    }

    /// Raises the per-destination demand. Lowering it is refused: the sweep
    /// only ever adds flow.
    pub fn set_demand(&mut self, p: S) -> Result<()> {
        if p < self.demand || p > S::one() || p < S::zero() {
            return Err(Error::InvalidParameter(format!(
                "demand must be non-decreasing within [0, 1]: {} after {}",
                p.to_f64(),
                self.demand.to_f64()
            )));
        }
        self.demand = p;
        Ok(())
    }

    pub fn delivered(&self, u: usize) -> S {
        self.residual.net_inflow(self.f(u))
    }

    pub fn remaining(&self, u: usize) -> S {
        self.demand.clone() - self.delivered(u)
    }

    /// Serves every destination in ascending order until its demand is met.
    pub fn run(&mut self) -> Result<()> {
        self.run_observed(|_| {})
    }

    pub fn run_observed(&mut self, mut observer: impl FnMut(&IterationRecord<'_, S>)) -> Result<()> {
        let start = self.iterations;
        for u in 0..self.n {
            while self.remaining(u) > S::dust() {
                if self.iterations - start >= self.iteration_cap {
                    return Err(Error::IterationCap {
                        cap: self.iteration_cap,
                        context: format!("serving destination {u}"),
                    });
                }
                let delivered = self.augment_once(u)?;
                observer(&IterationRecord {
                    iteration: self.iterations,
                    destination: u,
                    delivered,
                    residual: &self.residual,
                });
            }
        }
        Ok(())
    }

    /// One augmentation along the cheapest residual path to `f_u`. Returns the
    /// amount delivered at `f_u`.
    pub fn augment_once(&mut self, u: usize) -> Result<S> {
        let remaining = self.remaining(u);
        if remaining <= S::dust() {
            return Ok(S::zero());
        }
        let labels = self
            .residual
            .labels()
            .map_err(|cycle| Error::NegativeCycle { cycle })?;
        let tree = self.residual.tight_tree(&labels);
        let dest = self.f(u);
        let path = self
            .residual
            .path_to(&tree, dest)
            .ok_or_else(|| Error::Infeasible(format!("destination {u} is unreachable")))?;
        let (amount, delivered) = self.residual.path_capacity(&path, &remaining);
        if amount <= S::zero() {
            return Err(Error::Infeasible(format!(
                "zero-capacity augmenting path to destination {u}"
            )));
        }
        self.residual.push(&path, &amount);
        self.iterations += 1;
        Ok(delivered)
    }

    /// Cheapest cost of delivering one more unit at each destination.
    pub fn delivery_costs(&self) -> Result<Vec<Option<S>>> {
        let labels = self
            .residual
            .labels()
            .map_err(|cycle| Error::NegativeCycle { cycle })?;
        Ok((0..self.n).map(|u| labels.dist[self.f(u)].clone()).collect())
    }

    /// The pointwise largest optimal primal vector, read off as delivery
    /// costs and clamped to `[0, 1]`.
    pub fn primal_max(&self) -> Result<Vec<f64>> {
        Ok(self
            .delivery_costs()?
            .into_iter()
            .map(|d| d.map_or(1.0, |d| d.to_f64().clamp(0.0, 1.0)))
            .collect())
    }

    /// The pointwise smallest optimal primal vector.
    ///
    /// Computed on the merged network (one node per instance, all direct
    /// edges) rather than the bipartite one, where a destination can only
    /// reach the supply when its own middle edge carries flow.
    pub fn primal_min(&self) -> Result<Vec<f64>> {
        let merged = self.merged_residual()?;
        if let Some(cycle) = merged.find_negative_cycle() {
            return Err(Error::NegativeCycle { cycle });
        }
        let low = merged.labels_to_source();
        Ok((0..self.n)
            .map(|u| low[1 + u].as_ref().map_or(0.0, |l| l.to_f64().clamp(0.0, 1.0)))
            .collect())
    }

    /// The flow re-expressed on `n + 1` nodes: supply `0` and instance `1 + u`.
    pub fn merged_residual(&self) -> Result<ResidualNetwork<S>> {
        let mut edges = Vec::new();
        for u in 0..self.n {
            let e = self.residual.edge(u);
            let mut m = Edge::new(0, 1 + u, e.cost.clone(), e.capacity.clone(), S::one());
            m.flow = e.flow.clone();
            edges.push(m);
        }
        for (k, &(v, u)) in self.cross.iter().enumerate() {
            if u == v {
                continue;
            }
            let e = self.residual.edge(self.n + k);
            let mut m = Edge::new(1 + v, 1 + u, e.cost.clone(), None, e.multiplier.clone());
            m.flow = e.flow.clone();
            edges.push(m);
        }
        ResidualNetwork::new(self.n + 1, 0, edges)
    }

    pub fn cost(&self) -> S {
        self.residual.total_cost()
    }

    pub fn supply_flow(&self, u: usize) -> S {
        self.residual.edge(u).flow.clone()
    }

    /// `(v, u, z)` for every cross edge `e_v → f_u`.
    pub fn cross_flows(&self) -> Vec<(usize, usize, S)> {
        self.cross
            .iter()
            .enumerate()
            .map(|(k, &(v, u))| (v, u, self.residual.edge(self.n + k).flow.clone()))
            .collect()
    }

    pub fn diagonal_edge(&self, u: usize) -> usize {
        self.diagonal[u]
    }

    fn f(&self, u: usize) -> usize {
        1 + self.n + u
    }
}
