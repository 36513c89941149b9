//! Residual networks for (generalized) flows.
//!
//! Every edge carries a per-unit cost charged on flow leaving its tail and a
//! positive multiplier: `x` units entering at the tail arrive as `m·x` at the
//! head. Flows are stored in tail units. The reverse residual arc of an edge
//! has gain `1/m`, cost `−c/m` and capacity `m·flow` (in head units).

use std::fmt::Write as _;

use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<S> {
    pub from: usize,
    pub to: usize,
    pub cost: S,
    /// `None` is unbounded.
    pub capacity: Option<S>,
    pub multiplier: S,
    pub flow: S,
}

impl<S: Scalar> Edge<S> {
    pub fn new(from: usize, to: usize, cost: S, capacity: Option<S>, multiplier: S) -> Self {
        Edge {
            from,
            to,
            cost,
            capacity,
            multiplier,
            flow: S::zero(),
        }
    }
}

/// A residual arc: edge `edge` traversed forwards or backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub edge: usize,
    pub forward: bool,
}

/// Shortest "cost per delivered unit" labels from the source. Ties are
/// broken by `supply`, the source units withdrawn per delivered unit, which
/// keeps zero-cost paths with poor gains from being preferred.
#[derive(Debug, Clone)]
pub struct Labels<S> {
    pub dist: Vec<Option<S>>,
    pub supply: Vec<Option<S>>,
}

#[derive(Debug, Clone)]
pub struct ResidualNetwork<S> {
    nodes: usize,
    source: usize,
    edges: Vec<Edge<S>>,
    adjacency: Vec<Vec<Arc>>,
}

impl<S: Scalar> ResidualNetwork<S> {
    pub fn new(nodes: usize, source: usize, edges: Vec<Edge<S>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.from >= nodes || e.to >= nodes || e.from == e.to {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) is not between distinct nodes of a {nodes}-node network",
                    e.from, e.to
                )));
            }
            if e.multiplier <= S::zero() {
                return Err(Error::NonPositiveMultiplier {
                    from: e.from,
                    to: e.to,
                    value: e.multiplier.to_f64(),
                });
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::ParallelEdge {
                    from: e.from,
                    to: e.to,
                });
            }
        }
        let mut adjacency = vec![Vec::new(); nodes];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.from].push(Arc {
                edge: i,
                forward: true,
            });
            adjacency[e.to].push(Arc {
                edge: i,
                forward: false,
            });
        }
        let mut net = ResidualNetwork {
            nodes,
            source,
            edges,
            adjacency,
        };
        for x in 0..nodes {
            let mut adj = std::mem::take(&mut net.adjacency[x]);
            adj.sort_by_key(|a| net.head(*a));
            net.adjacency[x] = adj;
        }
        Ok(net)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge<S> {
        &self.edges[i]
    }

    pub(crate) fn edges_mut(&mut self) -> &mut [Edge<S>] {
        &mut self.edges
    }

    /// Residual arcs leaving `x`, ordered by head node.
    pub fn arcs_from(&self, x: usize) -> impl Iterator<Item = Arc> + '_ {
        self.adjacency[x].iter().copied().filter(|a| self.is_active(*a))
    }

    pub fn tail(&self, a: Arc) -> usize {
        let e = &self.edges[a.edge];
        if a.forward {
            e.from
        } else {
            e.to
        }
    }

    pub fn head(&self, a: Arc) -> usize {
        let e = &self.edges[a.edge];
        if a.forward {
            e.to
        } else {
            e.from
        }
    }

    /// Per-unit cost of the arc, in its own tail units.
    pub fn arc_cost(&self, a: Arc) -> S {
        let e = &self.edges[a.edge];
        if a.forward {
            e.cost.clone()
        } else {
            -(e.cost.clone() / e.multiplier.clone())
        }
    }

    pub fn arc_gain(&self, a: Arc) -> S {
        let e = &self.edges[a.edge];
        if a.forward {
            e.multiplier.clone()
        } else {
            S::one() / e.multiplier.clone()
        }
    }

    /// Remaining capacity in tail units; `None` is unbounded.
    pub fn residual_capacity(&self, a: Arc) -> Option<S> {
        let e = &self.edges[a.edge];
        if a.forward {
            e.capacity.as_ref().map(|c| c.clone() - e.flow.clone())
        } else {
            Some(e.flow.clone() * e.multiplier.clone())
        }
    }

    pub fn is_active(&self, a: Arc) -> bool {
        let e = &self.edges[a.edge];
        if a.forward {
            match &e.capacity {
                None => true,
                Some(c) => c.clone() - e.flow.clone() > S::dust(),
            }
        } else {
            e.flow > S::dust()
        }
    }

    /// Label at the head of `a` obtained from label `d` at its tail.
    pub fn relax(&self, a: Arc, d: &S) -> S {
        let e = &self.edges[a.edge];
        if a.forward {
            (d.clone() + e.cost.clone()) / e.multiplier.clone()
        } else {
            d.clone() * e.multiplier.clone() - e.cost.clone()
        }
    }

    /// Supply units withdrawn per delivered unit, relaxed like [`Self::relax`].
    fn relax_supply(&self, a: Arc, s: &S) -> S {
        let e = &self.edges[a.edge];
        let charge = if e.from == self.source { S::one() } else { S::zero() };
        if a.forward {
            (s.clone() + charge) / e.multiplier.clone()
        } else {
            s.clone() * e.multiplier.clone() - charge
        }
    }

    /// `(c1, s1)` lexicographically below `(c2, s2)`, up to tolerance.
    fn lex_less(c1: &S, s1: &S, c2: &S, s2: &S) -> bool {
        S::clearly_less(c1, c2)
            || (S::roughly_le(c1, c2) && S::roughly_le(c2, c1) && S::clearly_less(s1, s2))
    }

    /// Bellman–Ford on "cost per unit delivered" labels from the source. An
    /// improvement of the source label or a failure to converge within
    /// `nodes` passes is a negative cycle, returned as its node sequence.
    pub fn labels(&self) -> std::result::Result<Labels<S>, Vec<usize>> {
        let mut dist: Vec<Option<S>> = vec![None; self.nodes];
        let mut supply: Vec<Option<S>> = vec![None; self.nodes];
        let mut pred: Vec<Option<Arc>> = vec![None; self.nodes];
        dist[self.source] = Some(S::zero());
        supply[self.source] = Some(S::zero());
        let mut last_changed = None;
        for _ in 0..self.nodes {
            last_changed = None;
            for x in 0..self.nodes {
                let (Some(dx), Some(sx)) = (dist[x].clone(), supply[x].clone()) else { continue };
                for a in self.arcs_from(x) {
                    let y = self.head(a);
                    let cand = self.relax(a, &dx);
                    let cand_s = self.relax_supply(a, &sx);
                    if y == self.source {
                        if Self::lex_less(&cand, &cand_s, &S::zero(), &S::zero()) {
                            let mut cycle = self.walk_back(&pred, x);
                            cycle.push(self.source);
                            return Err(cycle);
                        }
                        continue;
                    }
                    let better = match (&dist[y], &supply[y]) {
                        (Some(dy), Some(sy)) => Self::lex_less(&cand, &cand_s, dy, sy),
                        _ => true,
                    };
                    if better {
                        dist[y] = Some(cand);
                        supply[y] = Some(cand_s);
                        pred[y] = Some(a);
                        last_changed = Some(y);
                    }
                }
            }
            if last_changed.is_none() {
                return Ok(Labels { dist, supply });
            }
        }
        match last_changed {
            Some(y) => Err(self.cycle_from_pred(&pred, y)),
            None => Ok(Labels { dist, supply }),
        }
    }

    /// Least labels `L` with `L(source) = 0` such that every residual arc
    /// `x → y` satisfies `L(y) ≤ relax(L(x))`. Nodes that cannot reach the
    /// source get `None`.
    pub fn labels_to_source(&self) -> Vec<Option<S>> {
        let mut low: Vec<Option<S>> = vec![None; self.nodes];
        low[self.source] = Some(S::zero());
        for _ in 0..self.nodes {
            let mut changed = false;
            for x in 0..self.nodes {
                if x == self.source {
                    continue;
                }
                for a in self.arcs_from(x) {
                    let Some(ly) = low[self.head(a)].clone() else { continue };
                    let cand = self.unrelax(a, &ly);
                    let better = match &low[x] {
                        None => true,
                        Some(lx) => S::clearly_less(lx, &cand),
                    };
                    if better {
                        low[x] = Some(cand);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        low
    }

    /// Smallest tail label compatible with head label `t` across `a`.
    pub fn unrelax(&self, a: Arc, t: &S) -> S {
        let e = &self.edges[a.edge];
        if a.forward {
            t.clone() * e.multiplier.clone() - e.cost.clone()
        } else {
            (t.clone() + e.cost.clone()) / e.multiplier.clone()
        }
    }

    fn walk_back(&self, pred: &[Option<Arc>], mut x: usize) -> Vec<usize> {
        let mut path = vec![x];
        let mut guard = 0;
        while let Some(a) = pred[x] {
            x = self.tail(a);
            path.push(x);
            guard += 1;
            if x == self.source || guard > self.nodes {
                break;
            }
        }
        path.reverse();
        path
    }

    fn cycle_from_pred(&self, pred: &[Option<Arc>], start: usize) -> Vec<usize> {
        let mut x = start;
        for _ in 0..self.nodes {
            match pred[x] {
                Some(a) => x = self.tail(a),
                None => break,
            }
        }
        let anchor = x;
        let mut cycle = vec![anchor];
        loop {
            match pred[x] {
                Some(a) => x = self.tail(a),
                None => break,
            }
            if x == anchor || cycle.len() > self.nodes {
                break;
            }
            cycle.push(x);
        }
        cycle.push(anchor);
        cycle.reverse();
        cycle
    }

    /// Breadth-first tree over tight arcs, visiting heads in index order, so
    /// that among equal-cost shortest paths the one found is deterministic.
    pub fn tight_tree(&self, labels: &Labels<S>) -> Vec<Option<Arc>> {
        let mut parent: Vec<Option<Arc>> = vec![None; self.nodes];
        let mut visited = vec![false; self.nodes];
        visited[self.source] = true;
        let mut queue = std::collections::VecDeque::from([self.source]);
        while let Some(x) = queue.pop_front() {
            let (Some(dx), Some(sx)) = (&labels.dist[x], &labels.supply[x]) else { continue };
            for a in self.arcs_from(x) {
                let y = self.head(a);
                if visited[y] {
                    continue;
                }
                let (Some(dy), Some(sy)) = (&labels.dist[y], &labels.supply[y]) else { continue };
                if S::roughly_le(&self.relax(a, dx), dy) && S::roughly_le(&self.relax_supply(a, sx), sy) {
                    visited[y] = true;
                    parent[y] = Some(a);
                    queue.push_back(y);
                }
            }
        }
        parent
    }

    pub fn path_to(&self, parent: &[Option<Arc>], dest: usize) -> Option<Vec<Arc>> {
        let mut path = Vec::new();
        let mut x = dest;
        while x != self.source {
            let a = parent[x]?;
            path.push(a);
            x = self.tail(a);
            if path.len() > self.nodes {
                return None;
            }
        }
        path.reverse();
        Some(path)
    }

    /// Largest amount that can leave the source along `path` while delivering
    /// at most `limit` at its end. Returns `(withdrawn, delivered)`.
    pub fn path_capacity(&self, path: &[Arc], limit: &S) -> (S, S) {
        let mut gain = S::one();
        let mut bound: Option<S> = None;
        for &a in path {
            if let Some(cap) = self.residual_capacity(a) {
                let b = cap / gain.clone();
                bound = Some(match bound {
                    None => b,
                    Some(old) => S::min_of(old, b),
                });
            }
            gain = gain * self.arc_gain(a);
        }
        let by_limit = limit.clone() / gain.clone();
        let s = match bound {
            None => by_limit,
            Some(b) => S::min_of(b, by_limit),
        };
        let delivered = s.clone() * gain;
        (s, delivered)
    }

    /// Sends `amount` (source units) along `path`.
    pub fn push(&mut self, path: &[Arc], amount: &S) {
        let mut carried = amount.clone();
        for &a in path {
            let gain = self.arc_gain(a);
            let e = &mut self.edges[a.edge];
            if a.forward {
                e.flow = e.flow.clone() + carried.clone();
            } else {
                e.flow = e.flow.clone() - carried.clone() / e.multiplier.clone();
            }
            snap(e);
            carried = carried * gain;
        }
    }

    pub fn total_cost(&self) -> S {
        self.edges
            .iter()
            .fold(S::zero(), |acc, e| acc + e.cost.clone() * e.flow.clone())
    }

    /// Net amount arriving at `x` (inflow in head units minus outflow).
    pub fn net_inflow(&self, x: usize) -> S {
        let mut net = S::zero();
        for e in &self.edges {
            if e.to == x {
                net = net + e.flow.clone() * e.multiplier.clone();
            }
            if e.from == x {
                net = net - e.flow.clone();
            }
        }
        net
    }

    /// Independent negative-cycle certificate.
    ///
    /// With all multipliers equal to one this is Bellman–Ford on arc costs
    /// from a virtual source. Otherwise costs are assumed to sit only on arcs
    /// touching the source: gain cycles away from the source are found on
    /// `−ln(gain)` weights, and cycles through the source by comparing the
    /// cheapest delivery cost at a node against the refund of its reverse
    /// supply arc.
    pub fn find_negative_cycle(&self) -> Option<Vec<usize>> {
        let unit = self.edges.iter().all(|e| e.multiplier == S::one());
        if unit {
            return self.virtual_source_cycle(|net, a| net.arc_cost(a).to_f64(), |_, _| true);
        }
        let source = self.source;
        if let Some(c) = self.virtual_source_cycle(
            |net, a| -net.arc_gain(a).to_f64().ln(),
            |net, a| net.tail(a) != source && net.head(a) != source,
        ) {
            return Some(c);
        }
        self.labels().err()
    }

    fn virtual_source_cycle(
        &self,
        weight: impl Fn(&Self, Arc) -> f64,
        include: impl Fn(&Self, Arc) -> bool,
    ) -> Option<Vec<usize>> {
        const TOL: f64 = 1e-10;
        let mut dist = vec![0.0f64; self.nodes];
        let mut pred: Vec<Option<Arc>> = vec![None; self.nodes];
        let mut last = None;
        for _ in 0..=self.nodes {
            last = None;
            for x in 0..self.nodes {
                for a in self.arcs_from(x).filter(|a| include(self, *a)) {
                    let y = self.head(a);
                    let cand = dist[x] + weight(self, a);
                    if cand < dist[y] - TOL {
                        dist[y] = cand;
                        pred[y] = Some(a);
                        last = Some(y);
                    }
                }
            }
            last?;
        }
        last.map(|y| self.cycle_from_pred(&pred, y))
    }

    /// One line per original edge: `from to cost capacity multiplier flow`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let cap = e
                .capacity
                .as_ref()
                .map_or_else(|| "inf".to_string(), |c| fmt_num(c.to_f64()));
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                e.from,
                e.to,
                fmt_num(e.cost.to_f64()),
                cap,
                fmt_num(e.multiplier.to_f64()),
                fmt_num(e.flow.to_f64())
            );
        }
        out
    }

    /// Active residual arcs in the same format; the flow column is zero.
    pub fn dump_residual(&self) -> String {
        let mut out = String::new();
        for x in 0..self.nodes {
            for a in self.arcs_from(x) {
                let cap = self
                    .residual_capacity(a)
                    .map_or_else(|| "inf".to_string(), |c| fmt_num(c.to_f64()));
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} 0",
                    x,
                    self.head(a),
                    fmt_num(self.arc_cost(a).to_f64()),
                    cap,
                    fmt_num(self.arc_gain(a).to_f64())
                );
            }
        }
        out
    }
}

fn snap<S: Scalar>(e: &mut Edge<S>) {
    if e.flow <= S::dust() {
        e.flow = S::zero();
    }
    if let Some(c) = &e.capacity {
        if c.clone() - e.flow.clone() <= S::dust() {
            e.flow = c.clone();
        }
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
