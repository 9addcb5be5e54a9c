//! Cheapest forward walk solutions as a minimum-cost flow with lower bounds.
//!
//! Nodes: `s⁺`, a pair `v⁻ → v⁺` per customer, one node per target and one
//! sink per group. A forward arc `(v, w)` becomes `(v⁺, w⁻)`, a backward arc
//! `(v, w)` becomes `(v⁺, w⁺)`, arcs into targets and into the depot leave
//! `v⁺` (or `s⁺`). Every `(v⁻, v⁺)` carries at least one unit, which forces a
//! forward arc into each customer.

use std::collections::HashMap;

use crate::clustering::VrtgInstance;
use crate::error::{Error, Result};
use crate::instance::{DepotOrder, Vertex, DEPOT};
use crate::scalar::{cmp, Scalar};
use crate::vrtg::WalkSolution;

const SOURCE: usize = 0;

/// The flow network over a subset of the customers.
pub struct FlowNetwork<'a, T: Scalar> {
    inst: &'a VrtgInstance<T>,
    order: &'a DepotOrder,
    /// Customers of the network, in depot distance order.
    active: Vec<Vertex>,
    flow: HashMap<(usize, usize), usize>,
    /// `rev[v]` lists every `u` with positive flow on the arc `(u, v)`.
    rev: Vec<Vec<usize>>,
    potential: Vec<T>,
}

impl<'a, T: Scalar> FlowNetwork<'a, T> {
    /// Network on `active` (customers of `inst`, any order).
    pub fn new(inst: &'a VrtgInstance<T>, order: &'a DepotOrder, active: &[Vertex]) -> Self {
        let mut active = active.to_vec();
        active.sort_by_key(|&v| order.position(v));
        let nodes = 1 + 2 * active.len() + inst.num_targets() + inst.num_groups();
        FlowNetwork {
            inst,
            order,
            active,
            flow: HashMap::new(),
            rev: vec![Vec::new(); nodes],
            potential: vec![T::zero(); nodes],
        }
    }

    fn m(&self) -> usize {
        self.active.len()
    }

    fn num_nodes(&self) -> usize {
        self.rev.len()
    }

    fn minus(i: usize) -> usize {
        1 + 2 * i
    }

    fn plus(i: usize) -> usize {
        2 + 2 * i
    }

    fn target(&self, k: usize) -> usize {
        1 + 2 * self.m() + k
    }

    fn group(&self, g: usize) -> usize {
        1 + 2 * self.m() + self.inst.num_targets() + g
    }

    /// Node of the target-group digraph represented by a network node; `None`
    /// for group sinks.
    fn original(&self, x: usize) -> Option<Vertex> {
        let m = self.m();
        if x == SOURCE {
            Some(DEPOT)
        } else if x <= 2 * m {
            Some(self.active[(x - 1) / 2])
        } else if x <= 2 * m + self.inst.num_targets() {
            Some(self.inst.target_node(x - 1 - 2 * m))
        } else {
            None
        }
    }

    fn cost(&self, a: usize, b: usize) -> T {
        match (self.original(a), self.original(b)) {
            (Some(u), Some(v)) if u != v => self.inst.dist(u, v),
            _ => T::zero(),
        }
    }

    /// Calls `f(head, cost, reverse)` for every residual arc leaving `x`.
    fn for_each_arc(&self, x: usize, mut f: impl FnMut(usize, T, bool)) {
        let m = self.m();
        let k = self.inst.num_targets();
        let mut original = |y: usize| f(y, self.cost(x, y), false);
        if x == SOURCE {
            (0..m).for_each(|j| original(Self::minus(j)));
            (0..k).for_each(|t| original(self.target(t)));
        } else if x <= 2 * m {
            let i = (x - 1) / 2;
            if x == Self::minus(i) {
                original(Self::plus(i));
            } else {
                (0..i).for_each(|j| original(Self::plus(j)));
                (i + 1..m).for_each(|j| original(Self::minus(j)));
                (0..k).for_each(|t| original(self.target(t)));
                original(SOURCE);
            }
        } else if x <= 2 * m + k {
            original(self.group(self.inst.group_of(x - 1 - 2 * m)));
        }
        for &u in &self.rev[x] {
            f(u, -self.cost(u, x), true);
        }
    }

    fn push(&mut self, a: usize, b: usize, units: usize) {
        let f = self.flow.entry((a, b)).or_insert(0);
        if *f == 0 {
            self.rev[b].push(a);
        }
        *f += units;
    }

    fn pull(&mut self, a: usize, b: usize) {
        let f = self.flow.get_mut(&(a, b)).expect("reverse arc carries flow");
        *f -= 1;
        if *f == 0 {
            self.flow.remove(&(a, b));
            self.rev[b].retain(|&u| u != a);
        }
    }

    /// Dense Dijkstra on reduced costs. Returns distances and the arc used to
    /// reach each node.
    fn dijkstra(&self, from: usize) -> (Vec<T>, Vec<Option<(usize, bool)>>) {
        let n = self.num_nodes();
        let mut dist = vec![T::infinity(); n];
        let mut prev = vec![None; n];
        let mut done = vec![false; n];
        dist[from] = T::zero();
        loop {
            let next = (0..n).filter(|&x| !done[x] && dist[x].is_finite()).min_by(|&a, &b| cmp(&dist[a], &dist[b]));
            let Some(x) = next else { break };
            done[x] = true;
            self.for_each_arc(x, |y, c, reverse| {
                if done[y] {
                    return;
                }
                let reduced = (c + self.potential[x] - self.potential[y]).max(T::zero());
                if dist[x] + reduced < dist[y] {
                    dist[y] = dist[x] + reduced;
                    prev[y] = Some((x, reverse));
                }
            });
        }
        (dist, prev)
    }

    /// Routes `b(𝒯)` units through the target of each group nearest to the
    /// depot and sets shortest-path potentials.
    fn initialize(&mut self) {
        for (g, members) in self.inst.groups().iter().enumerate() {
            let &best = members
                .iter()
                .min_by(|&&a, &&b| {
                    let (ta, tb) = (self.inst.target_node(a), self.inst.target_node(b));
                    cmp(&self.inst.dist(DEPOT, ta), &self.inst.dist(DEPOT, tb)).then(a.cmp(&b))
                })
                .expect("groups are nonempty");
            let units = self.inst.b()[g];
            let t = self.target(best);
            let sink = self.group(g);
            self.push(SOURCE, t, units);
            self.push(t, sink, units);
        }
        // The only negative residual arcs enter the source, whose distance is
        // zero by the triangle inequality, so Dijkstra is exact here.
        let (dist, _) = self.dijkstra(SOURCE);
        self.potential = dist;
    }

    /// Sends one unit from `v⁺` to `v⁻` along a shortest residual path.
    fn augment(&mut self, i: usize) {
        let (from, to) = (Self::plus(i), Self::minus(i));
        let (dist, prev) = self.dijkstra(from);
        let cap = dist[to];
        for (p, d) in self.potential.iter_mut().zip(&dist) {
            *p += d.min(cap);
        }
        let mut y = to;
        while y != from {
            let (x, reverse) = prev[y].expect("v⁻ is reachable from v⁺ through the depot");
            if reverse {
                self.pull(y, x);
            } else {
                self.push(x, y, 1);
            }
            y = x;
        }
    }

    /// Maximum violation of reduced-cost optimality over all residual arcs.
    fn optimality_gap(&self) -> T {
        let mut worst = T::zero();
        for x in 0..self.num_nodes() {
            self.for_each_arc(x, |y, c, _| {
                worst = worst.max(-(c + self.potential[x] - self.potential[y]));
            });
        }
        worst
    }

    /// Solves the flow problem and converts it to a walk solution.
    pub fn solve(mut self) -> Result<WalkSolution> {
        if self.inst.num_targets() == 0 {
            return if self.active.is_empty() { Ok(WalkSolution::new()) } else { Err(Error::DegenerateVrtg) };
        }
        self.initialize();
        for i in 0..self.m() {
            self.augment(i);
        }
        if cfg!(debug_assertions) {
            let scale = self.potential.iter().fold(T::one(), |m, p| m.max(p.abs()));
            let gap = self.optimality_gap();
            debug_assert!(gap <= T::rel_tol(scale) * T::of(1e3), "flow not optimal: reduced cost −{gap}");
        }
        let mut h = WalkSolution::new();
        for (&(a, b), &f) in &self.flow {
            if let (Some(u), Some(v)) = (self.original(a), self.original(b)) {
                if u != v {
                    h.add_many(u, v, f);
                }
            }
        }
        debug_assert!(self.active.iter().all(|&v| {
            let fwd = |u: Vertex| u == DEPOT || (self.inst.base().is_customer(u) && self.order.precedes(u, v));
            h.arcs().any(|((u, w), _)| w == v && fwd(u))
        }));
        Ok(h)
    }
}

/// Cheapest walk solution on `active` in which every active customer is
/// entered by at least one forward arc.
pub fn forward_walk_on<T: Scalar>(inst: &VrtgInstance<T>, order: &DepotOrder, active: &[Vertex]) -> Result<WalkSolution> {
    FlowNetwork::new(inst, order, active).solve()
}
