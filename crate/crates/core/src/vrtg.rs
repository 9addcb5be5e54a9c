//! Solutions of vehicle routing with target groups: paths from the depot to
//! the depot or a target, arc multisets ("walk solutions"), conversions and
//! verification.

use std::collections::BTreeMap;
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde_json::{json, Value};

use crate::clustering::VrtgInstance;
use crate::error::{Error, Result};
use crate::instance::{Vertex, DEPOT};
use crate::scalar::{sum, Scalar};

/// A walk `s, interior…, end` where `end` is the depot or a target node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VrtgPath {
    pub interior: Vec<Vertex>,
    pub end: Vertex,
}

impl VrtgPath {
    pub fn new(interior: Vec<Vertex>, end: Vertex) -> Self {
        VrtgPath { interior, end }
    }

    /// `s, interior…, end`.
    pub fn nodes(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.interior.len() + 2);
        out.push(DEPOT);
        out.extend_from_slice(&self.interior);
        out.push(self.end);
        out
    }

    pub fn cost<T: Scalar>(&self, inst: &VrtgInstance<T>) -> T {
        let nodes = self.nodes();
        sum(nodes.windows(2).map(|w| inst.dist(w[0], w[1])))
    }
}

/// A set of paths; feasible when every customer is visited and exactly
/// `b(𝒯)` paths end in each group `𝒯`.
#[derive(Clone, Debug, PartialEq)]
pub struct VrtgSolution<T: Scalar = f64> {
    paths: Vec<VrtgPath>,
    cost: T,
}

impl<T: Scalar> VrtgSolution<T> {
    pub fn new(inst: &VrtgInstance<T>, paths: Vec<VrtgPath>) -> Self {
        let cost = sum(paths.iter().map(|p| p.cost(inst)));
        VrtgSolution { paths, cost }
    }

    pub fn paths(&self) -> &[VrtgPath] {
        &self.paths
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    /// Number of paths ending in each target, by target index.
    pub fn ends_per_target(&self, inst: &VrtgInstance<T>) -> Vec<usize> {
        let mut counts = vec![0; inst.num_targets()];
        for p in &self.paths {
            if let Some(k) = inst.target_index(p.end) {
                counts[k] += 1;
            }
        }
        counts
    }

    /// Number of paths ending in each group.
    pub fn ends_per_group(&self, inst: &VrtgInstance<T>) -> Vec<usize> {
        let mut counts = vec![0; inst.num_groups()];
        for (k, c) in self.ends_per_target(inst).into_iter().enumerate() {
            counts[inst.group_of(k)] += c;
        }
        counts
    }

    pub fn to_json(&self) -> Value {
        let paths: Vec<Value> = self.paths.iter().map(|p| json!(p.nodes())).collect();
        json!({ "paths": paths, "cost": self.cost.as_f64() })
    }
}

/// A multiset of arcs of the target-group digraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WalkSolution {
    arcs: BTreeMap<(Vertex, Vertex), usize>,
}

impl WalkSolution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, u: Vertex, v: Vertex) {
        self.add_many(u, v, 1);
    }

    pub fn add_many(&mut self, u: Vertex, v: Vertex, k: usize) {
        if k > 0 {
            *self.arcs.entry((u, v)).or_insert(0) += k;
        }
    }

    /// Arcs with multiplicities, sorted.
    pub fn arcs(&self) -> impl Iterator<Item = ((Vertex, Vertex), usize)> + '_ {
        self.arcs.iter().map(|(&a, &k)| (a, k))
    }

    pub fn multiplicity(&self, u: Vertex, v: Vertex) -> usize {
        self.arcs.get(&(u, v)).copied().unwrap_or(0)
    }

    /// Number of arcs counted with multiplicity.
    pub fn len(&self) -> usize {
        self.arcs.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn cost<T: Scalar>(&self, inst: &VrtgInstance<T>) -> T {
        sum(self.arcs().map(|((u, v), k)| inst.dist(u, v) * T::from_usize_lossy(k)))
    }

    /// Arcs entering customers (`E₁`), counted with multiplicity.
    pub fn e1_len<T: Scalar>(&self, inst: &VrtgInstance<T>) -> usize {
        self.arcs().filter(|&((_, v), _)| inst.base().is_customer(v)).map(|(_, k)| k).sum()
    }

    /// Checks the walk-solution conditions: arcs leave `{s} ∪ V`, customers
    /// are balanced, `b(𝒯)` arcs enter each group, and `{s} ∪ V` is connected.
    pub fn validate<T: Scalar>(&self, inst: &VrtgInstance<T>) -> Result<()> {
        let base = inst.base();
        let nodes = inst.num_nodes();
        let mut balance = vec![0i64; nodes];
        let mut into_group = vec![0usize; inst.num_groups()];
        let mut uf = UnionFind::<usize>::new(nodes);
        for ((u, v), k) in self.arcs() {
            if u >= nodes || v >= nodes || u == v || inst.is_target(u) {
                return Err(Error::InvalidWalkSolution(format!("arc ({u}, {v}) is not an arc of the instance")));
            }
            balance[u] -= k as i64;
            balance[v] += k as i64;
            if let Some(t) = inst.target_index(v) {
                into_group[inst.group_of(t)] += k;
            }
            uf.union(u, v);
        }
        if let Some(v) = base.customers().find(|&v| balance[v] != 0) {
            return Err(Error::InvalidWalkSolution(format!("customer {v} is unbalanced ({})", balance[v])));
        }
        for (g, (&found, &want)) in into_group.iter().zip(inst.b()).enumerate() {
            if found != want {
                return Err(Error::InvalidWalkSolution(format!("{found} arcs enter group {g}, expected {want}")));
            }
        }
        if let Some(v) = base.customers().find(|&v| !uf.equiv(v, DEPOT)) {
            return Err(Error::InvalidWalkSolution(format!("customer {v} is not connected to the depot")));
        }
        Ok(())
    }
}

/// Orients every path away from the depot and collects its arcs.
pub fn solution_to_walks<T: Scalar>(sol: &VrtgSolution<T>) -> WalkSolution {
    let mut h = WalkSolution::new();
    for p in sol.paths() {
        for w in p.nodes().windows(2) {
            h.add(w[0], w[1]);
        }
    }
    h
}

/// Decomposes a walk solution into `Σ b(𝒯)` paths to targets plus cycles at
/// the depot, then shortcuts repeated customers. Depot cycles without
/// customers are dropped. The result costs at most `c(H)`.
///
/// Walks are traced from the depot taking the smallest unused arc; leftover
/// circuits among customers are spliced in where they first touch a walk.
pub fn walks_to_solution<T: Scalar>(inst: &VrtgInstance<T>, h: &WalkSolution) -> Result<VrtgSolution<T>> {
    h.validate(inst)?;
    let nodes = inst.num_nodes();
    let mut out: Vec<Vec<Vertex>> = vec![Vec::new(); nodes];
    for ((u, v), k) in h.arcs() {
        out[u].extend(std::iter::repeat(v).take(k));
    }
    // Arcs are consumed from the front of each (sorted) list.
    let mut next = vec![0usize; nodes];
    let take = |u: Vertex, next: &mut Vec<usize>| -> Option<Vertex> {
        let i = next[u];
        (i < out[u].len()).then(|| {
            next[u] += 1;
            out[u][i]
        })
    };

    let mut walks = Vec::new();
    while let Some(first) = take(DEPOT, &mut next) {
        let mut walk = vec![DEPOT, first];
        let mut at = first;
        while inst.base().is_customer(at) {
            at = take(at, &mut next).expect("balanced customer has an unused out-arc");
            walk.push(at);
        }
        walks.push(walk);
    }

    let mut spliced = Vec::with_capacity(walks.len());
    for walk in walks {
        let mut full = Vec::with_capacity(walk.len());
        for &x in &walk {
            // Hierholzer from x over the leftover circuits.
            let mut stack = vec![x];
            let mut circuit = Vec::new();
            while let Some(&top) = stack.last() {
                match inst.base().is_customer(top).then(|| take(top, &mut next)).flatten() {
                    Some(v) => stack.push(v),
                    None => circuit.push(stack.pop().expect("nonempty stack")),
                }
            }
            circuit.reverse();
            full.extend(circuit);
        }
        spliced.push(full);
    }
    if let Some(u) = (0..nodes).find(|&u| next[u] < out[u].len()) {
        return Err(Error::InvalidWalkSolution(format!("arcs at node {u} are unreachable from the depot")));
    }

    let mut seen = vec![false; inst.base().num_vertices()];
    let mut paths = Vec::with_capacity(spliced.len());
    for walk in spliced {
        let end = *walk.last().expect("walk has an end");
        let interior: Vec<Vertex> =
            walk[1..walk.len() - 1].iter().copied().filter(|&v| !std::mem::replace(&mut seen[v], true)).collect();
        if end != DEPOT || !interior.is_empty() {
            paths.push(VrtgPath::new(interior, end));
        }
    }
    let sol = VrtgSolution::new(inst, paths);
    debug_assert!(sol.cost().le_tol(h.cost(inst) + T::rel_tol(h.cost(inst))));
    Ok(sol)
}

/// A defect of a target-group solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VrtgViolation {
    /// An interior node that is not a customer.
    BadInterior { path: usize, node: Vertex },
    /// A path ending neither in the depot nor in a target.
    BadEnd { path: usize, node: Vertex },
    Missing { customer: Vertex },
    EndpointCount { group: usize, found: usize, expected: usize },
}

impl fmt::Display for VrtgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VrtgViolation::BadInterior { path, node } => write!(f, "path {path}: interior node {node} is not a customer"),
            VrtgViolation::BadEnd { path, node } => write!(f, "path {path}: ends in {node}, not the depot or a target"),
            VrtgViolation::Missing { customer } => write!(f, "customer {customer} is not visited"),
            VrtgViolation::EndpointCount { group, found, expected } => {
                write!(f, "group {group}: {found} paths end there, expected {expected}")
            }
        }
    }
}

/// Checks path shape, coverage and endpoint counts.
pub fn verify_vrtg<T: Scalar>(inst: &VrtgInstance<T>, sol: &VrtgSolution<T>) -> Vec<VrtgViolation> {
    let base = inst.base();
    let mut violations = Vec::new();
    let mut seen = vec![false; base.num_vertices()];
    for (i, p) in sol.paths().iter().enumerate() {
        for &v in &p.interior {
            if base.is_customer(v) {
                seen[v] = true;
            } else {
                violations.push(VrtgViolation::BadInterior { path: i, node: v });
            }
        }
        if p.end != DEPOT && !inst.is_target(p.end) {
            violations.push(VrtgViolation::BadEnd { path: i, node: p.end });
        }
    }
    violations.extend(base.customers().filter(|&v| !seen[v]).map(|customer| VrtgViolation::Missing { customer }));
    for (group, (&found, &expected)) in sol.ends_per_group(inst).iter().zip(inst.b()).enumerate() {
        if found != expected {
            violations.push(VrtgViolation::EndpointCount { group, found, expected });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    /// Three customers on a line, one target at customer 3, b = 2.
    fn line() -> VrtgInstance {
        let base: Instance = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]], vec![0.3; 3]).unwrap();
        VrtgInstance::new(base, vec![3], vec![vec![0]], vec![2]).unwrap()
    }

    #[test]
    fn cycle_plus_target_arcs_decomposes() {
        let inst = line();
        let t = inst.target_node(0);
        let mut h = WalkSolution::new();
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 1), (1, t), (0, t)] {
            h.add(u, v);
        }
        assert_eq!(h.multiplicity(0, 1), 2);
        h.validate(&inst).unwrap();
        let sol = walks_to_solution(&inst, &h).unwrap();
        assert!(verify_vrtg(&inst, &sol).is_empty());
        assert_eq!(sol.ends_per_group(&inst), vec![2]);
        assert!(sol.cost() <= h.cost(&inst) + 1e-12);
        assert_eq!(sol.paths().len(), 3);
    }

    #[test]
    fn disjoint_paths_round_trip() {
        let inst = line();
        let t = inst.target_node(0);
        let sol = VrtgSolution::new(&inst, vec![VrtgPath::new(vec![1, 2, 3], t), VrtgPath::new(vec![], t)]);
        assert!(verify_vrtg(&inst, &sol).is_empty());
        let h = solution_to_walks(&sol);
        assert_eq!(h.cost(&inst), sol.cost());
        let back = walks_to_solution(&inst, &h).unwrap();
        assert_eq!(back.cost(), sol.cost());
        assert_eq!(back.paths().len(), 2);
    }

    #[test]
    fn duplicated_path_has_multiplicity_two() {
        let inst = line();
        let t = inst.target_node(0);
        let sol = VrtgSolution::new(&inst, vec![VrtgPath::new(vec![1, 2, 3], t), VrtgPath::new(vec![1, 2, 3], t)]);
        let h = solution_to_walks(&sol);
        assert_eq!(h.multiplicity(1, 2), 2);
        let back = walks_to_solution(&inst, &h).unwrap();
        assert!(back.cost() <= sol.cost());
        assert!(back.paths()[1].interior.is_empty());
        assert!(verify_vrtg(&inst, &back).is_empty());
    }

    #[test]
    fn leftover_circuit_is_spliced() {
        let inst = line();
        let t = inst.target_node(0);
        let mut h = WalkSolution::new();
        for (u, v) in [(0, 1), (1, t), (0, t), (1, 2), (2, 3), (3, 2), (2, 1)] {
            h.add(u, v);
        }
        let sol = walks_to_solution(&inst, &h).unwrap();
        assert!(verify_vrtg(&inst, &sol).is_empty());
        assert_eq!(sol.paths()[0].interior, vec![1, 2, 3]);
    }

    #[test]
    fn invalid_walk_solutions_are_rejected() {
        let inst = line();
        let t = inst.target_node(0);
        let mut unbalanced = WalkSolution::new();
        unbalanced.add(0, 1);
        unbalanced.add(0, t);
        assert!(walks_to_solution(&inst, &unbalanced).is_err());

        let mut wrong_b = WalkSolution::new();
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, t)] {
            wrong_b.add(u, v);
        }
        assert!(wrong_b.validate(&inst).is_err());

        let mut disconnected = WalkSolution::new();
        for (u, v) in [(0, 1), (1, t), (0, t), (2, 3), (3, 2)] {
            disconnected.add(u, v);
        }
        assert!(disconnected.validate(&inst).is_err());

        let mut from_target = WalkSolution::new();
        from_target.add(t, 1);
        assert!(from_target.validate(&inst).is_err());
    }

    #[test]
    fn verify_reports_defects() {
        let inst = line();
        let t = inst.target_node(0);
        let sol = VrtgSolution::new(&inst, vec![VrtgPath::new(vec![1, 2], t), VrtgPath::new(vec![], t), VrtgPath::new(vec![], t)]);
        let v = verify_vrtg(&inst, &sol);
        assert!(v.contains(&VrtgViolation::Missing { customer: 3 }));
        assert!(v.contains(&VrtgViolation::EndpointCount { group: 0, found: 3, expected: 2 }));
        let bad = VrtgSolution::new(&inst, vec![VrtgPath::new(vec![t], 2)]);
        assert!(verify_vrtg(&inst, &bad).iter().any(|x| matches!(x, VrtgViolation::BadEnd { .. })));
        assert!(verify_vrtg(&inst, &bad).iter().any(|x| matches!(x, VrtgViolation::BadInterior { .. })));
    }
}
