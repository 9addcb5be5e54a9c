//! Combinatorial algorithm for vehicle routing with target groups: restrict
//! to a nice subinstance, take a cheapest forward walk solution there, and
//! attach the removed customers by a cheapest connecting forest traversed in
//! both directions.

use crate::clustering::VrtgInstance;
use crate::error::{Error, Result};
use crate::flow::forward_walk_on;
use crate::instance::{DepotOrder, Instance, Vertex, DEPOT};
use crate::scalar::{sum, Scalar};
use crate::tsp::prim;
use crate::vrtg::{walks_to_solution, VrtgSolution, WalkSolution};

/// Removed customers `Y` with their witnesses `w(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceSubsetResult {
    pub removed: Vec<Vertex>,
    /// `witness[y]` is `Some(w(y))` for removed `y`, indexed by vertex.
    pub witness: Vec<Option<Vertex>>,
    /// `parent_{V∖Y}(v)` for every kept customer, indexed by vertex.
    pub parent: Vec<Option<Vertex>>,
}

impl NiceSubsetResult {
    pub fn is_removed(&self, v: Vertex) -> bool {
        self.witness.get(v).is_some_and(Option::is_some)
    }

    /// Kept customers in the given order.
    pub fn kept(&self, order: &DepotOrder) -> Vec<Vertex> {
        order.customers().iter().copied().filter(|&v| !self.is_removed(v)).collect()
    }
}

/// Nearest vertex to `v` among the depot and the kept predecessors of `v`;
/// ties go to the smaller index.
fn nearest_predecessor<T: Scalar>(inst: &Instance<T>, order: &DepotOrder, removed: &[bool], v: Vertex) -> Vertex {
    let mut best = DEPOT;
    let mut best_cost = inst.depot_dist(v);
    for &p in &order.customers()[..order.position(v) - 1] {
        if removed[p] {
            continue;
        }
        let c = inst.dist(p, v);
        if c < best_cost || (c == best_cost && p < best) {
            best = p;
            best_cost = c;
        }
    }
    best
}

/// Scans customers in `order`; each kept `v` removes every later `y` with
/// `c(parent(v), v) > γ·detour(y, v)`.
pub fn compute_nice_subset<T: Scalar>(inst: &Instance<T>, order: &DepotOrder, gamma: T) -> NiceSubsetResult {
    let nv = inst.num_vertices();
    let mut removed = vec![false; nv];
    let mut witness = vec![None; nv];
    let mut parent = vec![None; nv];
    let customers = order.customers();
    for (i, &v) in customers.iter().enumerate() {
        if removed[v] {
            continue;
        }
        let p = nearest_predecessor(inst, order, &removed, v);
        parent[v] = Some(p);
        let reach = inst.dist(p, v);
        for &y in &customers[i + 1..] {
            if !removed[y] && reach > gamma * inst.detour(y, v) {
                removed[y] = true;
                witness[y] = Some(v);
            }
        }
    }
    let removed_list = customers.iter().copied().filter(|&v| removed[v]).collect();
    NiceSubsetResult { removed: removed_list, witness, parent }
}

/// Cheapest edge set connecting every vertex of `removed` to some other
/// customer not in `removed`: a minimum spanning tree on `removed` plus one
/// contracted node for all survivors.
pub fn connect_removed<T: Scalar>(inst: &Instance<T>, removed: &[Vertex]) -> Result<Vec<(Vertex, Vertex)>> {
    if removed.is_empty() {
        return Ok(Vec::new());
    }
    let mut is_removed = vec![false; inst.num_vertices()];
    for &y in removed {
        is_removed[y] = true;
    }
    let survivors: Vec<Vertex> = inst.customers().filter(|&v| !is_removed[v]).collect();
    if survivors.is_empty() {
        return Err(Error::Precondition("every customer is removed".into()));
    }
    let nearest: Vec<Vertex> = removed
        .iter()
        .map(|&y| {
            let mut best = survivors[0];
            for &v in &survivors[1..] {
                if inst.dist(y, v) < inst.dist(y, best) {
                    best = v;
                }
            }
            best
        })
        .collect();
    // Node 0 is the contracted survivor set, node i + 1 is removed[i].
    let tree = prim(removed.len() + 1, |a, b| {
        Some(match (a, b) {
            (0, 0) => T::zero(),
            (0, j) | (j, 0) => inst.dist(removed[j - 1], nearest[j - 1]),
            (i, j) => inst.dist(removed[i - 1], removed[j - 1]),
        })
    });
    Ok(tree
        .into_iter()
        .map(|(a, b)| match (a, b) {
            (0, j) | (j, 0) => (nearest[j - 1], removed[j - 1]),
            (i, j) => (removed[i - 1], removed[j - 1]),
        })
        .collect())
}

/// Cheapest forward walk solution on all customers for the order `order`.
pub fn cheapest_forward_walk<T: Scalar>(inst: &VrtgInstance<T>, order: &DepotOrder) -> Result<WalkSolution> {
    let all: Vec<Vertex> = inst.base().customers().collect();
    forward_walk_on(inst, order, &all)
}

/// Intermediate results of [`solve_vrtg_detailed`].
#[derive(Clone, Debug)]
pub struct VrtgRun<T: Scalar = f64> {
    pub solution: VrtgSolution<T>,
    pub nice: NiceSubsetResult,
    /// Cost of the forward walk solution on the nice subinstance.
    pub forward_cost: T,
    pub forest: Vec<(Vertex, Vertex)>,
    pub forest_cost: T,
}

/// Solves a target-group instance with at least one group.
pub fn solve_vrtg<T: Scalar>(inst: &VrtgInstance<T>, gamma: T) -> Result<VrtgSolution<T>> {
    solve_vrtg_detailed(inst, gamma).map(|run| run.solution)
}

pub fn solve_vrtg_detailed<T: Scalar>(inst: &VrtgInstance<T>, gamma: T) -> Result<VrtgRun<T>> {
    if !(gamma > T::of(2.0)) {
        return Err(Error::InvalidParameter(format!("gamma must be > 2, got {gamma}")));
    }
    let base = inst.base();
    if inst.num_groups() == 0 && base.n() > 0 {
        return Err(Error::DegenerateVrtg);
    }
    let order = base.depot_order();
    let nice = compute_nice_subset(base, &order, gamma);
    let kept = nice.kept(&order);
    let mut h = forward_walk_on(inst, &order, &kept)?;
    let forward_cost = h.cost(inst);
    let forest = connect_removed(base, &nice.removed)?;
    for &(u, v) in &forest {
        h.add(u, v);
        h.add(v, u);
    }
    let forest_cost = sum(forest.iter().map(|&(u, v)| base.dist(u, v)));
    log::debug!(
        "vrtg solve: {} removed, forward walks {forward_cost}, forest {forest_cost}",
        nice.removed.len()
    );
    let solution = walks_to_solution(inst, &h)?;
    Ok(VrtgRun { solution, nice, forward_cost, forest, forest_cost })
}
