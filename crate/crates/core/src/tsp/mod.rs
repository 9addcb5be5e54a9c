//! Traveling salesman tours over `{s} ∪ V`: double tree, Christofides and an
//! exact Held–Karp oracle.

mod blossom;
mod euler;
mod held_karp;
mod mst;

use std::fmt;
use std::str::FromStr;

pub use blossom::{max_weight_matching, min_cost_perfect_matching};
pub use euler::euler_shortcut;
pub use held_karp::PathTable;
pub use mst::prim;

use crate::error::{Error, Result};
use crate::instance::{Instance, Vertex, DEPOT};
use crate::scalar::{sum, Scalar};

/// Default vertex limit (depot included) for [`held_karp`].
pub const HELD_KARP_LIMIT: usize = 16;

/// A Hamiltonian cycle over the depot and all customers, stored from the depot.
#[derive(Clone, Debug, PartialEq)]
pub struct TspTour<T: Scalar = f64> {
    order: Vec<Vertex>,
    cost: T,
}

impl<T: Scalar> TspTour<T> {
    /// Builds a tour from a cyclic vertex order, rotated to start at the depot.
    pub fn from_order(inst: &Instance<T>, mut order: Vec<Vertex>) -> Self {
        if let Some(p) = order.iter().position(|&v| v == DEPOT) {
            order.rotate_left(p);
        }
        let cost = cyclic_cost(inst, &order);
        TspTour { order, cost }
    }

    /// Vertices in visiting order, depot first.
    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    /// Customers in visiting order (the order without the leading depot).
    pub fn customers(&self) -> &[Vertex] {
        self.order.get(1..).unwrap_or(&[])
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    /// True when the tour visits every vertex of `inst` exactly once.
    pub fn is_permutation_of(&self, inst: &Instance<T>) -> bool {
        let mut seen = vec![false; inst.num_vertices()];
        self.order.len() == inst.num_vertices()
            && self.order.first() == Some(&DEPOT)
            && self.order.iter().all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
    }
}

fn cyclic_cost<T: Scalar>(inst: &Instance<T>, order: &[Vertex]) -> T {
    if order.len() < 2 {
        return T::zero();
    }
    sum((0..order.len()).map(|i| inst.dist(order[i], order[(i + 1) % order.len()])))
}

/// Minimum spanning tree over all vertices of the instance.
pub fn minimum_spanning_tree<T: Scalar>(inst: &Instance<T>) -> Vec<(Vertex, Vertex)> {
    prim(inst.num_vertices(), |u, v| Some(inst.dist(u, v)))
}

/// MST doubled, Euler walk, shortcut: at most twice the optimum.
pub fn double_tree_tour<T: Scalar>(inst: &Instance<T>) -> TspTour<T> {
    let mst = minimum_spanning_tree(inst);
    let doubled: Vec<(Vertex, Vertex)> = mst.iter().flat_map(|&e| [e, e]).collect();
    euler_shortcut(inst, &doubled).expect("doubled spanning tree is Eulerian")
}

/// Christofides: MST plus a minimum-cost perfect matching on its odd-degree
/// vertices, Euler walk, shortcut. At most 1.5 times the optimum.
///
/// The matching runs on integer weights scaled to 2⁴⁰; the rounding error is
/// below `2⁻⁴⁰` of the largest distance per matched edge.
pub fn christofides_tour<T: Scalar>(inst: &Instance<T>) -> TspTour<T> {
    let mut edges = minimum_spanning_tree(inst);
    let mut degree = vec![0usize; inst.num_vertices()];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let odd: Vec<Vertex> = (0..inst.num_vertices()).filter(|&v| degree[v] % 2 == 1).collect();
    let max = odd.iter().flat_map(|&u| odd.iter().map(move |&v| (u, v))).fold(0.0f64, |m, (u, v)| m.max(inst.dist(u, v).as_f64()));
    let scale = if max > 0.0 { (1u64 << 40) as f64 / max } else { 1.0 };
    let pairs = min_cost_perfect_matching(odd.len(), |i, j| (inst.dist(odd[i], odd[j]).as_f64() * scale).round() as i64);
    edges.extend(pairs.into_iter().map(|(i, j)| (odd[i], odd[j])));
    euler_shortcut(inst, &edges).expect("tree plus odd-vertex matching is Eulerian")
}

/// Optimal tour by bitmask dynamic programming. Requires `|V| + 1 ≤ limit`.
pub fn held_karp<T: Scalar>(inst: &Instance<T>, limit: usize) -> Result<TspTour<T>> {
    let n = inst.n();
    let (_, order) = held_karp::optimal_cycle(n, limit, |i| inst.depot_dist(i + 1), |i, j| inst.dist(i + 1, j + 1))?;
    let order = std::iter::once(DEPOT).chain(order.into_iter().map(|i| i + 1)).collect();
    Ok(TspTour::from_order(inst, order))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TspBackend {
    #[default]
    Christofides,
    DoubleTree,
    /// Held–Karp with [`HELD_KARP_LIMIT`].
    Exact,
}

impl TspBackend {
    pub fn as_str(self) -> &'static str {
        match self {
            TspBackend::Christofides => "christofides",
            TspBackend::DoubleTree => "doubletree",
            TspBackend::Exact => "exact",
        }
    }

    /// Approximation factor guaranteed by the backend.
    pub fn alpha(self) -> f64 {
        match self {
            TspBackend::Christofides => 1.5,
            TspBackend::DoubleTree => 2.0,
            TspBackend::Exact => 1.0,
        }
    }

    pub fn tour<T: Scalar>(self, inst: &Instance<T>) -> Result<TspTour<T>> {
        match self {
            TspBackend::Christofides => Ok(christofides_tour(inst)),
            TspBackend::DoubleTree => Ok(double_tree_tour(inst)),
            TspBackend::Exact => held_karp(inst, HELD_KARP_LIMIT),
        }
    }
}

impl fmt::Display for TspBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TspBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "christofides" => Ok(TspBackend::Christofides),
            "doubletree" | "double-tree" => Ok(TspBackend::DoubleTree),
            "exact" | "held-karp" => Ok(TspBackend::Exact),
            other => Err(Error::InvalidParameter(format!("unknown TSP backend `{other}`"))),
        }
    }
}
