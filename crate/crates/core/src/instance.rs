//! Instance model: depot, customers, demands and the semi-metric.
//!
//! Vertices are numbered `0..=n`. Vertex [`DEPOT`] (0) is the depot and
//! `1..=n` are the customers in input order. Demands are scaled so that the
//! vehicle capacity is 1.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::scalar::{cmp, sum, Scalar};

pub type Vertex = usize;

/// Index of the depot in every instance.
pub const DEPOT: Vertex = 0;

/// Distance function over `{s} ∪ V`.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric<T> {
    /// Points in the plane, distances evaluated exactly (no rounding).
    Euclidean(Vec<[T; 2]>),
    /// Dense symmetric matrix stored row-major.
    Matrix { size: usize, data: Vec<T> },
}

impl<T: Scalar> Metric<T> {
    pub fn len(&self) -> usize {
        match self {
            Metric::Euclidean(points) => points.len(),
            Metric::Matrix { size, .. } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> T {
        match self {
            Metric::Euclidean(points) => {
                let [ax, ay] = points[u];
                let [bx, by] = points[v];
                (ax - bx).hypot(ay - by)
            }
            Metric::Matrix { size, data } => data[u * size + v],
        }
    }
}

/// A capacitated vehicle routing instance `(V, s, c, d)` with capacity 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T: Scalar = f64> {
    name: String,
    metric: Metric<T>,
    /// Indexed by vertex; the depot entry is always zero.
    demands: Vec<T>,
}

impl<T: Scalar> Instance<T> {
    /// Builds a Euclidean instance. `demands[i]` belongs to `customers[i]`.
    pub fn euclidean(depot: [T; 2], customers: Vec<[T; 2]>, demands: Vec<T>) -> Result<Self> {
        if customers.len() != demands.len() {
            return Err(Error::Validation(format!(
                "{} customers but {} demands",
                customers.len(),
                demands.len()
            )));
        }
        if customers.iter().chain(std::iter::once(&depot)).any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Validation("non-finite coordinate".into()));
        }
        let mut points = Vec::with_capacity(customers.len() + 1);
        points.push(depot);
        points.extend(customers);
        Self::assemble(Metric::Euclidean(points), demands)
    }

    /// Builds an instance from a full distance matrix whose row 0 is the depot.
    ///
    /// Symmetry, non-negativity and the zero diagonal are always checked; the
    /// triangle inequality is checked separately by [`Instance::validate_metric`].
    pub fn from_matrix(matrix: Vec<Vec<T>>, demands: Vec<T>) -> Result<Self> {
        let size = matrix.len();
        if size == 0 {
            return Err(Error::Validation("distance matrix has no depot row".into()));
        }
        if demands.len() + 1 != size {
            return Err(Error::Validation(format!(
                "matrix of size {size} needs {} customer demands, got {}",
                size - 1,
                demands.len()
            )));
        }
        let mut data = Vec::with_capacity(size * size);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != size {
                return Err(Error::Validation(format!("matrix row {i} has {} entries, expected {size}", row.len())));
            }
            data.extend_from_slice(row);
        }
        for i in 0..size {
            if data[i * size + i] != T::zero() {
                return Err(Error::Validation(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..size {
                let (a, b) = (data[i * size + j], data[j * size + i]);
                if !a.is_finite() || a < T::zero() {
                    return Err(Error::Validation(format!("invalid distance c({i},{j}) = {a}")));
                }
                if (a - b).abs() > T::rel_tol(a.max(b)) {
                    return Err(Error::Validation(format!("asymmetric matrix: c({i},{j}) = {a} but c({j},{i}) = {b}")));
                }
            }
        }
        Self::assemble(Metric::Matrix { size, data }, demands)
    }

    fn assemble(metric: Metric<T>, customer_demands: Vec<T>) -> Result<Self> {
        for (i, &d) in customer_demands.iter().enumerate() {
            if !d.is_finite() || d < T::zero() {
                return Err(Error::Validation(format!("customer {} has negative demand {d}", i + 1)));
            }
            if d > T::one() + T::tolerance() {
                return Err(Error::Validation(format!("customer {} demand {d} exceeds capacity", i + 1)));
            }
        }
        let mut demands = Vec::with_capacity(customer_demands.len() + 1);
        demands.push(T::zero());
        demands.extend(customer_demands);
        Ok(Instance { name: String::new(), metric, demands })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    /// Number of customers `|V|`.
    pub fn n(&self) -> usize {
        self.demands.len() - 1
    }

    /// Number of vertices including the depot.
    pub fn num_vertices(&self) -> usize {
        self.demands.len()
    }

    pub fn depot(&self) -> Vertex {
        DEPOT
    }

    pub fn customers(&self) -> RangeInclusive<Vertex> {
        1..=self.n()
    }

    pub fn is_customer(&self, v: Vertex) -> bool {
        v != DEPOT && v < self.demands.len()
    }

    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> T {
        self.metric.dist(u, v)
    }

    #[inline]
    pub fn depot_dist(&self, v: Vertex) -> T {
        self.metric.dist(DEPOT, v)
    }

    #[inline]
    pub fn demand(&self, v: Vertex) -> T {
        self.demands[v]
    }

    /// Customer demands in vertex order (without the depot).
    pub fn customer_demands(&self) -> &[T] {
        &self.demands[1..]
    }

    pub fn total_demand(&self) -> T {
        sum(self.customer_demands().iter().copied())
    }

    /// Coordinates when the metric is Euclidean.
    pub fn coords(&self) -> Option<&[[T; 2]]> {
        match &self.metric {
            Metric::Euclidean(points) => Some(points),
            Metric::Matrix { .. } => None,
        }
    }

    /// `detour(u, w) = c(u, w) + c(s, u) - c(s, w)`.
    #[inline]
    pub fn detour(&self, u: Vertex, w: Vertex) -> T {
        self.dist(u, w) + self.depot_dist(u) - self.depot_dist(w)
    }

    /// `Σ_v 2·d(v)·c(s, v)`, a lower bound on every feasible solution.
    pub fn radial_lower_bound(&self) -> T {
        let two = T::of(2.0);
        sum(self.customers().map(|v| two * self.demand(v) * self.depot_dist(v)))
    }

    pub fn depot_order(&self) -> DepotOrder {
        DepotOrder::new(self)
    }

    /// Checks the triangle inequality over all triples, `O(n³)`.
    pub fn validate_metric(&self) -> Result<()> {
        let n = self.num_vertices();
        let scale = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).fold(T::zero(), |m, (u, v)| m.max(self.dist(u, v)));
        let tol = T::rel_tol(scale);
        for u in 0..n {
            for v in 0..n {
                let uv = self.dist(u, v);
                for w in 0..n {
                    if self.dist(u, w) > uv + self.dist(v, w) + tol {
                        return Err(Error::Validation(format!(
                            "triangle inequality violated: c({u},{w}) > c({u},{v}) + c({v},{w})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when every customer has the same demand (the unit-demand variant).
    pub fn has_uniform_demands(&self) -> bool {
        let d = self.customer_demands();
        d.windows(2).all(|w| (w[0] - w[1]).abs() <= T::tolerance())
    }

    /// Restricts the instance to the given customers, renumbered `1..=k` in the given order.
    pub fn restrict(&self, customers: &[Vertex]) -> Self {
        let keep: Vec<Vertex> = std::iter::once(DEPOT).chain(customers.iter().copied()).collect();
        let metric = match &self.metric {
            Metric::Euclidean(points) => Metric::Euclidean(keep.iter().map(|&v| points[v]).collect()),
            Metric::Matrix { .. } => {
                let size = keep.len();
                let data = keep.iter().flat_map(|&u| keep.iter().map(move |&v| (u, v))).map(|(u, v)| self.dist(u, v)).collect();
                Metric::Matrix { size, data }
            }
        };
        let demands = keep.iter().map(|&v| self.demands[v]).collect();
        Instance { name: self.name.clone(), metric, demands }
    }
}

/// Total order on `{s} ∪ V` by depot distance: `s` first, ties by vertex index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepotOrder {
    order: Vec<Vertex>,
    position: Vec<usize>,
}

impl DepotOrder {
    pub fn new<T: Scalar>(inst: &Instance<T>) -> Self {
        let mut customers: Vec<Vertex> = inst.customers().collect();
        customers.sort_by(|&a, &b| cmp(&inst.depot_dist(a), &inst.depot_dist(b)).then(a.cmp(&b)));
        let mut order = Vec::with_capacity(customers.len() + 1);
        order.push(DEPOT);
        order.extend(customers);
        let mut position = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        DepotOrder { order, position }
    }

    /// All vertices, depot first.
    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    /// Customers in increasing depot distance.
    pub fn customers(&self) -> &[Vertex] {
        &self.order[1..]
    }

    pub fn position(&self, v: Vertex) -> usize {
        self.position[v]
    }

    /// `a ≺ b`.
    #[inline]
    pub fn precedes(&self, a: Vertex, b: Vertex) -> bool {
        self.position[a] < self.position[b]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Instance {
        let customers = xs.iter().map(|&x| [x, 0.0]).collect();
        Instance::euclidean([0.0, 0.0], customers, vec![0.1; xs.len()]).unwrap()
    }

    #[test]
    fn detour_from_depot_is_zero() {
        let inst = line(&[1.0, 2.5, 4.0]);
        for v in inst.customers() {
            assert_eq!(inst.detour(DEPOT, v), 0.0);
        }
    }

    #[test]
    fn detour_collinear_is_zero() {
        let inst = line(&[1.0, 2.0]);
        assert_eq!(inst.detour(1, 2), 0.0);
    }

    #[test]
    fn detour_right_angle() {
        let inst = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0], [0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        // c(u,w) = √2, c(s,u) = 1, c(s,w) = 1
        assert!((inst.detour(1, 2) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn radial_bound_empty_and_single() {
        let empty = Instance::<f64>::euclidean([0.0, 0.0], vec![], vec![]).unwrap();
        assert_eq!(empty.radial_lower_bound(), 0.0);
        let one = Instance::euclidean([0.0, 0.0], vec![[3.0, 4.0]], vec![1.0]).unwrap();
        assert_eq!(one.radial_lower_bound(), 10.0);
    }

    #[test]
    fn depot_order_sorts_by_distance() {
        let inst = line(&[3.0, 1.0, 2.0]);
        assert_eq!(inst.depot_order().order(), &[0, 2, 3, 1]);
    }

    #[test]
    fn depot_order_ties_by_index() {
        let inst = Instance::euclidean([0.0, 0.0], vec![[0.0, 2.0], [2.0, 0.0], [1.0, 0.0]], vec![0.0; 3]).unwrap();
        let order = inst.depot_order();
        assert_eq!(order.order(), &[0, 3, 1, 2]);
        assert!(order.precedes(1, 2));
        assert!(order.precedes(0, 3));
    }

    #[test]
    fn matrix_rejects_asymmetry() {
        let m = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(Instance::from_matrix(m, vec![0.5]), Err(Error::Validation(_))));
    }

    #[test]
    fn triangle_violation_detected() {
        let m = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let inst = Instance::from_matrix(m, vec![0.1, 0.1]).unwrap();
        assert!(inst.validate_metric().is_err());
    }

    #[test]
    fn demand_above_capacity_rejected() {
        assert!(Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0]], vec![1.2]).is_err());
    }

    #[test]
    fn restrict_keeps_distances() {
        let inst = line(&[1.0, 2.0, 4.0]);
        let sub = inst.restrict(&[3, 1]);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.dist(1, 2), inst.dist(3, 1));
        assert_eq!(sub.depot_dist(1), 4.0);
    }
}
