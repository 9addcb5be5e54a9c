//! Feasibility checking of CVRP solutions.

use std::fmt;

use crate::instance::{Instance, Vertex, DEPOT};
use crate::scalar::Scalar;
use crate::solution::{cycle_cost, Solution, Variant};

#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    /// A stop that is not a customer of the instance.
    UnknownVertex { tour: usize, vertex: Vertex },
    /// Customer never visited.
    Missing { customer: Vertex },
    /// Customer visited more than once in an unsplittable variant.
    Duplicate { customer: Vertex, visits: usize },
    /// Deliveries to the customer do not add up to its demand.
    Coverage { customer: Vertex, delivered: T, demand: T },
    /// Negative delivery, or partial delivery in an unsplittable variant.
    Delivery { tour: usize, customer: Vertex, amount: T },
    /// Tour load above capacity 1.
    Capacity { tour: usize, load: T },
    /// Cached tour cost disagrees with the metric.
    Cost { tour: usize, stored: T, recomputed: T },
    /// Unit-demand variant on an instance with distinct demands.
    NonUniformDemands,
}

impl<T: Scalar> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVertex { tour, vertex } => write!(f, "tour {tour}: vertex {vertex} is not a customer"),
            Violation::Missing { customer } => write!(f, "customer {customer} is not visited"),
            Violation::Duplicate { customer, visits } => write!(f, "customer {customer} visited {visits} times"),
            Violation::Coverage { customer, delivered, demand } => {
                write!(f, "customer {customer} receives {delivered} of demand {demand}")
            }
            Violation::Delivery { tour, customer, amount } => {
                write!(f, "tour {tour}: invalid delivery {amount} to customer {customer}")
            }
            Violation::Capacity { tour, load } => write!(f, "tour {tour}: load {load} exceeds capacity 1"),
            Violation::Cost { tour, stored, recomputed } => {
                write!(f, "tour {tour}: stored cost {stored} but edges sum to {recomputed}")
            }
            Violation::NonUniformDemands => write!(f, "unit-demand variant requires identical demands"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport<T> {
    pub violations: Vec<Violation<T>>,
    pub recomputed_cost: T,
    pub lower_bound: T,
    /// `recomputed_cost / lower_bound` (1 when the bound is zero).
    pub ratio: T,
}

impl<T: Scalar> VerificationReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn capacity_violations(&self) -> impl Iterator<Item = &Violation<T>> {
        self.violations.iter().filter(|v| matches!(v, Violation::Capacity { .. }))
    }

    pub fn coverage_violations(&self) -> impl Iterator<Item = &Violation<T>> {
        self.violations.iter().filter(|v| {
            matches!(v, Violation::Missing { .. } | Violation::Duplicate { .. } | Violation::Coverage { .. })
        })
    }
}

/// Checks coverage, capacity and cost bookkeeping. Never fails; problems are
/// listed in the report.
pub fn verify_solution<T: Scalar>(inst: &Instance<T>, sol: &Solution<T>, variant: Variant) -> VerificationReport<T> {
    let tol = T::tolerance();
    let mut violations = Vec::new();
    if variant == Variant::Unit && !inst.has_uniform_demands() {
        violations.push(Violation::NonUniformDemands);
    }

    let mut visits = vec![0usize; inst.num_vertices()];
    let mut delivered = vec![T::zero(); inst.num_vertices()];
    let mut recomputed_cost = T::zero();
    for (ti, tour) in sol.tours().iter().enumerate() {
        let mut ok = true;
        for (&v, &amount) in tour.stops().iter().zip(tour.deliveries()) {
            if v == DEPOT || v >= inst.num_vertices() {
                violations.push(Violation::UnknownVertex { tour: ti, vertex: v });
                ok = false;
                continue;
            }
            visits[v] += 1;
            delivered[v] += amount;
            let partial = variant != Variant::Splittable && (amount - inst.demand(v)).abs() > tol;
            if amount < -tol || partial {
                violations.push(Violation::Delivery { tour: ti, customer: v, amount });
            }
        }
        if tour.load() > T::one() + tol {
            violations.push(Violation::Capacity { tour: ti, load: tour.load() });
        }
        if ok {
            let cost = cycle_cost(inst, tour.stops());
            if (cost - tour.cost()).abs() > T::rel_tol(cost) {
                violations.push(Violation::Cost { tour: ti, stored: tour.cost(), recomputed: cost });
            }
            recomputed_cost += cost;
        }
    }

    for v in inst.customers() {
        match visits[v] {
            0 => violations.push(Violation::Missing { customer: v }),
            k if k > 1 && variant != Variant::Splittable => {
                violations.push(Violation::Duplicate { customer: v, visits: k })
            }
            _ => {
                if (delivered[v] - inst.demand(v)).abs() > tol {
                    violations.push(Violation::Coverage { customer: v, delivered: delivered[v], demand: inst.demand(v) });
                }
            }
        }
    }

    let lower_bound = inst.radial_lower_bound();
    let ratio = if lower_bound > T::zero() { recomputed_cost / lower_bound } else { T::one() };
    VerificationReport { violations, recomputed_cost, lower_bound, ratio }
}
