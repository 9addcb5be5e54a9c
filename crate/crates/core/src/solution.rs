use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::{Instance, Vertex, DEPOT};
use crate::scalar::{sum, Scalar};

/// Demand model of the routing problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Every customer is served by exactly one tour.
    #[default]
    General,
    /// All demands are equal; unsplittable.
    Unit,
    /// A customer's demand may be split across several tours.
    Splittable,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::General, Variant::Unit, Variant::Splittable];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::Unit => "unit",
            Variant::Splittable => "splittable",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Variant::General),
            "unit" => Ok(Variant::Unit),
            "splittable" => Ok(Variant::Splittable),
            other => Err(Error::InvalidParameter(format!("unknown variant `{other}`"))),
        }
    }
}

/// A cycle `s, stops…, s` with the amount delivered at each stop.
#[derive(Clone, Debug, PartialEq)]
pub struct Tour<T: Scalar = f64> {
    stops: Vec<Vertex>,
    deliveries: Vec<T>,
    cost: T,
    load: T,
}

impl<T: Scalar> Tour<T> {
    /// Tour delivering the full demand of every stop.
    pub fn new(inst: &Instance<T>, stops: Vec<Vertex>) -> Self {
        let deliveries = stops.iter().map(|&v| inst.demand(v)).collect();
        Self::with_deliveries(inst, stops, deliveries)
    }

    /// Tour with explicit per-stop deliveries (splittable demands).
    pub fn with_deliveries(inst: &Instance<T>, stops: Vec<Vertex>, deliveries: Vec<T>) -> Self {
        assert_eq!(stops.len(), deliveries.len(), "one delivery per stop");
        let cost = cycle_cost(inst, &stops);
        let load = sum(deliveries.iter().copied());
        Tour { stops, deliveries, cost, load }
    }

    /// Customers in visiting order; the depot is implicit at both ends.
    pub fn stops(&self) -> &[Vertex] {
        &self.stops
    }

    pub fn deliveries(&self) -> &[T] {
        &self.deliveries
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    pub fn load(&self) -> T {
        self.load
    }

    /// The closed vertex sequence `s, stops…, s`.
    pub fn cycle(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.stops.len() + 2);
        out.push(DEPOT);
        out.extend_from_slice(&self.stops);
        out.push(DEPOT);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }
}

/// Cost of the cycle `s, stops…, s`.
pub fn cycle_cost<T: Scalar>(inst: &Instance<T>, stops: &[Vertex]) -> T {
    match (stops.first(), stops.last()) {
        (Some(&first), Some(&last)) => {
            inst.depot_dist(first) + sum(stops.windows(2).map(|w| inst.dist(w[0], w[1]))) + inst.depot_dist(last)
        }
        _ => T::zero(),
    }
}

/// A set of depot tours.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T: Scalar = f64> {
    tours: Vec<Tour<T>>,
    cost: T,
}

impl<T: Scalar> Solution<T> {
    pub fn new(tours: Vec<Tour<T>>) -> Self {
        let tours: Vec<Tour<T>> = tours.into_iter().filter(|t| !t.is_empty()).collect();
        let cost = sum(tours.iter().map(Tour::cost));
        Solution { tours, cost }
    }

    pub fn empty() -> Self {
        Solution { tours: Vec::new(), cost: T::zero() }
    }

    pub fn tours(&self) -> &[Tour<T>] {
        &self.tours
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.tours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tours.is_empty()
    }
}
