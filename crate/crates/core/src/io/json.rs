//! Native JSON formats for instances and solutions.
//!
//! Instance:
//! ```json
//! { "name": "…", "depot": [x, y] | row, "customers": [[x, y], …] | [row, …],
//!   "demands": [d, …], "metric": { "type": "euclidean" | "matrix", "data": [[…], …] } }
//! ```
//! Objects are written through `serde_json::Value`, whose maps keep keys sorted.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::instance::{Instance, Metric, Vertex, DEPOT};
use crate::scalar::Scalar;
use crate::solution::{Solution, Tour, Variant};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| invalid(format!("missing field `{key}`")))
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| invalid(format!("{what}: expected a number, found {v}")))
}

fn index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| invalid(format!("{what}: expected an index, found {v}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| invalid(format!("{what}: expected an array")))
}

fn point<T: Scalar>(v: &Value, what: &str) -> Result<[T; 2]> {
    match array(v, what)?.as_slice() {
        [x, y] => Ok([T::of(number(x, what)?), T::of(number(y, what)?)]),
        _ => Err(invalid(format!("{what}: expected [x, y]"))),
    }
}

pub fn instance_from_value<T: Scalar>(value: &Value) -> Result<Instance<T>> {
    let obj = value.as_object().ok_or_else(|| invalid("instance must be a JSON object"))?;
    let name = obj.get("name").and_then(Value::as_str).unwrap_or("").to_string();
    let demands: Vec<T> =
        array(field(obj, "demands")?, "demands")?.iter().map(|d| number(d, "demands").map(T::of)).collect::<Result<_>>()?;
    let metric = field(obj, "metric")?.as_object().ok_or_else(|| invalid("`metric` must be an object"))?;
    let kind = field(metric, "type")?.as_str().unwrap_or("");
    let customers = array(field(obj, "customers")?, "customers")?;
    let inst = match kind {
        "euclidean" => {
            let depot = point(field(obj, "depot")?, "depot")?;
            let pts = customers.iter().map(|p| point(p, "customers")).collect::<Result<_>>()?;
            Instance::euclidean(depot, pts, demands)?
        }
        "matrix" => {
            let rows = array(field(metric, "data")?, "metric.data")?;
            let data: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| array(r, "metric.data")?.iter().map(|x| number(x, "metric.data")).collect())
                .collect::<Result<_>>()?;
            let size = data.len();
            let depot = index(field(obj, "depot")?, "depot")?;
            let rows_of: Vec<usize> = std::iter::once(Ok(depot))
                .chain(customers.iter().map(|c| index(c, "customers")))
                .collect::<Result<_>>()?;
            if let Some(&bad) = rows_of.iter().find(|&&r| r >= size) {
                return Err(invalid(format!("row index {bad} outside matrix of size {size}")));
            }
            if let Some(row) = data.iter().find(|r| r.len() != size) {
                return Err(invalid(format!("matrix row has {} entries, expected {size}", row.len())));
            }
            let matrix = rows_of.iter().map(|&a| rows_of.iter().map(|&b| T::of(data[a][b])).collect()).collect();
            Instance::from_matrix(matrix, demands)?
        }
        other => return Err(invalid(format!("unknown metric type `{other}`"))),
    };
    Ok(inst.with_name(name))
}

pub fn instance_to_value<T: Scalar>(inst: &Instance<T>) -> Value {
    let demands: Vec<f64> = inst.customer_demands().iter().map(|d| d.as_f64()).collect();
    match inst.metric() {
        Metric::Euclidean(points) => {
            let pt = |p: &[T; 2]| json!([p[0].as_f64(), p[1].as_f64()]);
            json!({
                "name": inst.name(),
                "depot": pt(&points[DEPOT]),
                "customers": points[1..].iter().map(pt).collect::<Vec<_>>(),
                "demands": demands,
                "metric": { "type": "euclidean" },
            })
        }
        Metric::Matrix { size, .. } => {
            let data: Vec<Vec<f64>> = (0..*size).map(|u| (0..*size).map(|v| inst.dist(u, v).as_f64()).collect()).collect();
            json!({
                "name": inst.name(),
                "depot": DEPOT,
                "customers": inst.customers().collect::<Vec<_>>(),
                "demands": demands,
                "metric": { "type": "matrix", "data": data },
            })
        }
    }
}

/// Solution as `{ "tours": [[0, …, 0], …], "cost": …, "variant": …, "deliveries"? }`.
/// Per-stop deliveries are written for the splittable variant only.
pub fn solution_to_value<T: Scalar>(sol: &Solution<T>, variant: Variant) -> Value {
    let tours: Vec<Vec<Vertex>> = sol.tours().iter().map(Tour::cycle).collect();
    let mut obj = json!({ "tours": tours, "cost": sol.cost().as_f64(), "variant": variant.as_str() });
    if variant == Variant::Splittable {
        let deliveries: Vec<Vec<f64>> =
            sol.tours().iter().map(|t| t.deliveries().iter().map(|d| d.as_f64()).collect()).collect();
        obj["deliveries"] = json!(deliveries);
    }
    obj
}

/// Reads a solution. Tour costs are recomputed from the instance; the stored
/// `cost` field is returned separately so callers can compare.
pub fn solution_from_value<T: Scalar>(inst: &Instance<T>, value: &Value) -> Result<(Solution<T>, Variant, Option<f64>)> {
    let obj = value.as_object().ok_or_else(|| invalid("solution must be a JSON object"))?;
    let variant = match obj.get("variant").and_then(Value::as_str) {
        Some(s) => s.parse()?,
        None => Variant::General,
    };
    let cost = obj.get("cost").and_then(Value::as_f64);
    let tours = array(field(obj, "tours")?, "tours")?;
    let deliveries = match obj.get("deliveries") {
        Some(d) => Some(array(d, "deliveries")?),
        None => None,
    };
    let mut out = Vec::with_capacity(tours.len());
    for (ti, tour) in tours.iter().enumerate() {
        let mut stops: Vec<Vertex> = array(tour, "tours")?.iter().map(|v| index(v, "tours")).collect::<Result<_>>()?;
        if stops.first() == Some(&DEPOT) {
            stops.remove(0);
        }
        if stops.last() == Some(&DEPOT) {
            stops.pop();
        }
        if let Some(&bad) = stops.iter().find(|&&v| v >= inst.num_vertices()) {
            return Err(invalid(format!("tour {ti}: vertex {bad} out of range")));
        }
        match deliveries {
            Some(all) => {
                let amounts = all.get(ti).ok_or_else(|| invalid(format!("no deliveries for tour {ti}")))?;
                let amounts: Vec<T> =
                    array(amounts, "deliveries")?.iter().map(|d| number(d, "deliveries").map(T::of)).collect::<Result<_>>()?;
                if amounts.len() != stops.len() {
                    return Err(invalid(format!("tour {ti}: {} stops but {} deliveries", stops.len(), amounts.len())));
                }
                out.push(Tour::with_deliveries(inst, stops, amounts));
            }
            None => out.push(Tour::new(inst, stops)),
        }
    }
    Ok((Solution::new(out), variant, cost))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_round_trip() {
        let inst = Instance::euclidean([0.5, 0.25], vec![[1.0, 2.0], [3.0, -1.0]], vec![0.25, 1.0]).unwrap().with_name("rt");
        let back: Instance = instance_from_value(&instance_to_value(&inst)).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn matrix_depot_row_is_normalized() {
        let v = json!({
            "depot": 2,
            "customers": [0, 1],
            "demands": [0.5, 0.5],
            "metric": { "type": "matrix", "data": [[0, 2, 1], [2, 0, 3], [1, 3, 0]] }
        });
        let inst: Instance = instance_from_value(&v).unwrap();
        assert_eq!(inst.depot_dist(1), 1.0);
        assert_eq!(inst.depot_dist(2), 3.0);
        assert_eq!(inst.dist(1, 2), 2.0);
    }

    #[test]
    fn keys_are_sorted() {
        let inst = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0]], vec![0.5]).unwrap();
        let text = serde_json::to_string(&instance_to_value(&inst)).unwrap();
        let keys = ["\"customers\"", "\"demands\"", "\"depot\"", "\"metric\"", "\"name\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
    }

    #[test]
    fn solution_round_trip_splittable() {
        let inst = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0], [2.0, 0.0]], vec![0.75, 0.5]).unwrap();
        let sol = Solution::new(vec![
            Tour::with_deliveries(&inst, vec![1, 2], vec![0.75, 0.25]),
            Tour::with_deliveries(&inst, vec![2], vec![0.25]),
        ]);
        let v = solution_to_value(&sol, Variant::Splittable);
        assert_eq!(v["tours"], json!([[0, 1, 2, 0], [0, 2, 0]]));
        let (back, variant, cost) = solution_from_value(&inst, &v).unwrap();
        assert_eq!(back, sol);
        assert_eq!(variant, Variant::Splittable);
        assert_eq!(cost, Some(8.0));
    }
}
