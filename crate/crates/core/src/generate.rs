//! Seeded random instance generators on the unit square, depot at the origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, Vertex};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DemandModel {
    /// Every customer has demand `1/k`.
    Unit(usize),
    /// Demands drawn uniformly from `[0, 1)`.
    Uniform,
    /// `m` planted groups of customers within `spread` of a random center,
    /// each group carrying total demand in `[0.9, 1.0]`.
    Clustered { m: usize, spread: f64 },
}

/// A generated instance plus the planted groups (empty unless clustered).
#[derive(Clone, Debug)]
pub struct Generated<T: Scalar = f64> {
    pub instance: Instance<T>,
    pub clusters: Vec<Vec<Vertex>>,
}

pub fn generate_instance<T: Scalar>(n: usize, model: DemandModel, seed: u64) -> Result<Generated<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (points, demands, clusters) = match model {
        DemandModel::Unit(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("unit demand model needs k ≥ 1".into()));
            }
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
            (pts, vec![1.0 / k as f64; n], Vec::new())
        }
        DemandModel::Uniform => {
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
            let demands = (0..n).map(|_| rng.gen::<f64>()).collect();
            (pts, demands, Vec::new())
        }
        DemandModel::Clustered { m, spread } => clustered(&mut rng, n, m, spread)?,
    };
    let depot = [T::zero(), T::zero()];
    let customers = points.iter().map(|p| [T::of(p[0]), T::of(p[1])]).collect();
    let demands = demands.into_iter().map(T::of).collect();
    let instance = Instance::euclidean(depot, customers, demands)?.with_name(format!("gen-{n}-{seed}"));
    Ok(Generated { instance, clusters })
}

type Raw = (Vec<[f64; 2]>, Vec<f64>, Vec<Vec<Vertex>>);

fn clustered(rng: &mut ChaCha8Rng, n: usize, m: usize, spread: f64) -> Result<Raw> {
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::InvalidParameter(format!("invalid spread {spread}")));
    }
    if n > 0 && (m == 0 || m > n) {
        return Err(Error::InvalidParameter(format!("clustered model needs 1 ≤ m ≤ n, got m = {m}, n = {n}")));
    }
    if n == 0 {
        return Ok((Vec::new(), Vec::new(), Vec::new()));
    }
    // Centers keep the whole disk inside the unit square when possible.
    let margin = spread.min(0.5);
    let centers: Vec<[f64; 2]> = (0..m)
        .map(|_| [rng.gen_range(margin..=1.0 - margin), rng.gen_range(margin..=1.0 - margin)])
        .collect();
    let mut points = Vec::with_capacity(n);
    let mut clusters = vec![Vec::new(); m];
    for i in 0..n {
        let g = i % m;
        let r = spread * rng.gen::<f64>().sqrt();
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        let c = centers[g];
        points.push([c[0] + r * phi.cos(), c[1] + r * phi.sin()]);
        clusters[g].push(i + 1);
    }
    let mut demands = vec![0.0; n];
    for members in &clusters {
        let total = rng.gen_range(0.9..=1.0);
        let weights: Vec<f64> = members.iter().map(|_| rng.gen_range(0.5..1.5)).collect();
        let wsum: f64 = weights.iter().sum();
        for (&v, w) in members.iter().zip(&weights) {
            demands[v - 1] = total * w / wsum;
        }
    }
    Ok((points, demands, clusters))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_instance() {
        let g = generate_instance::<f64>(0, DemandModel::Uniform, 7).unwrap();
        assert_eq!(g.instance.n(), 0);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_instance::<f64>(25, DemandModel::Uniform, 3).unwrap();
        let b = generate_instance::<f64>(25, DemandModel::Uniform, 3).unwrap();
        let c = generate_instance::<f64>(25, DemandModel::Uniform, 4).unwrap();
        assert_eq!(a.instance, b.instance);
        assert_ne!(a.instance, c.instance);
    }

    #[test]
    fn clustered_groups_carry_almost_unit_demand() {
        let g = generate_instance::<f64>(30, DemandModel::Clustered { m: 3, spread: 0.01 }, 11).unwrap();
        assert_eq!(g.clusters.len(), 3);
        for members in &g.clusters {
            let d: f64 = members.iter().map(|&v| g.instance.demand(v)).sum();
            assert!((0.9 - 1e-12..=1.0 + 1e-12).contains(&d), "group demand {d}");
            let p = g.instance.coords().unwrap();
            for &u in members {
                for &v in members {
                    assert!(g.instance.dist(u, v) <= 0.02 + 1e-12, "{:?} {:?}", p[u], p[v]);
                }
            }
        }
    }

    #[test]
    fn unit_model_demands() {
        let g = generate_instance::<f32>(5, DemandModel::Unit(4), 0).unwrap();
        assert!(g.instance.customer_demands().iter().all(|&d| d == 0.25));
        assert!(g.instance.has_uniform_demands());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(generate_instance::<f64>(3, DemandModel::Unit(0), 0).is_err());
        assert!(generate_instance::<f64>(3, DemandModel::Clustered { m: 0, spread: 0.1 }, 0).is_err());
        assert!(generate_instance::<f64>(3, DemandModel::Clustered { m: 1, spread: -1.0 }, 0).is_err());
    }
}
