//! Peak clusters of tours and the reduction from capacitated routing to
//! vehicle routing with target groups.
//!
//! Target `k` of a [`VrtgInstance`] is a copy of customer `targets[k]` and has
//! node id `n + 1 + k`, so customers and targets share one node space
//! `0..=n + |targets|` with the depot at `0`.

use petgraph::unionfind::UnionFind;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::{Instance, Vertex, DEPOT};
use crate::scalar::{cmp, sum, Scalar};
use crate::solution::Tour;

/// Default τ.
pub const DEFAULT_TAU: f64 = 0.054;
/// Default ρ.
pub const DEFAULT_RHO: f64 = 0.022;
/// Default γ of the nice-subset step.
pub const DEFAULT_GAMMA: f64 = 148.0;
/// Default difficulty constant ε.
pub const DEFAULT_EPSILON: f64 = 1.0 / 6000.0;

/// Constants of the reduction and of the target-group solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterParams<T: Scalar = f64> {
    tau: T,
    rho: T,
    kappa: T,
    gamma: T,
    epsilon: T,
}

impl<T: Scalar> ClusterParams<T> {
    /// `τ`, `ρ` with the default `γ` and `ε`.
    pub fn new(tau: T, rho: T) -> Result<Self> {
        Self::with_all(tau, rho, T::of(DEFAULT_GAMMA), T::of(DEFAULT_EPSILON))
    }

    pub fn with_all(tau: T, rho: T, gamma: T, epsilon: T) -> Result<Self> {
        let kappa = compute_kappa(tau, rho)?;
        if !(gamma > T::of(2.0) && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be > 2, got {gamma}")));
        }
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(ClusterParams { tau, rho, kappa, gamma, epsilon })
    }

    pub fn with_gamma(self, gamma: T) -> Result<Self> {
        Self::with_all(self.tau, self.rho, gamma, self.epsilon)
    }

    pub fn with_epsilon(self, epsilon: T) -> Result<Self> {
        Self::with_all(self.tau, self.rho, self.gamma, epsilon)
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// `c(u, v) + κ·detour(u, v) < ρ·c(s, v)`: `u` lies in the cluster around `v`.
    #[inline]
    pub fn in_cluster(&self, inst: &Instance<T>, u: Vertex, v: Vertex) -> bool {
        inst.dist(u, v) + self.kappa * inst.detour(u, v) < self.rho * inst.depot_dist(v)
    }

    /// Membership of `v` in `B_t`.
    #[inline]
    fn in_b_set(&self, inst: &Instance<T>, v: Vertex, t: Vertex) -> bool {
        let one = T::one();
        let radius = T::of(3.0) * self.rho / (one - self.rho) * inst.depot_dist(v);
        let c = inst.dist(v, t);
        c < radius && c < T::of(6.0) * self.rho * inst.depot_dist(t) - radius
    }
}

impl<T: Scalar> Default for ClusterParams<T> {
    fn default() -> Self {
        Self::new(T::of(DEFAULT_TAU), T::of(DEFAULT_RHO)).expect("default constants are valid")
    }
}

/// `κ = (1 − 2τ − τρ) / (2τ)` for `0 < τ, ρ ≤ 1/6`.
pub fn compute_kappa<T: Scalar>(tau: T, rho: T) -> Result<T> {
    let sixth = T::one() / T::of(6.0);
    for (name, x) in [("tau", tau), ("rho", rho)] {
        if !(x > T::zero() && x <= sixth + T::tolerance()) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1/6], got {x}")));
        }
    }
    let two = T::of(2.0);
    Ok((T::one() - two * tau - tau * rho) / (two * tau))
}

/// The peak cluster `C(Q)` of a tour.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakCluster<T: Scalar = f64> {
    /// Tour vertex farthest from the depot (the depot for an empty tour).
    pub peak: Vertex,
    pub members: Vec<Vertex>,
    /// Amount the tour delivers to the members.
    pub demand: T,
    pub large: bool,
}

/// Peak cluster of `tour`. Demands are the tour's deliveries, which equal the
/// customer demands for unsplit tours.
pub fn peak_cluster<T: Scalar>(inst: &Instance<T>, tour: &Tour<T>, params: &ClusterParams<T>) -> PeakCluster<T> {
    let peak = tour
        .stops()
        .iter()
        .copied()
        .fold(DEPOT, |best, v| match cmp(&inst.depot_dist(v), &inst.depot_dist(best)) {
            std::cmp::Ordering::Greater => v,
            std::cmp::Ordering::Equal if v < best => v,
            _ => best,
        });
    let mut members = Vec::new();
    let mut demand = T::zero();
    for (&u, &amount) in tour.stops().iter().zip(tour.deliveries()) {
        if params.in_cluster(inst, u, peak) {
            if !members.contains(&u) {
                members.push(u);
            }
            demand += amount;
        }
    }
    members.sort_unstable();
    let large = demand > T::one() - params.tau;
    PeakCluster { peak, members, demand, large }
}

/// `c(Q) − Σ 2·d(v)·c(s, v)` for a tour with small peak cluster.
///
/// For tours of load at most one this is at least `τρ·c(Q)`; debug builds
/// check it.
pub fn small_cluster_slack<T: Scalar>(inst: &Instance<T>, tour: &Tour<T>, params: &ClusterParams<T>) -> Result<T> {
    let cluster = peak_cluster(inst, tour, params);
    if cluster.large {
        return Err(Error::Precondition(format!("peak cluster of demand {} is large", cluster.demand)));
    }
    let two = T::of(2.0);
    let radial = sum(tour.stops().iter().zip(tour.deliveries()).map(|(&v, &d)| two * d * inst.depot_dist(v)));
    let slack = tour.cost() - radial;
    debug_assert!(
        !tour.load().le_tol(T::one())
            || slack >= params.tau * params.rho * tour.cost() - T::rel_tol(tour.cost()),
        "small cluster slack {slack} below τρ·c(Q)"
    );
    Ok(slack)
}

/// An instance of vehicle routing with target groups.
#[derive(Clone, Debug)]
pub struct VrtgInstance<T: Scalar = f64> {
    base: Instance<T>,
    targets: Vec<Vertex>,
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    b: Vec<usize>,
    b_target: Vec<Vec<Vertex>>,
    b_group: Vec<Vec<Vertex>>,
    selection: Vec<Vec<Vertex>>,
}

impl<T: Scalar> VrtgInstance<T> {
    /// A target-group instance given explicitly. `targets` are customer
    /// positions, `groups` partition the target indices and `b` is even and
    /// positive per group. The B-sets are left empty.
    pub fn new(base: Instance<T>, targets: Vec<Vertex>, groups: Vec<Vec<usize>>, b: Vec<usize>) -> Result<Self> {
        if let Some(&t) = targets.iter().find(|&&t| !base.is_customer(t)) {
            return Err(Error::InvalidParameter(format!("target position {t} is not a customer")));
        }
        if groups.len() != b.len() {
            return Err(Error::InvalidParameter("one b value per group required".into()));
        }
        if let Some(&x) = b.iter().find(|&&x| x == 0 || x % 2 == 1) {
            return Err(Error::InvalidParameter(format!("b must be even and positive, got {x}")));
        }
        let mut group_of = vec![usize::MAX; targets.len()];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidParameter(format!("group {g} is empty")));
            }
            for &k in members {
                if k >= targets.len() || group_of[k] != usize::MAX {
                    return Err(Error::InvalidParameter(format!("groups must partition the targets (index {k})")));
                }
                group_of[k] = g;
            }
        }
        if group_of.contains(&usize::MAX) {
            return Err(Error::InvalidParameter("every target needs a group".into()));
        }
        let k = targets.len();
        let ng = groups.len();
        Ok(VrtgInstance {
            base,
            targets,
            groups,
            group_of,
            b,
            b_target: vec![Vec::new(); k],
            b_group: vec![Vec::new(); ng],
            selection: vec![Vec::new(); k],
        })
    }

    pub fn base(&self) -> &Instance<T> {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Customer positions of the targets.
    pub fn targets(&self) -> &[Vertex] {
        &self.targets
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    /// Target indices per group.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_of(&self, target: usize) -> usize {
        self.group_of[target]
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    /// `Σ b(𝒯)`: the number of paths of a solution.
    pub fn total_b(&self) -> usize {
        self.b.iter().sum()
    }

    /// `B_t` per target index.
    pub fn b_target(&self) -> &[Vec<Vertex>] {
        &self.b_target
    }

    /// `B_𝒯` per group.
    pub fn b_group(&self) -> &[Vec<Vertex>] {
        &self.b_group
    }

    /// `C_t \ Y_t` at the moment each target was selected.
    pub fn selection_sets(&self) -> &[Vec<Vertex>] {
        &self.selection
    }

    /// Number of nodes: depot, customers and target copies.
    pub fn num_nodes(&self) -> usize {
        self.base.num_vertices() + self.targets.len()
    }

    /// Node id of target `k`.
    #[inline]
    pub fn target_node(&self, k: usize) -> Vertex {
        self.base.num_vertices() + k
    }

    /// Target index of a node, if it is a target.
    #[inline]
    pub fn target_index(&self, node: Vertex) -> Option<usize> {
        node.checked_sub(self.base.num_vertices()).filter(|&k| k < self.targets.len())
    }

    #[inline]
    pub fn is_target(&self, node: Vertex) -> bool {
        self.target_index(node).is_some()
    }

    /// The base-instance vertex at the position of `node`.
    #[inline]
    pub fn position(&self, node: Vertex) -> Vertex {
        self.target_index(node).map_or(node, |k| self.targets[k])
    }

    /// Distance between nodes.
    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> T {
        self.base.dist(self.position(u), self.position(v))
    }

    /// Debug dump: targets, groups, b and the B-sets.
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n(),
            "targets": self.targets,
            "groups": self.groups,
            "b": self.b,
            "b_target": self.b_target,
            "b_group": self.b_group,
            "selection": self.selection,
        })
    }
}

/// Builds the target-group instance: guesses targets from large clusters
/// around far customers, groups targets with intersecting B-sets and sets
/// `b(𝒯) = 2⌊d(B_𝒯)/(1 − τ)⌋`.
pub fn build_vrtg_instance<T: Scalar>(inst: &Instance<T>, params: &ClusterParams<T>) -> VrtgInstance<T> {
    let n = inst.n();
    let order = inst.depot_order();
    let mut in_y = vec![false; n + 1];
    let mut targets = Vec::new();
    let mut selection = Vec::new();
    for &v in order.customers().iter().rev() {
        if in_y[v] {
            continue;
        }
        let fresh: Vec<Vertex> = inst.customers().filter(|&u| !in_y[u] && params.in_cluster(inst, u, v)).collect();
        if sum(fresh.iter().map(|&u| inst.demand(u))) > T::one() - params.tau {
            // Members of C_v already in Y stay there; only the fresh ones change.
            for &u in &fresh {
                in_y[u] = true;
            }
            targets.push(v);
            selection.push(fresh);
        }
    }

    let b_target: Vec<Vec<Vertex>> =
        targets.iter().map(|&t| inst.customers().filter(|&v| params.in_b_set(inst, v, t)).collect()).collect();

    // Targets sharing a B-member end up in one component.
    let mut uf = UnionFind::<usize>::new(targets.len());
    let mut first_owner = vec![usize::MAX; n + 1];
    for (k, members) in b_target.iter().enumerate() {
        for &v in members {
            if first_owner[v] == usize::MAX {
                first_owner[v] = k;
            } else {
                uf.union(first_owner[v], k);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; targets.len()];
    for k in 0..targets.len() {
        let root = uf.find(k);
        if label[root] == usize::MAX {
            label[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[root]].push(k);
    }

    let one_minus_tau = T::one() - params.tau;
    let mut b_group = Vec::with_capacity(groups.len());
    let mut b = Vec::with_capacity(groups.len());
    for members in &groups {
        let mut union: Vec<Vertex> = members.iter().flat_map(|&k| b_target[k].iter().copied()).collect();
        union.sort_unstable();
        union.dedup();
        let demand = sum(union.iter().map(|&v| inst.demand(v)));
        let half = (demand / one_minus_tau).floor().to_usize().unwrap_or(0);
        // Each group holds a selected cluster of demand > 1 − τ, so half ≥ 1
        // up to rounding.
        b.push(2 * half.max(1));
        b_group.push(union);
    }

    let mut out = VrtgInstance::new(inst.clone(), targets, groups, b).expect("construction yields a valid instance");
    out.b_target = b_target;
    out.b_group = b_group;
    out.selection = selection;
    log::debug!("target-group instance: {} targets, {} groups, b = {:?}", out.num_targets(), out.num_groups(), out.b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, DemandModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sixth() -> f64 {
        1.0 / 6.0
    }

    #[test]
    fn kappa_values() {
        assert!((compute_kappa::<f64>(sixth(), sixth()).unwrap() - 23.0 / 12.0).abs() < 1e-12);
        assert!((compute_kappa::<f64>(0.1, sixth()).unwrap() - 47.0 / 12.0).abs() < 1e-12);
        let k: f64 = compute_kappa(0.054, 0.022).unwrap();
        assert!((k - (1.0 - 0.108 - 0.054 * 0.022) / 0.108).abs() < 1e-12);
        assert!(k > 8.24 && k < 8.25);
        assert!(compute_kappa::<f64>(0.2, 0.1).is_err());
        assert!(compute_kappa::<f64>(0.1, 0.0).is_err());
        assert!(ClusterParams::<f64>::with_all(0.1, 0.1, 2.0, 0.1).is_err());
    }

    #[test]
    fn kappa_exceeds_three_halves() {
        for i in 1..=20 {
            for j in 1..=20 {
                let (t, r) = (i as f64 / 120.0, j as f64 / 120.0);
                assert!(compute_kappa::<f64>(t, r).unwrap() > 1.5);
            }
        }
    }

    #[test]
    fn single_customer_cluster() {
        let params = ClusterParams::new(sixth(), sixth()).unwrap();
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[2.0, 0.0]], vec![0.9]).unwrap();
        let pc = peak_cluster(&inst, &Tour::new(&inst, vec![1]), &params);
        assert_eq!(pc.peak, 1);
        assert_eq!(pc.members, vec![1]);
        assert!(pc.large);

        let at_depot: Instance = Instance::euclidean([0.0, 0.0], vec![[0.0, 0.0]], vec![0.9]).unwrap();
        let pc = peak_cluster(&at_depot, &Tour::new(&at_depot, vec![1]), &params);
        assert!(pc.members.is_empty());
        assert!(!pc.large);
    }

    /// Two customers on a ray: `v` at distance 3 with demand `1 − τ`, `w` just
    /// outside the cluster of `v` with demand `τ`. The slack is exactly τρ·c(Q)
    /// in the limit.
    #[test]
    fn tight_small_cluster() {
        let (tau, rho) = (0.1, sixth());
        let params = ClusterParams::new(tau, rho).unwrap();
        let w = 2.5 - 1e-9;
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[3.0, 0.0], [w, 0.0]], vec![1.0 - tau, tau]).unwrap();
        let tour = Tour::new(&inst, vec![2, 1]);
        let pc = peak_cluster(&inst, &tour, &params);
        assert_eq!(pc.peak, 1);
        assert_eq!(pc.members, vec![1]);
        assert!(!pc.large);
        let slack = small_cluster_slack(&inst, &tour, &params).unwrap();
        assert!((tour.cost() - 6.0).abs() < 1e-12);
        assert!((slack - tau * rho * tour.cost()).abs() < 1e-8);
        assert!(slack >= tau * rho * tour.cost() - 1e-9);

        // Moving w inside the cluster makes it large.
        let inside: Instance = Instance::euclidean([0.0, 0.0], vec![[3.0, 0.0], [2.6, 0.0]], vec![1.0 - tau, tau]).unwrap();
        let tour = Tour::new(&inside, vec![2, 1]);
        assert!(peak_cluster(&inside, &tour, &params).large);
        assert!(small_cluster_slack(&inside, &tour, &params).is_err());
    }

    #[test]
    fn zero_demand_slack_is_full_cost() {
        let params = ClusterParams::default();
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[5.0, 0.0]], vec![0.0]).unwrap();
        let tour = Tour::new(&inst, vec![1]);
        assert_eq!(small_cluster_slack(&inst, &tour, &params).unwrap(), 10.0);
    }

    #[test]
    fn point_cluster_gives_one_target() {
        let params = ClusterParams::new(sixth(), sixth()).unwrap();
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0]; 5], vec![0.5; 5]).unwrap();
        let v = build_vrtg_instance(&inst, &params);
        assert_eq!(v.targets(), &[5]);
        assert_eq!(v.groups(), &[vec![0]]);
        assert_eq!(v.b(), &[6]);
        assert_eq!(v.b_group()[0], vec![1, 2, 3, 4, 5]);
        assert_eq!(v.target_node(0), 6);
        assert_eq!(v.position(6), 5);
        assert_eq!(v.dist(6, 0), 1.0);
    }

    #[test]
    fn light_scattered_customers_give_no_targets() {
        let params = ClusterParams::default();
        let pts: Vec<[f64; 2]> = (0..8).map(|i| [10.0 * (i as f64 + 1.0), 0.0]).collect();
        let inst: Instance = Instance::euclidean([0.0, 0.0], pts, vec![0.9; 8]).unwrap();
        assert_eq!(build_vrtg_instance(&inst, &params).num_targets(), 0);
    }

    fn check_invariants(inst: &Instance, params: &ClusterParams, v: &VrtgInstance) {
        let rho = params.rho();
        let r3 = 3.0 * rho / (1.0 - rho);
        let mut seen = vec![false; inst.num_vertices()];
        for (k, &t) in v.targets().iter().enumerate() {
            assert!(inst.depot_dist(t) > 0.0);
            assert!(v.b_target()[k].contains(&t));
            for &u in &v.b_target()[k] {
                assert!(inst.dist(u, t) < r3 * inst.depot_dist(u));
            }
            for &u in &v.selection_sets()[k] {
                assert!(!std::mem::replace(&mut seen[u], true), "selection sets overlap");
            }
        }
        for (k1, &t1) in v.targets().iter().enumerate() {
            for (k2, &t2) in v.targets().iter().enumerate() {
                if v.b_target()[k1].iter().any(|u| v.b_target()[k2].contains(u)) {
                    assert_eq!(v.group_of(k1), v.group_of(k2));
                    let m = inst.depot_dist(t1).min(inst.depot_dist(t2));
                    assert!(k1 == k2 || inst.dist(t1, t2) < 6.0 * rho * m);
                }
            }
        }
        for &x in v.b().iter() {
            assert!(x >= 2 && x % 2 == 0);
        }
        let lhs: f64 = (1.0 - params.tau()) * (1.0 - rho) * v.targets().iter().map(|&t| inst.depot_dist(t)).sum::<f64>();
        assert!(v.num_targets() == 0 || lhs < inst.radial_lower_bound() / 2.0);
    }

    #[test]
    fn random_instances_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..40 {
            let params = ClusterParams::new(rng.gen_range(0.02..=sixth()), rng.gen_range(0.02..=sixth())).unwrap();
            let g = generate_instance::<f64>(30, DemandModel::Clustered { m: 4, spread: 0.02 }, seed).unwrap();
            let v = build_vrtg_instance(&g.instance, &params);
            check_invariants(&g.instance, &params, &v);
            let g = generate_instance::<f64>(25, DemandModel::Uniform, seed).unwrap();
            let v = build_vrtg_instance(&g.instance, &params);
            check_invariants(&g.instance, &params, &v);
        }
    }

    #[test]
    fn planted_clusters_fall_in_one_b_set() {
        let params = ClusterParams::new(sixth(), sixth()).unwrap();
        let mut checked = 0;
        for seed in 0..30 {
            let g = generate_instance::<f64>(24, DemandModel::Clustered { m: 3, spread: 1e-3 }, seed).unwrap();
            let v = build_vrtg_instance(&g.instance, &params);
            for cluster in &g.clusters {
                let tour = Tour::new(&g.instance, cluster.clone());
                let pc = peak_cluster(&g.instance, &tour, &params);
                if pc.large {
                    checked += 1;
                    assert!(v.b_target().iter().any(|b| pc.members.iter().all(|u| b.contains(u))));
                    if pc.members.len() == cluster.len() {
                        assert!(v.b_group().iter().any(|b| cluster.iter().all(|u| b.contains(u))));
                    }
                }
            }
        }
        assert!(checked >= 60);
    }

    #[test]
    fn explicit_instance_validation() {
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0], [2.0, 0.0]], vec![0.5; 2]).unwrap();
        assert!(VrtgInstance::new(inst.clone(), vec![1], vec![vec![0]], vec![2]).is_ok());
        assert!(VrtgInstance::new(inst.clone(), vec![1], vec![vec![0]], vec![3]).is_err());
        assert!(VrtgInstance::new(inst.clone(), vec![1, 2], vec![vec![0]], vec![2]).is_err());
        assert!(VrtgInstance::new(inst.clone(), vec![0], vec![vec![0]], vec![2]).is_err());
        assert!(VrtgInstance::new(inst, vec![1], vec![vec![0, 0]], vec![2]).is_err());
    }

    #[test]
    fn json_dump_has_fields() {
        let params = ClusterParams::new(sixth(), sixth()).unwrap();
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0]; 5], vec![0.5; 5]).unwrap();
        let j = build_vrtg_instance(&inst, &params).to_json();
        assert_eq!(j["b"], serde_json::json!([6]));
        assert_eq!(j["targets"], serde_json::json!([5]));
    }
}
