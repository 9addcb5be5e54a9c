use std::collections::BTreeMap;

use serde::Serialize;

use crate::clustering::{peak_cluster, ClusterParams, VrtgInstance};
use crate::error::{Error, Result};
use crate::instance::{Vertex, DEPOT};
use crate::scalar::{sum, Scalar};
use crate::solution::Solution;

/// Construction step that produced a walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WalkKind {
    /// Half of a tour from the depot to a customer, plus one final arc.
    Split,
    /// A whole tour, closed at the depot.
    Cycle,
}

/// A walk with its weight. `nodes` starts at the depot; for split walks the
/// last arc is the final arc into the depot or a target.
#[derive(Clone, Debug, Serialize)]
pub struct FractionalWalk<T: Scalar = f64> {
    pub weight: T,
    pub nodes: Vec<Vertex>,
    pub kind: WalkKind,
}

impl<T: Scalar> FractionalWalk<T> {
    pub fn end(&self) -> Vertex {
        *self.nodes.last().expect("walks are nonempty")
    }

    fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    fn final_arc(&self) -> Option<(Vertex, Vertex)> {
        match self.kind {
            WalkKind::Split => self.arcs().last(),
            WalkKind::Cycle => None,
        }
    }
}

/// A customer served in pieces: the amounts of the tour delivery and the
/// final node each piece was sent to.
#[derive(Clone, Debug, Serialize)]
pub struct Split<T: Scalar = f64> {
    pub customer: Vertex,
    pub tour: usize,
    pub parts: Vec<(T, Vertex)>,
}

/// Weighted walks built from a solution; a fractional walk cover of the
/// target-group instance.
#[derive(Clone, Debug, Serialize)]
pub struct WeakFractional<T: Scalar = f64> {
    walks: Vec<FractionalWalk<T>>,
    splits: Vec<Split<T>>,
}

impl<T: Scalar> WeakFractional<T> {
    pub fn walks(&self) -> &[FractionalWalk<T>] {
        &self.walks
    }

    /// Customers whose delivery was cut into several pieces.
    pub fn splits(&self) -> &[Split<T>] {
        &self.splits
    }

    /// Aggregated arc weights.
    pub fn arc_weights(&self) -> BTreeMap<(Vertex, Vertex), T> {
        let mut x = BTreeMap::new();
        for walk in &self.walks {
            for arc in walk.arcs() {
                *x.entry(arc).or_insert_with(T::zero) += walk.weight;
            }
        }
        x
    }

    fn weighted_sum(&self, keep: impl Fn(&FractionalWalk<T>, (Vertex, Vertex)) -> bool, f: impl Fn(Vertex, Vertex) -> T) -> T {
        sum(self.walks.iter().flat_map(|w| {
            let keep = &keep;
            let f = &f;
            w.arcs().filter(move |&a| keep(w, a)).map(move |(u, v)| w.weight * f(u, v))
        }))
    }

    /// `c(x)`.
    pub fn cost(&self, inst: &VrtgInstance<T>) -> T {
        self.weighted_sum(|_, _| true, |u, v| inst.dist(u, v))
    }

    /// `c(x|E₁)`: arcs entering customers.
    pub fn cost_e1(&self, inst: &VrtgInstance<T>) -> T {
        self.weighted_sum(|_, (_, v)| inst.base().is_customer(v), |u, v| inst.dist(u, v))
    }

    /// `detour(x|E₁)`.
    pub fn detour_e1(&self, inst: &VrtgInstance<T>) -> T {
        self.weighted_sum(|_, (_, v)| inst.base().is_customer(v), |u, v| inst.base().detour(u, v))
    }

    /// Cost of the final arcs of the split walks.
    pub fn final_cost(&self, inst: &VrtgInstance<T>) -> T {
        self.weighted_sum(|w, a| w.final_arc() == Some(a), |u, v| inst.dist(u, v))
    }

    /// `c(x)` without the final arcs.
    pub fn cost_without_final(&self, inst: &VrtgInstance<T>) -> T {
        self.weighted_sum(|w, a| w.final_arc() != Some(a), |u, v| inst.dist(u, v))
    }

    /// Total weight of walks through each customer, indexed by vertex.
    pub fn coverage(&self, inst: &VrtgInstance<T>) -> Vec<T> {
        let mut cover = vec![T::zero(); inst.base().num_vertices()];
        for walk in &self.walks {
            let mut seen: Vec<Vertex> = walk.nodes.iter().copied().filter(|&v| inst.base().is_customer(v)).collect();
            seen.sort_unstable();
            seen.dedup();
            for v in seen {
                cover[v] += walk.weight;
            }
        }
        cover
    }

    /// Total weight of walks ending in each group.
    pub fn group_weights(&self, inst: &VrtgInstance<T>) -> Vec<T> {
        let mut weight = vec![T::zero(); inst.num_groups()];
        for walk in &self.walks {
            if let Some(k) = inst.target_index(walk.end()) {
                weight[inst.group_of(k)] += walk.weight;
            }
        }
        weight
    }

    /// Violations of the walk shape, coverage and group weight constraints.
    pub fn violations(&self, inst: &VrtgInstance<T>, tau: T, tol: T) -> Vec<String> {
        let base = inst.base();
        let mut out = Vec::new();
        for (i, walk) in self.walks.iter().enumerate() {
            if walk.nodes.first() != Some(&DEPOT) || walk.nodes.len() < 2 {
                out.push(format!("walk {i} does not start at the depot"));
            }
            let end = walk.end();
            if end != DEPOT && !inst.is_target(end) {
                out.push(format!("walk {i} ends at customer {end}"));
            }
            if let Some(&v) = walk.nodes[1..walk.nodes.len() - 1].iter().find(|&&v| !base.is_customer(v)) {
                out.push(format!("walk {i} passes through non-customer {v}"));
            }
            if walk.weight < -tol {
                out.push(format!("walk {i} has negative weight {}", walk.weight));
            }
        }
        for (v, &c) in self.coverage(inst).iter().enumerate().skip(1) {
            if c < T::one() - tol {
                out.push(format!("customer {v} covered {c} < 1"));
            }
        }
        for (g, &w) in self.group_weights(inst).iter().enumerate() {
            let want = (T::one() - tau) * T::from_usize_lossy(inst.b()[g]);
            if (w - want).abs() > tol * want.max(T::one()) {
                out.push(format!("group {g} receives {w}, expected {want}"));
            }
        }
        out
    }
}

/// One delivery of a tour, possibly cut in several parts.
struct Piece<T> {
    tour: usize,
    stop: usize,
    vertex: Vertex,
    free: T,
    parts: Vec<(T, Vertex)>,
}

/// Takes up to `need` from the free pieces selected by `idx`, in order, and
/// sends the taken amount to the first target of group `g` whose B-set holds
/// the piece's customer.
fn take<T: Scalar>(pieces: &mut [Piece<T>], idx: &[usize], mut need: T, inst: &VrtgInstance<T>, g: usize) -> T {
    for &p in idx {
        if need <= T::zero() {
            break;
        }
        let piece = &mut pieces[p];
        let amount = piece.free.min(need);
        if amount <= T::zero() {
            continue;
        }
        let v = piece.vertex;
        let &k = inst.groups()[g]
            .iter()
            .find(|&&k| inst.b_target()[k].contains(&v))
            .expect("B_𝒯 is the union of the group's B-sets");
        piece.parts.push((amount, inst.target_node(k)));
        piece.free -= amount;
        need -= amount;
    }
    need
}

/// Builds the weighted walk cover from a feasible solution of the instance
/// underlying `vrtg`.
///
/// Clustered demand is sent to targets so that each group receives exactly
/// `(1 − τ)·b(𝒯)`, taking `1 − τ` from every tour whose peak cluster holds that
/// much inside `B_𝒯` first. Every delivery contributes both halves of its tour
/// with its weight, and each tour is added once more with weight `1 − load`.
pub fn build_weak_fractional<T: Scalar>(sol: &Solution<T>, vrtg: &VrtgInstance<T>, params: &ClusterParams<T>) -> Result<WeakFractional<T>> {
    let inst = vrtg.base();
    let tol = T::rel_tol(T::one()) * T::of(1e3);
    let one_minus_tau = T::one() - params.tau();

    let mut pieces = Vec::new();
    for (q, tour) in sol.tours().iter().enumerate() {
        if !tour.load().le_tol(T::one()) {
            return Err(Error::Construction(format!("tour {q} has load {} > 1", tour.load())));
        }
        for (i, (&v, &d)) in tour.stops().iter().zip(tour.deliveries()).enumerate() {
            pieces.push(Piece { tour: q, stop: i, vertex: v, free: d, parts: Vec::new() });
        }
    }

    let mut in_group = vec![usize::MAX; inst.num_vertices()];
    for (g, members) in vrtg.b_group().iter().enumerate() {
        for &v in members {
            in_group[v] = g;
        }
    }

    let mut remaining: Vec<T> = vrtg.b().iter().map(|&b| one_minus_tau * T::from_usize_lossy(b) / T::of(2.0)).collect();
    for (q, tour) in sol.tours().iter().enumerate() {
        let cluster = peak_cluster(inst, tour, params);
        for g in 0..vrtg.num_groups() {
            let idx: Vec<usize> = (0..pieces.len())
                .filter(|&p| pieces[p].tour == q && in_group[pieces[p].vertex] == g && cluster.members.contains(&pieces[p].vertex))
                .collect();
            let available = sum(idx.iter().map(|&p| pieces[p].free));
            if available >= one_minus_tau - tol {
                let want = one_minus_tau.min(remaining[g]);
                let short = take(&mut pieces, &idx, want, vrtg, g);
                remaining[g] -= want - short;
            }
        }
    }
    for (g, rest) in remaining.iter_mut().enumerate() {
        let mut idx: Vec<usize> = (0..pieces.len()).filter(|&p| in_group[pieces[p].vertex] == g).collect();
        idx.sort_by_key(|&p| (pieces[p].vertex, pieces[p].tour, pieces[p].stop));
        *rest = take(&mut pieces, &idx, *rest, vrtg, g);
        if *rest > tol {
            return Err(Error::Construction(format!("group {g} lacks clustered demand {} for (1 − τ)·b", *rest)));
        }
    }

    let mut walks = Vec::new();
    let mut splits = Vec::new();
    for piece in &mut pieces {
        if piece.free > T::zero() {
            piece.parts.push((piece.free, DEPOT));
        }
        let stops = sol.tours()[piece.tour].stops();
        let i = piece.stop;
        let forward: Vec<Vertex> = std::iter::once(DEPOT).chain(stops[..=i].iter().copied()).collect();
        let backward: Vec<Vertex> = std::iter::once(DEPOT).chain(stops[i..].iter().rev().copied()).collect();
        for &(amount, end) in &piece.parts {
            for half in [&forward, &backward] {
                let mut nodes = half.clone();
                nodes.push(end);
                walks.push(FractionalWalk { weight: amount, nodes, kind: WalkKind::Split });
            }
        }
        if piece.parts.len() > 1 {
            splits.push(Split { customer: piece.vertex, tour: piece.tour, parts: piece.parts.clone() });
        }
    }
    for tour in sol.tours() {
        let weight = T::one() - tour.load();
        if weight > T::zero() {
            let mut nodes = vec![DEPOT];
            nodes.extend_from_slice(tour.stops());
            nodes.push(DEPOT);
            walks.push(FractionalWalk { weight, nodes, kind: WalkKind::Cycle });
        }
    }
    Ok(WeakFractional { walks, splits })
}

/// `ζ(τ, ρ, ε)`: relative excess allowed for the total cost of the cover.
pub fn zeta<T: Scalar>(tau: T, rho: T, epsilon: T) -> T {
    let a = (T::of(3.0) * rho + tau - T::of(4.0) * tau * rho) / (T::one() - rho);
    a + epsilon / (tau * rho) * (T::one() - tau * rho - a)
}

/// Measured quantities of a cover and the bounds they are held to.
#[derive(Clone, Debug, Serialize)]
pub struct FractionalReport<T: Scalar = f64> {
    pub violations: Vec<String>,
    pub opt: T,
    pub radial: T,
    pub epsilon: T,
    pub zeta: T,
    pub cost: T,
    pub cost_e1: T,
    pub cost_without_final: T,
    pub detour_e1: T,
    /// `detour(x|E₁) ≤ ε·OPT`.
    pub detour_bound: bool,
    /// `c(x|E₁) ≤ OPT`.
    pub e1_bound: bool,
    /// `c(x) < (1 + ζ)·OPT`.
    pub cost_bound: bool,
    /// Cost without the final arcs equals OPT.
    pub identity: bool,
}

impl<T: Scalar> FractionalReport<T> {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty() && self.detour_bound && self.e1_bound && self.cost_bound && self.identity
    }
}

/// Evaluates a cover against `opt`, the cost of the solution it was built from.
/// `ε` is taken as `1 − radial/OPT`, the smallest value for which the instance
/// counts as difficult.
pub fn check_weak_fractional<T: Scalar>(x: &WeakFractional<T>, vrtg: &VrtgInstance<T>, params: &ClusterParams<T>, opt: T, tol: T) -> FractionalReport<T> {
    let radial = vrtg.base().radial_lower_bound();
    let epsilon = if opt > T::zero() { T::one() - radial / opt } else { T::zero() };
    let zeta = zeta(params.tau(), params.rho(), epsilon);
    let slack = tol * opt.max(T::one());
    let cost = x.cost(vrtg);
    let cost_e1 = x.cost_e1(vrtg);
    let cost_without_final = x.cost_without_final(vrtg);
    let detour_e1 = x.detour_e1(vrtg);
    FractionalReport {
        violations: x.violations(vrtg, params.tau(), tol),
        opt,
        radial,
        epsilon,
        zeta,
        cost,
        cost_e1,
        cost_without_final,
        detour_e1,
        detour_bound: detour_e1 <= epsilon * opt + slack,
        e1_bound: cost_e1 <= opt + slack,
        cost_bound: cost < (T::one() + zeta) * opt + slack,
        identity: (cost_without_final - opt).abs() <= slack,
    }
}
