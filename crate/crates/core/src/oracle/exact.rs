use crate::clustering::VrtgInstance;
use crate::error::{Error, Result};
use crate::instance::{DepotOrder, Instance, Vertex, DEPOT};
use crate::scalar::Scalar;
use crate::solution::{Solution, Tour};
use crate::tsp::PathTable;
use crate::vrtg::{VrtgPath, VrtgSolution};

/// Default customer limit of [`exact_cvrp`].
pub const CVRP_LIMIT: usize = 8;
/// Hard cap on the customers of [`exact_cvrp`].
pub const CVRP_MAX: usize = 14;
/// Default customer limit of [`exact_vrtg`] and [`exact_forward_walk_cost`].
pub const VRTG_LIMIT: usize = 6;
/// Largest `Σ b(𝒯)` accepted by [`exact_vrtg`].
pub const VRTG_PATH_LIMIT: usize = 6;

/// Optimal unsplit solution: every capacity-feasible customer set is served
/// by an optimal cycle and the sets are combined by a subset dynamic program.
pub fn exact_cvrp<T: Scalar>(inst: &Instance<T>, limit: usize) -> Result<Solution<T>> {
    let n = inst.n();
    if n > limit.min(CVRP_MAX) {
        return Err(Error::TooLarge { size: n, limit: limit.min(CVRP_MAX) });
    }
    if let Some(v) = inst.customers().find(|&v| !inst.demand(v).le_tol(T::one())) {
        return Err(Error::Validation(format!("customer {v} exceeds the capacity")));
    }
    if n == 0 {
        return Ok(Solution::empty());
    }
    let table = PathTable::new(n, |i| inst.depot_dist(i + 1), |i, j| inst.dist(i + 1, j + 1));
    let full = (1usize << n) - 1;
    let mut load = vec![T::zero(); full + 1];
    let mut cycle = vec![(T::infinity(), None); full + 1];
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        load[mask] = load[mask & (mask - 1)] + inst.demand(i + 1);
        if load[mask].le_tol(T::one()) {
            cycle[mask] = table.best_closing(mask, |i| inst.depot_dist(i + 1));
        }
    }
    let mut best = vec![T::infinity(); full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = T::zero();
    for mask in 1..=full {
        // The tour of the lowest customer in `mask` is `sub`.
        let low = mask & mask.wrapping_neg();
        let rest = mask & !low;
        let mut sub = rest;
        loop {
            let group = sub | low;
            let c = cycle[group].0 + best[mask & !group];
            if c < best[mask] {
                best[mask] = c;
                choice[mask] = group;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut tours = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let group = choice[mask];
        let last = cycle[group].1.expect("feasible group");
        let stops = table.path(group, last).into_iter().map(|i| i + 1).collect();
        tours.push(Tour::new(inst, stops));
        mask &= !group;
    }
    Ok(Solution::new(tours))
}

/// Optimal target-group solution by distributing customers over the
/// `Σ b(𝒯)` paths; each path's order and end target are optimized exactly.
/// Paths back to the depot are never needed once a group exists, because
/// such a cycle can be shortcut into any path.
pub fn exact_vrtg<T: Scalar>(inst: &VrtgInstance<T>, limit: usize) -> Result<VrtgSolution<T>> {
    let base = inst.base();
    let n = base.n();
    if n > limit.min(CVRP_MAX) {
        return Err(Error::TooLarge { size: n, limit: limit.min(CVRP_MAX) });
    }
    if inst.total_b() > VRTG_PATH_LIMIT {
        return Err(Error::TooLarge { size: inst.total_b(), limit: VRTG_PATH_LIMIT });
    }
    let table = PathTable::new(n, |i| base.depot_dist(i + 1), |i, j| base.dist(i + 1, j + 1));
    let full = (1usize << n) - 1;
    if inst.num_groups() == 0 {
        if n == 0 {
            return Ok(VrtgSolution::new(inst, Vec::new()));
        }
        let (_, last) = table.best_closing(full, |i| base.depot_dist(i + 1));
        let interior = table.path(full, last.expect("nonempty")).into_iter().map(|i| i + 1).collect();
        return Ok(VrtgSolution::new(inst, vec![VrtgPath::new(interior, DEPOT)]));
    }

    // Cheapest path covering `mask` and ending in group g: (cost, target node, last item).
    let mut end_cost: Vec<Vec<(T, Vertex, Option<usize>)>> = Vec::with_capacity(inst.num_groups());
    for members in inst.groups() {
        let mut row = vec![(T::infinity(), 0, None); full + 1];
        for (mask, slot) in row.iter_mut().enumerate() {
            for &k in members {
                let t = inst.target_node(k);
                let (c, last) = if mask == 0 {
                    (inst.dist(DEPOT, t), None)
                } else {
                    table.best_closing(mask, |i| inst.dist(i + 1, t))
                };
                if c < slot.0 {
                    *slot = (c, t, last);
                }
            }
        }
        end_cost.push(row);
    }

    let slots: Vec<usize> = inst.b().iter().enumerate().flat_map(|(g, &b)| std::iter::repeat_n(g, b)).collect();
    // best[j][mask]: cheapest way for the first j slots to cover exactly `mask`.
    let mut best = vec![vec![T::infinity(); full + 1]; slots.len() + 1];
    let mut choice = vec![vec![0usize; full + 1]; slots.len() + 1];
    best[0][0] = T::zero();
    for (j, &g) in slots.iter().enumerate() {
        for mask in 0..=full {
            let mut sub = mask;
            loop {
                let c = best[j][mask & !sub] + end_cost[g][sub].0;
                if c < best[j + 1][mask] {
                    best[j + 1][mask] = c;
                    choice[j + 1][mask] = sub;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
    }
    let mut paths = Vec::with_capacity(slots.len());
    let mut mask = full;
    for j in (1..=slots.len()).rev() {
        let sub = choice[j][mask];
        let (_, t, last) = end_cost[slots[j - 1]][sub];
        let interior = last.map_or_else(Vec::new, |l| table.path(sub, l).into_iter().map(|i| i + 1).collect());
        paths.push(VrtgPath::new(interior, t));
        mask &= !sub;
    }
    paths.reverse();
    Ok(VrtgSolution::new(inst, paths))
}

/// Cost of a cheapest forward walk solution, by an independent method.
///
/// Every forward walk solution contains one forward arc into each customer;
/// these arcs form a tree rooted at the depot in which each customer's parent
/// precedes it. For each such tree, the remaining arcs only have to repair the
/// degree balance: leaves must send one unit onwards, a customer with `k ≥ 2`
/// children must receive `k − 1` more, group `𝒯` must receive `b(𝒯)`, and the
/// depot can send or absorb anything. With metric costs this is a
/// transportation problem on direct arcs, solved here by a subset dynamic
/// program over the leaves.
pub fn exact_forward_walk_cost<T: Scalar>(inst: &VrtgInstance<T>, order: &DepotOrder, limit: usize) -> Result<T> {
    let base = inst.base();
    let n = base.n();
    if n > limit.min(8) {
        return Err(Error::TooLarge { size: n, limit: limit.min(8) });
    }
    if inst.num_targets() == 0 {
        return if n == 0 { Ok(T::zero()) } else { Err(Error::DegenerateVrtg) };
    }
    let customers = order.customers().to_vec();
    let group_dist = |u: Vertex, g: usize| {
        inst.groups()[g].iter().map(|&k| inst.dist(u, inst.target_node(k))).fold(T::infinity(), T::min)
    };
    let mut parent = vec![0usize; n];
    let mut best = T::infinity();
    loop {
        // parent[i] = 0 is the depot, p > 0 is customers[p - 1] (which precedes customers[i]).
        let tree_cost = crate::scalar::sum((0..n).map(|i| {
            let p = if parent[i] == 0 { DEPOT } else { customers[parent[i] - 1] };
            base.dist(p, customers[i])
        }));
        let mut children = vec![0usize; n];
        for i in 0..n {
            if parent[i] > 0 {
                children[parent[i] - 1] += 1;
            }
        }
        let leaves: Vec<Vertex> = (0..n).filter(|&i| children[i] == 0).map(|i| customers[i]).collect();
        // Sinks: (cost from a vertex, units).
        let mut sinks: Vec<Sink<'_, T>> = Vec::new();
        for i in 0..n {
            if children[i] >= 2 {
                let w = customers[i];
                sinks.push((Box::new(move |u| base.dist(u, w)), children[i] - 1));
            }
        }
        for (g, &b) in inst.b().iter().enumerate() {
            sinks.push((Box::new(move |u| group_dist(u, g)), b));
        }
        let completion = transport(&leaves, &sinks, |u| base.depot_dist(u));
        best = best.min(tree_cost + completion);

        // Next parent assignment: customer i chooses among the depot and its i predecessors.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(best);
            }
            parent[i] += 1;
            if parent[i] <= i {
                break;
            }
            parent[i] = 0;
            i += 1;
        }
    }
}

/// Cost of reaching a sink from a vertex, and the units the sink takes.
type Sink<'a, T> = (Box<dyn Fn(Vertex) -> T + 'a>, usize);

/// Minimum cost to send one unit from each leaf to a sink unit or to the
/// depot, with every unfilled sink unit supplied from the depot.
fn transport<T: Scalar>(leaves: &[Vertex], sinks: &[Sink<'_, T>], to_depot: impl Fn(Vertex) -> T) -> T {
    let k = leaves.len();
    let full = (1usize << k) - 1;
    // f[mask]: leaves in mask already used.
    let mut f = vec![T::infinity(); full + 1];
    f[0] = T::zero();
    for (cost, units) in sinks {
        let from_depot = cost(DEPOT);
        let mut g = vec![T::infinity(); full + 1];
        for used in 0..=full {
            if !f[used].is_finite() {
                continue;
            }
            let free = full & !used;
            let mut sub = free;
            loop {
                let taken = sub.count_ones() as usize;
                if taken <= *units {
                    let mut c = f[used] + from_depot * T::from_usize_lossy(units - taken);
                    let mut bits = sub;
                    while bits != 0 {
                        c += cost(leaves[bits.trailing_zeros() as usize]);
                        bits &= bits - 1;
                    }
                    let next = used | sub;
                    if c < g[next] {
                        g[next] = c;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
        f = g;
    }
    (0..=full)
        .filter(|&used| f[used].is_finite())
        .map(|used| {
            let mut c = f[used];
            for (i, &leaf) in leaves.iter().enumerate() {
                if used >> i & 1 == 0 {
                    c += to_depot(leaf);
                }
            }
            c
        })
        .fold(T::infinity(), T::min)
}
