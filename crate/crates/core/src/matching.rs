//! Perfect matchings on the targets where an odd number of paths end.

use crate::clustering::VrtgInstance;
use crate::error::{Error, Result};
use crate::instance::Vertex;
use crate::scalar::{sum, Scalar};
use crate::tsp::prim;

/// Disjoint pairs with their total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching<T: Scalar = f64> {
    pub pairs: Vec<(Vertex, Vertex)>,
    pub cost: T,
}

impl<T: Scalar> Matching<T> {
    pub fn empty() -> Self {
        Matching { pairs: Vec::new(), cost: T::zero() }
    }

    fn from_pairs(pairs: Vec<(Vertex, Vertex)>, dist: impl Fn(Vertex, Vertex) -> T) -> Self {
        let cost = sum(pairs.iter().map(|&(a, b)| dist(a, b)));
        Matching { pairs, cost }
    }
}

/// Perfect matching on `u` of cost at most the cost of `tree`, a tree whose
/// vertices include `u`.
///
/// Leaves are peeled off one by one. A leaf outside `u` is dropped; a leaf in
/// `u` whose neighbour is in `u` is matched to it; otherwise the neighbour
/// joins `u` as a stand-in for the leaf, which shortcuts its later partner
/// edge by the triangle inequality.
pub fn tree_matching<T: Scalar>(
    u: &[Vertex],
    tree: &[(Vertex, Vertex)],
    dist: impl Fn(Vertex, Vertex) -> T,
) -> Result<Matching<T>> {
    if u.len() % 2 == 1 {
        return Err(Error::Precondition(format!("cannot perfectly match {} vertices", u.len())));
    }
    if u.is_empty() {
        return Ok(Matching::empty());
    }
    let size = tree.iter().flat_map(|&(a, b)| [a, b]).chain(u.iter().copied()).max().map_or(0, |m| m + 1);
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); size];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    // stand_in[x] = Some(original) while x is in the current set U.
    let mut stand_in: Vec<Option<Vertex>> = vec![None; size];
    for &x in u {
        if stand_in[x].is_some() {
            return Err(Error::Precondition(format!("vertex {x} listed twice")));
        }
        stand_in[x] = Some(x);
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; size];
    let mut leaves: Vec<Vertex> = (0..size).filter(|&x| degree[x] == 1).collect();
    let mut pairs = Vec::with_capacity(u.len() / 2);
    while let Some(v) = leaves.pop() {
        if removed[v] || degree[v] != 1 {
            continue;
        }
        removed[v] = true;
        let w = *adj[v].iter().find(|&&w| !removed[w]).expect("leaf has one live neighbour");
        match (stand_in[v].take(), stand_in[w]) {
            (None, _) => {}
            (Some(a), Some(b)) => {
                pairs.push((a, b));
                stand_in[w] = None;
            }
            (Some(a), None) => stand_in[w] = Some(a),
        }
        degree[w] -= 1;
        if degree[w] == 1 {
            leaves.push(w);
        }
    }
    if let Some(x) = (0..size).find(|&x| stand_in[x].is_some()) {
        return Err(Error::Precondition(format!("vertex {x} is left unmatched; the tree does not span the set")));
    }
    Ok(Matching::from_pairs(pairs, dist))
}

/// Minimum-cost perfect matching by dynamic programming over subsets,
/// `O(2^k·k)`. Panics for more than 24 vertices.
pub fn exact_matching<T: Scalar>(u: &[Vertex], dist: impl Fn(Vertex, Vertex) -> T) -> Result<Matching<T>> {
    let k = u.len();
    if k % 2 == 1 {
        return Err(Error::Precondition(format!("cannot perfectly match {k} vertices")));
    }
    assert!(k <= 24, "subset matching limited to 24 vertices");
    let full = (1usize << k) - 1;
    let mut best = vec![T::infinity(); full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = T::zero();
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        // The lowest vertex of the set is matched with some other member.
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let c = best[rest & !(1 << j)] + dist(u[i], u[j]);
            if c < best[mask] {
                best[mask] = c;
                choice[mask] = j;
            }
        }
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let j = choice[mask];
        pairs.push((u[i], u[j]));
        mask &= !(1 << i) & !(1 << j);
    }
    Ok(Matching::from_pairs(pairs, dist))
}

/// Largest number of odd targets per group matched exactly.
pub const EXACT_GROUP_LIMIT: usize = 16;

/// Matches the odd targets (target indices) within each group.
///
/// Each group gets a tree matching along a spanning tree of its
/// B-intersection graph, replaced by the exact minimum matching when the
/// group has at most [`EXACT_GROUP_LIMIT`] odd targets and that is cheaper.
/// Groups without recorded B-sets use the complete graph. Pairs are target
/// node ids.
pub fn group_matching<T: Scalar>(inst: &VrtgInstance<T>, odd_targets: &[usize]) -> Result<Matching<T>> {
    let dist = |a: Vertex, b: Vertex| inst.dist(a, b);
    let mut per_group: Vec<Vec<Vertex>> = vec![Vec::new(); inst.num_groups()];
    for &k in odd_targets {
        if k >= inst.num_targets() {
            return Err(Error::InvalidParameter(format!("no target with index {k}")));
        }
        per_group[inst.group_of(k)].push(inst.target_node(k));
    }
    let mut out = Matching::empty();
    for (g, odd) in per_group.iter().enumerate() {
        if odd.len() % 2 == 1 {
            return Err(Error::Precondition(format!("group {g} has an odd number ({}) of odd targets", odd.len())));
        }
        if odd.is_empty() {
            continue;
        }
        let members = &inst.groups()[g];
        let bsets = inst.b_target();
        let complete = members.iter().all(|&k| bsets[k].is_empty());
        let adjacent = |a: usize, b: usize| complete || bsets[a].iter().any(|v| bsets[b].binary_search(v).is_ok());
        let tree: Vec<(Vertex, Vertex)> = prim(members.len(), |i, j| {
            adjacent(members[i], members[j]).then(|| dist(inst.target_node(members[i]), inst.target_node(members[j])))
        })
        .into_iter()
        .map(|(i, j)| (inst.target_node(members[i]), inst.target_node(members[j])))
        .collect();
        let mut best = tree_matching(odd, &tree, dist)?;
        if odd.len() <= EXACT_GROUP_LIMIT {
            let exact = exact_matching(odd, dist)?;
            if exact.cost < best.cost {
                best = exact;
            }
        }
        out.cost += best.cost;
        out.pairs.extend(best.pairs);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{build_vrtg_instance, ClusterParams};
    use crate::instance::Instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_leaves() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let m = tree_matching(&[0, 3], &[(0, 1), (1, 2), (2, 3)], |a, b| f64::abs(xs[a] - xs[b])).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert!(m.cost <= 3.0);
        let e = tree_matching::<f64>(&[], &[(0, 1)], |_, _| 1.0).unwrap();
        assert_eq!(e.cost, 0.0);
        assert!(tree_matching::<f64>(&[0], &[(0, 1)], |_, _| 1.0).is_err());
        assert!(tree_matching::<f64>(&[0, 1], &[], |_, _| 1.0).is_err());
    }

    /// Independent minimum matching by recursion on the first vertex.
    fn brute_force(u: &[Vertex], d: &dyn Fn(Vertex, Vertex) -> f64) -> f64 {
        if u.is_empty() {
            return 0.0;
        }
        (1..u.len())
            .map(|j| {
                let rest: Vec<Vertex> = u[1..].iter().enumerate().filter(|&(i, _)| i + 1 != j).map(|(_, &x)| x).collect();
                d(u[0], u[j]) + brute_force(&rest, d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let n = rng.gen_range(1..=10);
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
            let d = |a: usize, b: usize| ((pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2)).sqrt();
            let tree: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
            let tree_cost: f64 = tree.iter().map(|&(a, b)| d(a, b)).sum();
            let mut u: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
            if u.len() % 2 == 1 {
                u.pop();
            }
            let m = tree_matching(&u, &tree, d).unwrap();
            let mut covered: Vec<usize> = m.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            covered.sort_unstable();
            assert_eq!(covered, u);
            assert!(m.cost <= tree_cost + 1e-12);
            let opt = brute_force(&u, &d);
            assert!(m.cost >= opt - 1e-12);
            let exact = exact_matching(&u, d).unwrap();
            assert!((exact.cost - opt).abs() < 1e-12);
        }
    }

    #[test]
    fn group_matching_pairs_close_targets() {
        let params = ClusterParams::new(1.0 / 6.0, 1.0 / 6.0).unwrap();
        // Two heavy point clusters close together: their B-sets intersect.
        let mut pts = vec![[10.0, 0.0]; 2];
        pts.extend(vec![[10.0, 1.0]; 2]);
        let base: Instance = Instance::euclidean([0.0, 0.0], pts, vec![0.9; 4]).unwrap();
        let inst = build_vrtg_instance(&base, &params);
        assert_eq!(inst.num_targets(), 2);
        assert_eq!(inst.num_groups(), 1);
        let m = group_matching(&inst, &[0, 1]).unwrap();
        assert_eq!(m.pairs.len(), 1);
        let (a, b) = m.pairs[0];
        let rho = params.rho();
        let bound = 6.0 * rho * inst.dist(0, a).min(inst.dist(0, b));
        assert!(m.cost < bound);
        assert!(group_matching(&inst, &[0]).is_err());
        assert_eq!(group_matching(&inst, &[]).unwrap(), Matching::empty());
    }

    #[test]
    fn group_matching_bound_on_random_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = ClusterParams::new(1.0 / 6.0, 1.0 / 6.0).unwrap();
        for seed in 0..30 {
            let g = crate::generate::generate_instance::<f64>(30, crate::generate::DemandModel::Clustered { m: 6, spread: 0.05 }, seed).unwrap();
            let inst = build_vrtg_instance(&g.instance, &params);
            let mut odd = Vec::new();
            for members in inst.groups() {
                let mut chosen: Vec<usize> = members.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                if chosen.len() % 2 == 1 {
                    chosen.pop();
                }
                odd.extend(chosen);
            }
            let m = group_matching(&inst, &odd).unwrap();
            let bound: f64 = 6.0 * params.rho() * (0..inst.num_targets()).map(|k| inst.dist(0, inst.target_node(k))).sum::<f64>();
            assert!(m.cost <= bound + 1e-12);
            assert_eq!(m.pairs.len() * 2, odd.len());
        }
    }
}
