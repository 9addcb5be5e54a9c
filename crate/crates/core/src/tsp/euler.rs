use crate::error::{Error, Result};
use crate::instance::{Instance, Vertex, DEPOT};
use crate::scalar::Scalar;

use super::TspTour;

/// Eulerian circuit of an undirected multigraph starting at the depot,
/// shortcut to the first occurrence of every vertex.
///
/// The multigraph must have even degrees, be connected, and touch every
/// vertex of the instance (the depot alone needs no edges). Self-loops are
/// ignored.
pub fn euler_shortcut<T: Scalar>(inst: &Instance<T>, edges: &[(Vertex, Vertex)]) -> Result<TspTour<T>> {
    let nv = inst.num_vertices();
    let mut adj: Vec<Vec<(Vertex, usize)>> = vec![Vec::new(); nv];
    for (id, &(u, v)) in edges.iter().enumerate() {
        if u >= nv || v >= nv {
            return Err(Error::InvalidMultigraph(format!("edge ({u}, {v}) outside the instance")));
        }
        if u != v {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
    }
    if let Some(v) = (0..nv).find(|&v| adj[v].len() % 2 == 1) {
        return Err(Error::InvalidMultigraph(format!("vertex {v} has odd degree {}", adj[v].len())));
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let walk = circuit(&adj, edges.len());
    let mut seen = vec![false; nv];
    let mut order = Vec::with_capacity(nv);
    for v in walk {
        if !seen[v] {
            seen[v] = true;
            order.push(v);
        }
    }
    if let Some(v) = (0..nv).find(|&v| !seen[v]) {
        let why = if adj[v].is_empty() { "is not covered" } else { "is disconnected from the depot" };
        return Err(Error::InvalidMultigraph(format!("vertex {v} {why}")));
    }
    Ok(TspTour::from_order(inst, order))
}

/// Hierholzer's algorithm from the depot over the depot's component.
fn circuit(adj: &[Vec<(Vertex, usize)>], nedges: usize) -> Vec<Vertex> {
    let mut used = vec![false; nedges];
    let mut next = vec![0usize; adj.len()];
    let mut stack = vec![DEPOT];
    let mut walk = Vec::with_capacity(nedges + 1);
    while let Some(&u) = stack.last() {
        let list = &adj[u];
        while next[u] < list.len() && used[list[next[u]].1] {
            next[u] += 1;
        }
        if next[u] == list.len() {
            walk.push(u);
            stack.pop();
        } else {
            let (v, id) = list[next[u]];
            used[id] = true;
            stack.push(v);
        }
    }
    walk.reverse();
    walk
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Instance {
        Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![0.1; 3]).unwrap()
    }

    #[test]
    fn single_cycle_is_kept() {
        let inst = square();
        let tour = euler_shortcut(&inst, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(tour.order(), &[0, 1, 2, 3]);
        assert!((tour.cost() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_cycles_through_depot() {
        let inst = square();
        let edges = [(0, 1), (1, 0), (0, 3), (3, 2), (2, 0)];
        let tour = euler_shortcut(&inst, &edges).unwrap();
        assert_eq!(tour.order(), &[0, 1, 2, 3]);
        let sum = 2.0 + 1.0 + 1.0 + 2f64.sqrt();
        assert!(tour.cost() <= sum + 1e-12);
    }

    #[test]
    fn rejects_odd_degree_and_disconnected() {
        let inst = square();
        assert!(euler_shortcut(&inst, &[(0, 1), (1, 2)]).is_err());
        assert!(euler_shortcut(&inst, &[(0, 1), (1, 0), (2, 3), (3, 2)]).is_err());
        assert!(euler_shortcut(&inst, &[(0, 1), (1, 0)]).is_err());
    }
}
