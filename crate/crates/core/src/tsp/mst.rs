use crate::scalar::Scalar;

/// Prim's algorithm on a dense graph over `0..n`, `O(n²)`.
///
/// `cost(u, v)` returns `None` for missing edges. Returns the tree edges as
/// `(parent, child)` in the order they are added; a disconnected graph yields
/// a spanning forest with one root per component (lowest index first).
pub fn prim<T: Scalar>(n: usize, cost: impl Fn(usize, usize) -> Option<T>) -> Vec<(usize, usize)> {
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<(T, usize)>> = vec![None; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for root in 0..n {
        if in_tree[root] {
            continue;
        }
        let mut next = Some(root);
        while let Some(u) = next {
            in_tree[u] = true;
            if let Some((_, p)) = best[u] {
                edges.push((p, u));
            }
            next = None;
            let mut next_cost = T::infinity();
            for v in 0..n {
                if in_tree[v] {
                    continue;
                }
                if let Some(c) = cost(u, v) {
                    if best[v].map_or(true, |(b, _)| c < b) {
                        best[v] = Some((c, u));
                    }
                }
                if let Some((b, _)) = best[v] {
                    if b < next_cost {
                        next_cost = b;
                        next = Some(v);
                    }
                }
            }
        }
    }
    edges
}
