use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shortest depot-rooted Hamiltonian paths over every subset of `k` items.
///
/// `cost(mask, last)` is the cheapest path that starts at the depot, visits
/// exactly the items in `mask` and ends at `last ∈ mask`.
pub struct PathTable<T> {
    k: usize,
    cost: Vec<T>,
    pred: Vec<u8>,
}

const NO_PRED: u8 = u8::MAX;

impl<T: Scalar> PathTable<T> {
    /// `from_depot(i)` and `dist(i, j)` are the distances between items.
    /// Panics if `k > 24`.
    pub fn new(k: usize, from_depot: impl Fn(usize) -> T, dist: impl Fn(usize, usize) -> T) -> Self {
        assert!(k <= 24, "subset table too large");
        let size = 1usize << k;
        let mut cost = vec![T::infinity(); size * k.max(1)];
        let mut pred = vec![NO_PRED; size * k.max(1)];
        for i in 0..k {
            cost[(1 << i) * k + i] = from_depot(i);
        }
        let d: Vec<T> = (0..k * k).map(|x| dist(x / k, x % k)).collect();
        for mask in 1..size {
            for last in 0..k {
                if mask & (1 << last) == 0 {
                    continue;
                }
                let here = cost[mask * k + last];
                if here == T::infinity() {
                    continue;
                }
                for next in 0..k {
                    if mask & (1 << next) != 0 {
                        continue;
                    }
                    let m2 = mask | (1 << next);
                    let c = here + d[last * k + next];
                    if c < cost[m2 * k + next] {
                        cost[m2 * k + next] = c;
                        pred[m2 * k + next] = last as u8;
                    }
                }
            }
        }
        PathTable { k, cost, pred }
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    #[inline]
    pub fn cost(&self, mask: usize, last: usize) -> T {
        self.cost[mask * self.k + last]
    }

    /// Item order of the optimal path for `(mask, last)`.
    pub fn path(&self, mut mask: usize, mut last: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(mask.count_ones() as usize);
        loop {
            out.push(last);
            let p = self.pred[mask * self.k + last];
            mask &= !(1 << last);
            if p == NO_PRED {
                break;
            }
            last = p as usize;
        }
        out.reverse();
        out
    }

    /// Cheapest way to finish the path at an external point: returns the
    /// cost and the last item, minimizing `cost(mask, last) + close(last)`.
    pub fn best_closing(&self, mask: usize, close: impl Fn(usize) -> T) -> (T, Option<usize>) {
        if mask == 0 {
            return (T::zero(), None);
        }
        let mut best = (T::infinity(), None);
        for last in 0..self.k {
            if mask & (1 << last) != 0 {
                let c = self.cost(mask, last) + close(last);
                if c < best.0 {
                    best = (c, Some(last));
                }
            }
        }
        best
    }
}

/// Optimal cycle through the depot and items `0..k`: `(cost, order)`.
pub(crate) fn optimal_cycle<T: Scalar>(
    k: usize,
    limit: usize,
    from_depot: impl Fn(usize) -> T,
    dist: impl Fn(usize, usize) -> T,
) -> Result<(T, Vec<usize>)> {
    if k + 1 > limit {
        return Err(Error::TooLarge { size: k + 1, limit });
    }
    if k == 0 {
        return Ok((T::zero(), Vec::new()));
    }
    let table = PathTable::new(k, &from_depot, dist);
    let full = (1 << k) - 1;
    let (cost, last) = table.best_closing(full, &from_depot);
    Ok((cost, table.path(full, last.expect("nonempty"))))
}
