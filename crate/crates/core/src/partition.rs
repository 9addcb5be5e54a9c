//! Splitting a traveling salesman tour into capacity-feasible depot tours.
//!
//! Customers are numbered `v_1..v_n` in tour order and `P_j` is the prefix
//! demand `d(v_1) + … + d(v_j)`. For an offset `θ ∈ (0, 1)` the designated
//! customers are `j_l = min{ j : P_j ≥ θ + l − 1 }`. The general variant
//! serves each designated customer by its own tour; the unit and splittable
//! variants attach it to the preceding segment instead.

use crate::error::{Error, Result};
use crate::instance::{Instance, Vertex};
use crate::scalar::{cmp, sum, Scalar};
use crate::solution::{Solution, Tour, Variant};
use crate::tsp::TspTour;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionMethod {
    /// Best partition over all distinct offsets `θ`.
    Enumerate,
    /// Dynamic program over consecutive segmentations.
    Dp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult<T: Scalar = f64> {
    pub solution: Solution<T>,
    /// Offset that produced the solution (enumeration only).
    pub theta: Option<T>,
    pub method: PartitionMethod,
}

/// `c(Q) + Σ 4 d(v) c(s, v)` for the general variant and
/// `c(Q) + Σ 2 d(v) c(s, v)` for the unit and splittable variants.
pub fn partition_bound<T: Scalar>(inst: &Instance<T>, tour: &TspTour<T>, variant: Variant) -> T {
    let radial = inst.radial_lower_bound();
    match variant {
        Variant::General => tour.cost() + radial + radial,
        Variant::Unit | Variant::Splittable => tour.cost() + radial,
    }
}

/// One representative offset per interval of `(0, 1)` on which the
/// designated indices do not change: the midpoints between consecutive
/// distinct fractional parts of the prefix demands.
pub fn candidate_thetas<T: Scalar>(inst: &Instance<T>, tour: &TspTour<T>) -> Vec<T> {
    let prefix = prefix_demands(inst, tour.customers());
    let mut breaks: Vec<T> = prefix[1..].iter().map(|p| p.fract()).filter(|f| *f > T::zero()).collect();
    breaks.push(T::zero());
    breaks.push(T::one());
    breaks.sort_by(cmp);
    breaks.dedup();
    let half = T::of(0.5);
    breaks.windows(2).map(|w| (w[0] + w[1]) * half).collect()
}

/// Designated indices (1-based into the tour order) for offset `theta`.
pub fn designated_indices<T: Scalar>(prefix: &[T], theta: T) -> Vec<usize> {
    let mut out = Vec::new();
    let mut threshold = theta;
    for (j, &p) in prefix.iter().enumerate().skip(1) {
        if p >= threshold {
            out.push(j);
            while p >= threshold {
                threshold += T::one();
            }
        }
    }
    out
}

/// Derandomized tour partitioning: tries every candidate offset and returns
/// the cheapest resulting solution.
pub fn partition_tour<T: Scalar>(inst: &Instance<T>, tour: &TspTour<T>, variant: Variant) -> Result<PartitionResult<T>> {
    let seq = tour.customers();
    check_unit(inst, variant)?;
    let prefix = prefix_demands(inst, seq);
    let mut best: Option<(Solution<T>, T)> = None;
    let mut consider = |sol: Solution<T>, theta: T| {
        if best.as_ref().map_or(true, |(b, _)| sol.cost() < b.cost()) {
            best = Some((sol, theta));
        }
    };
    match variant {
        Variant::General => {
            for theta in candidate_thetas(inst, tour) {
                consider(general_partition(inst, seq, &prefix, theta), theta);
            }
        }
        Variant::Unit => {
            let k = unit_capacity(inst);
            for r in 1..=k.min(seq.len()).max(1) {
                let theta = (T::from_usize_lossy(r) - T::of(0.5)) / T::from_usize_lossy(k);
                consider(unit_partition(inst, seq, r, k), theta);
            }
        }
        Variant::Splittable => {
            for theta in candidate_thetas(inst, tour) {
                consider(splittable_partition(inst, seq, &prefix, theta), theta);
            }
        }
    }
    let (solution, theta) = best.unwrap_or((Solution::empty(), T::of(0.5)));
    Ok(PartitionResult { solution, theta: Some(theta), method: PartitionMethod::Enumerate })
}

/// Optimal partition of the tour order by dynamic programming, `O(n²)` for
/// the unsplittable variants.
///
/// General and unit: optimum over all splits of the order into consecutive
/// capacity-feasible segments (a singleton tour is a segment of length one).
/// Splittable: optimum over cut sequences in which every cut lies either at
/// a customer boundary or exactly one unit of demand after the previous cut.
/// Both families contain every partition produced by [`partition_tour`].
pub fn partition_tour_dp<T: Scalar>(inst: &Instance<T>, tour: &TspTour<T>, variant: Variant) -> Result<PartitionResult<T>> {
    let seq = tour.customers();
    check_unit(inst, variant)?;
    let solution = match variant {
        Variant::General => segment_dp(inst, seq, SegmentLimit::Load),
        Variant::Unit => segment_dp(inst, seq, SegmentLimit::Count(unit_capacity(inst))),
        Variant::Splittable => splittable_dp(inst, seq),
    };
    Ok(PartitionResult { solution, theta: None, method: PartitionMethod::Dp })
}

/// The cheaper of [`partition_tour`] and [`partition_tour_dp`] (enumeration on ties).
pub fn best_partition<T: Scalar>(inst: &Instance<T>, tour: &TspTour<T>, variant: Variant) -> Result<PartitionResult<T>> {
    let enumerated = partition_tour(inst, tour, variant)?;
    let dp = partition_tour_dp(inst, tour, variant)?;
    Ok(if dp.solution.cost() < enumerated.solution.cost() { dp } else { enumerated })
}

fn check_unit<T: Scalar>(inst: &Instance<T>, variant: Variant) -> Result<()> {
    if variant == Variant::Unit && !inst.has_uniform_demands() {
        return Err(Error::NonUniformDemands(format!("instance `{}` has distinct customer demands", inst.name())));
    }
    Ok(())
}

/// Customers per tour for identical demands `d`: `⌊1/d⌋`, or all of them when `d = 0`.
pub fn unit_capacity<T: Scalar>(inst: &Instance<T>) -> usize {
    let d = inst.customer_demands().first().copied().unwrap_or(T::zero());
    if d <= T::tolerance() {
        return inst.n().max(1);
    }
    let k = (T::one() / d + T::tolerance()).floor().to_usize().unwrap_or(1).max(1);
    k.min(inst.n().max(1))
}

fn prefix_demands<T: Scalar>(inst: &Instance<T>, seq: &[Vertex]) -> Vec<T> {
    let mut prefix = Vec::with_capacity(seq.len() + 1);
    let mut acc = T::zero();
    prefix.push(acc);
    for &v in seq {
        acc += inst.demand(v);
        prefix.push(acc);
    }
    prefix
}

/// Cost of the depot tour through `seq[a..b]` using precomputed path lengths.
struct SegmentCost<'a, T: Scalar> {
    inst: &'a Instance<T>,
    seq: &'a [Vertex],
    /// `walk[i]` is the length of the tour path `seq[0] → … → seq[i]`.
    walk: Vec<T>,
}

impl<'a, T: Scalar> SegmentCost<'a, T> {
    fn new(inst: &'a Instance<T>, seq: &'a [Vertex]) -> Self {
        let mut walk = Vec::with_capacity(seq.len());
        let mut acc = T::zero();
        for (i, &v) in seq.iter().enumerate() {
            if i > 0 {
                acc += inst.dist(seq[i - 1], v);
            }
            walk.push(acc);
        }
        SegmentCost { inst, seq, walk }
    }

    /// Depot tour over 0-based positions `first..=last`.
    fn cost(&self, first: usize, last: usize) -> T {
        self.inst.depot_dist(self.seq[first]) + (self.walk[last] - self.walk[first]) + self.inst.depot_dist(self.seq[last])
    }
}

fn general_partition<T: Scalar>(inst: &Instance<T>, seq: &[Vertex], prefix: &[T], theta: T) -> Solution<T> {
    let mut tours = Vec::new();
    let mut start = 0;
    for j in designated_indices(prefix, theta) {
        let pos = j - 1;
        if start < pos {
            tours.push(Tour::new(inst, seq[start..pos].to_vec()));
        }
        tours.push(Tour::new(inst, vec![seq[pos]]));
        start = pos + 1;
    }
    if start < seq.len() {
        tours.push(Tour::new(inst, seq[start..].to_vec()));
    }
    Solution::new(tours)
}

fn unit_partition<T: Scalar>(inst: &Instance<T>, seq: &[Vertex], first: usize, k: usize) -> Solution<T> {
    let mut tours = Vec::new();
    let mut start = 0;
    let mut len = first;
    while start < seq.len() {
        let end = (start + len).min(seq.len());
        tours.push(Tour::new(inst, seq[start..end].to_vec()));
        start = end;
        len = k;
    }
    Solution::new(tours)
}

/// A cut on the demand line at `pos`, inside or at the end of the customer
/// at 1-based tour position `last`.
#[derive(Clone, Copy, Debug)]
struct Cut<T> {
    pos: T,
    last: usize,
}

/// First 1-based position `m ≥ from` with `P_m ≥ y`.
fn containing<T: Scalar>(prefix: &[T], y: T, from: usize) -> usize {
    let n = prefix.len() - 1;
    let mut lo = from.max(1);
    let mut hi = n;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if prefix[mid] >= y {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Snaps a cut that falls within tolerance of its customer's end.
fn snap<T: Scalar>(prefix: &[T], cut: Cut<T>) -> Cut<T> {
    if prefix[cut.last] - cut.pos <= T::tolerance() {
        Cut { pos: prefix[cut.last], last: cut.last }
    } else {
        cut
    }
}

/// 1-based position of the first customer after `cut`.
fn first_after<T: Scalar>(prefix: &[T], cut: Cut<T>) -> usize {
    if prefix[cut.last] > cut.pos {
        cut.last
    } else {
        cut.last + 1
    }
}

/// Tours between consecutive cuts; the last cut must be `(P_n, n)`.
fn split_tours<T: Scalar>(inst: &Instance<T>, seq: &[Vertex], prefix: &[T], cuts: &[Cut<T>]) -> Solution<T> {
    let mut tours = Vec::with_capacity(cuts.len());
    let mut prev = Cut { pos: T::zero(), last: 0 };
    for &cut in cuts {
        let first = first_after(prefix, prev);
        if first <= cut.last {
            let stops = seq[first - 1..cut.last].to_vec();
            let deliveries = (first..=cut.last).map(|m| prefix[m].min(cut.pos) - prefix[m - 1].max(prev.pos)).collect();
            tours.push(Tour::with_deliveries(inst, stops, deliveries));
        }
        prev = cut;
    }
    Solution::new(tours)
}

fn splittable_partition<T: Scalar>(inst: &Instance<T>, seq: &[Vertex], prefix: &[T], theta: T) -> Solution<T> {
    let n = seq.len();
    if n == 0 {
        return Solution::empty();
    }
    let mut cuts = Vec::new();
    let mut prev = T::zero();
    for j in designated_indices(prefix, theta) {
        let full = prev + T::one();
        let cut = if prefix[j] <= full { Cut { pos: prefix[j], last: j } } else { snap(prefix, Cut { pos: full, last: j }) };
        prev = cut.pos;
        cuts.push(cut);
    }
    if cuts.last().map_or(true, |c| c.last < n || c.pos < prefix[n]) {
        cuts.push(Cut { pos: prefix[n], last: n });
    }
    split_tours(inst, seq, prefix, &cuts)
}

enum SegmentLimit {
    Load,
    Count(usize),
}

fn segment_dp<T: Scalar>(inst: &Instance<T>, seq: &[Vertex], limit: SegmentLimit) -> Solution<T> {
    let n = seq.len();
    if n == 0 {
        return Solution::empty();
    }
    let costs = SegmentCost::new(inst, seq);
    let cap = T::one() + T::tolerance();
    // best[j]: cheapest partition of seq[..j]; from[j]: start of its last segment.
    let mut best = vec![T::infinity(); n + 1];
    let mut from = vec![0usize; n + 1];
    best[0] = T::zero();
    for j in 1..=n {
        let mut load = T::zero();
        for i in (0..j).rev() {
            load += inst.demand(seq[i]);
            let fits = match limit {
                SegmentLimit::Load => load <= cap,
                SegmentLimit::Count(k) => j - i <= k,
            };
            if !fits {
                break;
            }
            let c = best[i] + costs.cost(i, j - 1);
            if c < best[j] {
                best[j] = c;
                from[j] = i;
            }
        }
    }
    let mut tours = Vec::new();
    let mut j = n;
    while j > 0 {
        let i = from[j];
        tours.push(Tour::new(inst, seq[i..j].to_vec()));
        j = i;
    }
    tours.reverse();
    Solution::new(tours)
}

fn splittable_dp<T: Scalar>(inst: &Instance<T>, seq: &[Vertex]) -> Solution<T> {
    let n = seq.len();
    if n == 0 {
        return Solution::empty();
    }
    let prefix = prefix_demands(inst, seq);
    let total = prefix[n];
    let costs = SegmentCost::new(inst, seq);
    let cap = T::one() + T::tolerance();
    // Clean states are boundaries j (cut at P_j after customer j). From each,
    // a chain of full unit steps, then a clean cut to some later boundary.
    let mut best = vec![T::infinity(); n + 1];
    let mut back: Vec<(usize, usize)> = vec![(0, 0); n + 1];
    best[0] = T::zero();
    for i in 0..n {
        if best[i] == T::infinity() {
            continue;
        }
        let mut cut = Cut { pos: prefix[i], last: i };
        let mut acc = best[i];
        let mut steps = 0;
        loop {
            let first = first_after(&prefix, cut);
            let mut j = first.max(i + 1);
            while j <= n && prefix[j] - cut.pos <= cap {
                let c = acc + costs.cost(first - 1, j - 1);
                if c < best[j] {
                    best[j] = c;
                    back[j] = (i, steps);
                }
                j += 1;
            }
            if cut.pos + T::one() >= total {
                break;
            }
            let pos = cut.pos + T::one();
            let next = snap(&prefix, Cut { pos, last: containing(&prefix, pos, first) });
            acc += costs.cost(first - 1, next.last - 1);
            cut = next;
            steps += 1;
        }
    }
    // Replay the chosen chains to recover the cut sequence.
    let mut chain = Vec::new();
    let mut j = n;
    while j > 0 {
        chain.push((back[j].0, back[j].1, j));
        j = back[j].0;
    }
    chain.reverse();
    let mut cuts = Vec::new();
    for (i, steps, j) in chain {
        let mut cut = Cut { pos: prefix[i], last: i };
        for _ in 0..steps {
            let first = first_after(&prefix, cut);
            let pos = cut.pos + T::one();
            cut = snap(&prefix, Cut { pos, last: containing(&prefix, pos, first) });
            cuts.push(cut);
        }
        cuts.push(Cut { pos: prefix[j], last: j });
    }
    split_tours(inst, seq, &prefix, &cuts)
}

/// Total of `2 d(v) c(s, v)` over the designated customers for offset `theta`
/// (the per-offset charge in the bound), exposed for analysis.
pub fn designated_charge<T: Scalar>(inst: &Instance<T>, tour: &TspTour<T>, theta: T) -> T {
    let seq = tour.customers();
    let prefix = prefix_demands(inst, seq);
    let two = T::of(2.0);
    sum(designated_indices(&prefix, theta).into_iter().map(|j| two * inst.depot_dist(seq[j - 1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify_solution;

    fn line(xs: &[f64], d: &[f64]) -> (Instance, TspTour) {
        let inst = Instance::euclidean([0.0, 0.0], xs.iter().map(|&x| [x, 0.0]).collect(), d.to_vec()).unwrap();
        let order = (0..=xs.len()).collect();
        let tour = TspTour::from_order(&inst, order);
        (inst, tour)
    }

    #[test]
    fn zero_demands_single_candidate() {
        let (inst, tour) = line(&[1.0, 2.0], &[0.0, 0.0]);
        assert_eq!(candidate_thetas(&inst, &tour), vec![0.5]);
        let r = partition_tour(&inst, &tour, Variant::General).unwrap();
        assert_eq!(r.solution.len(), 1);
    }

    #[test]
    fn breakpoints_of_two_heavy_customers() {
        let (inst, tour) = line(&[1.0, 2.0], &[0.6, 0.6]);
        let thetas = candidate_thetas(&inst, &tour);
        // prefix sums 0.6 and 1.2 give breakpoints 0.2 and 0.6
        assert_eq!(thetas.len(), 3);
        assert!((thetas[0] - 0.1).abs() < 1e-12 && (thetas[1] - 0.4).abs() < 1e-12 && (thetas[2] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn heavy_pair_needs_two_tours() {
        let (inst, tour) = line(&[1.0, 2.0], &[0.6, 0.6]);
        for variant in [Variant::General, Variant::Splittable] {
            let r = partition_tour(&inst, &tour, variant).unwrap();
            assert!(verify_solution(&inst, &r.solution, variant).is_feasible());
            assert!(r.solution.cost() <= partition_bound(&inst, &tour, variant) + 1e-12);
        }
        let general = partition_tour(&inst, &tour, Variant::General).unwrap();
        assert_eq!(general.solution.len(), 2);
        assert!((general.solution.cost() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unit_demands_all_one() {
        let (inst, tour) = line(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]);
        let r = partition_tour_dp(&inst, &tour, Variant::Unit).unwrap();
        assert_eq!(r.solution.len(), 3);
        assert!((r.solution.cost() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn unit_variant_rejects_distinct_demands() {
        let (inst, tour) = line(&[1.0, 2.0], &[0.5, 0.25]);
        assert!(matches!(partition_tour(&inst, &tour, Variant::Unit), Err(Error::NonUniformDemands(_))));
        assert!(matches!(partition_tour_dp(&inst, &tour, Variant::Unit), Err(Error::NonUniformDemands(_))));
    }

    #[test]
    fn small_total_demand_gives_single_tour() {
        let (inst, tour) = line(&[1.0, 2.0, 3.0], &[0.2, 0.3, 0.4]);
        let r = partition_tour_dp(&inst, &tour, Variant::General).unwrap();
        assert_eq!(r.solution.len(), 1);
        assert!((r.solution.cost() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn splittable_fills_residual_capacity() {
        let (inst, tour) = line(&[1.0, 1.0, 1.0], &[0.7, 0.7, 0.6]);
        let r = partition_tour_dp(&inst, &tour, Variant::Splittable).unwrap();
        assert!(verify_solution(&inst, &r.solution, Variant::Splittable).is_feasible());
        // total demand 2 at distance 1 needs exactly two round trips
        assert!((r.solution.cost() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dp_never_worse_than_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(1..12);
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
            let d: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let inst = Instance::euclidean([0.0, 0.0], pts, d).unwrap();
            let mut order: Vec<usize> = (1..=n).collect();
            order.sort_by_key(|_| rng.gen::<u32>());
            order.insert(0, 0);
            let tour = TspTour::from_order(&inst, order);
            for variant in [Variant::General, Variant::Splittable] {
                let e = partition_tour(&inst, &tour, variant).unwrap();
                let p = partition_tour_dp(&inst, &tour, variant).unwrap();
                assert!(p.solution.cost() <= e.solution.cost() + 1e-9);
                assert!(verify_solution(&inst, &e.solution, variant).is_feasible());
                assert!(verify_solution(&inst, &p.solution, variant).is_feasible());
            }
        }
    }
}
