//! Balas-Simonetti dynamic program over a depot-anchored route.
//!
//! Positions `0..N` index the sequence `[depot, v1, .., vm]`. A reordering is
//! allowed when the depot stays first and every pair of positions `i < j` with
//! `j - i > k` keeps its relative order. So no vertex moves by more than `k`
//! positions; `k = 0` gives the identity and `k >= m - 1` gives every order
//! of the customers.
//!
//! States are `(a, mask, last)`: `a` is the lowest position not yet emitted,
//! `mask` marks which of `a+1..=a+k` are emitted and `last` is the most recent
//! emitted position. The number of states per layer depends only on `k`.

use thiserror::Error;

use crate::instance_io::DistanceMatrix;
use crate::model::{Cost, Tour};

/// Default bound on the number of improving passes in [`bs_fixed_point`].
pub const DEFAULT_MAX_PASSES: usize = 10_000;

const INF: Cost = Cost::MAX / 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BsError {
    #[error("fixed point not reached after {passes} passes (last cost {cost})")]
    PassLimit { passes: usize, cost: Cost },
}

/// Result of iterating passes to a fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsOutcome {
    pub tour: Tour,
    /// Number of DP passes executed, including the final non-improving one.
    pub passes: usize,
}

/// Layered state space for one route length and one `k`.
#[derive(Debug, Clone, Copy)]
pub struct BsLayeredGraph {
    positions: usize,
    k: usize,
}

impl BsLayeredGraph {
    /// `customers` is the route length `m`; `k` is capped at `m - 1`.
    pub fn new(customers: usize, k: usize) -> Self {
        BsLayeredGraph {
            positions: customers + 1,
            k: k.min(customers.saturating_sub(1)),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn width(&self) -> usize {
        2 * self.k + 2
    }

    fn num_states(&self) -> usize {
        self.positions * (1usize << self.k) * self.width()
    }

    #[inline]
    fn index(&self, a: usize, mask: usize, last: usize) -> usize {
        let off = last + self.k + 1 - a;
        (a * (1usize << self.k) + mask) * self.width() + off
    }

    fn mask_valid(&self, a: usize, mask: usize) -> bool {
        // Bits may only refer to existing positions.
        let avail = self.positions - 1 - a;
        avail >= self.k || mask >> avail == 0
    }

    fn last_valid(&self, a: usize, mask: usize, last: usize) -> bool {
        if last < a {
            last + self.k + 1 >= a
        } else if last > a {
            last - a <= self.k && mask >> (last - a - 1) & 1 == 1
        } else {
            false
        }
    }

    /// Number of states per layer, indexed by the emitted prefix length `t - 1`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let n = self.positions;
        let mut sizes = vec![0usize; n];
        for a in 1..n {
            for mask in 0..1usize << self.k {
                if !self.mask_valid(a, mask) {
                    continue;
                }
                let t = a + mask.count_ones() as usize;
                for last in a.saturating_sub(self.k + 1)..=(a + self.k).min(n - 1) {
                    if self.last_valid(a, mask, last) {
                        sizes[t - 1] += 1;
                    }
                }
            }
        }
        sizes
    }

    /// Candidate positions emitted next from `(a, mask)`, in increasing order.
    #[inline]
    fn candidates(&self, a: usize, mask: usize) -> impl Iterator<Item = usize> + '_ {
        let hi = (a + self.k).min(self.positions - 1);
        (a..=hi).filter(move |&e| e == a || mask >> (e - a - 1) & 1 == 0)
    }

    #[inline]
    fn advance(&self, a: usize, mask: usize, e: usize) -> (usize, usize) {
        if e == a {
            let tz = (!mask).trailing_zeros() as usize;
            (a + 1 + tz, mask >> (tz + 1))
        } else {
            (a, mask | 1 << (e - a - 1))
        }
    }

    /// Best reordering of `seq = [depot, v1, .., vm]`; ties go to the
    /// lexicographically smallest emission order.
    fn solve(&self, seq: &[usize], dm: &DistanceMatrix) -> Vec<usize> {
        let n = self.positions;
        debug_assert_eq!(seq.len(), n);
        let mut val = vec![INF; self.num_states()];
        for a in (1..n).rev() {
            for mask in (0..1usize << self.k).rev() {
                if !self.mask_valid(a, mask) {
                    continue;
                }
                for last in a.saturating_sub(self.k + 1)..=(a + self.k).min(n - 1) {
                    if !self.last_valid(a, mask, last) {
                        continue;
                    }
                    let mut best = INF;
                    for e in self.candidates(a, mask) {
                        let (na, nmask) = self.advance(a, mask, e);
                        let step = dm.get(seq[last], seq[e]);
                        let rest = if na >= n {
                            dm.get(seq[e], seq[0])
                        } else {
                            val[self.index(na, nmask, e)]
                        };
                        best = best.min(step + rest);
                    }
                    val[self.index(a, mask, last)] = best;
                }
            }
        }

        let mut order = Vec::with_capacity(n - 1);
        let (mut a, mut mask, mut last) = (1usize, 0usize, 0usize);
        while a < n {
            let target = val[self.index(a, mask, last)];
            let mut chosen = None;
            for e in self.candidates(a, mask) {
                let (na, nmask) = self.advance(a, mask, e);
                let step = dm.get(seq[last], seq[e]);
                let rest = if na >= n {
                    dm.get(seq[e], seq[0])
                } else {
                    val[self.index(na, nmask, e)]
                };
                if step + rest == target {
                    chosen = Some((e, na, nmask));
                    break;
                }
            }
            let (e, na, nmask) = chosen.expect("dynamic program lost its optimal path");
            order.push(seq[e]);
            a = na;
            mask = nmask;
            last = e;
        }
        order
    }
}

/// One exact optimization over the k-neighborhood of `visits`.
pub fn bs_pass(visits: &[usize], k: usize, dm: &DistanceMatrix) -> Tour {
    if visits.len() <= 1 || k == 0 {
        return Tour::new(visits.to_vec(), dm);
    }
    let mut seq = Vec::with_capacity(visits.len() + 1);
    seq.push(0);
    seq.extend_from_slice(visits);
    let order = BsLayeredGraph::new(visits.len(), k).solve(&seq, dm);
    Tour::new(order, dm)
}

/// Repeats [`bs_pass`] while it strictly improves the cost.
pub fn bs_fixed_point(visits: &[usize], k: usize, dm: &DistanceMatrix, max_passes: usize) -> Result<BsOutcome, BsError> {
    let mut cur = Tour::new(visits.to_vec(), dm);
    let mut passes = 0;
    loop {
        if passes >= max_passes {
            return Err(BsError::PassLimit { passes, cost: cur.cost });
        }
        let next = bs_pass(&cur.visits, k, dm);
        passes += 1;
        if next.cost < cur.cost {
            cur = next;
        } else {
            return Ok(BsOutcome { tour: cur, passes });
        }
    }
}

/// Exhaustive search over every order allowed by the pairwise precedence rule.
///
/// Orders are enumerated lexicographically by original position, so the first
/// minimum found is the lexicographically smallest one. Intended for `m <= 9`.
pub fn bs_brute_oracle(visits: &[usize], k: usize, dm: &DistanceMatrix) -> Tour {
    let m = visits.len();
    let mut best: Option<(Cost, Vec<usize>)> = None;
    let mut perm = Vec::with_capacity(m);
    let mut used = vec![false; m];

    fn allowed(used: &[bool], e: usize, k: usize) -> bool {
        // Every position more than k before e must already be placed.
        (0..e).all(|i| used[i] || e - i <= k)
    }

    fn rec(
        visits: &[usize],
        k: usize,
        dm: &DistanceMatrix,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<(Cost, Vec<usize>)>,
    ) {
        let m = visits.len();
        if perm.len() == m {
            let order: Vec<usize> = perm.iter().map(|&p| visits[p]).collect();
            let c = dm.tour_cost(&order);
            if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                *best = Some((c, order));
            }
            return;
        }
        for e in 0..m {
            if used[e] || !allowed(used, e, k) {
                continue;
            }
            used[e] = true;
            perm.push(e);
            rec(visits, k, dm, perm, used, best);
            perm.pop();
            used[e] = false;
        }
    }

    rec(visits, k, dm, &mut perm, &mut used, &mut best);
    let (cost, order) = best.unwrap_or((dm.tour_cost(&[]), Vec::new()));
    Tour { visits: order, cost }
}

/// Checks the pairwise precedence rule for a reordering of `original`.
pub fn respects_window(original: &[usize], reordered: &[usize], k: usize) -> bool {
    let pos = |v: usize| original.iter().position(|&x| x == v);
    let new_pos: Vec<Option<usize>> = reordered.iter().map(|&v| pos(v)).collect();
    if new_pos.iter().any(|p| p.is_none()) || reordered.len() != original.len() {
        return false;
    }
    let p: Vec<usize> = new_pos.into_iter().map(Option::unwrap).collect();
    // p[t] is the original index of the vertex emitted at step t.
    for s in 0..p.len() {
        for t in s + 1..p.len() {
            if p[s] > p[t] + k {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asym(nv: usize, seed: u64) -> DistanceMatrix {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut rows = vec![vec![0; nv]; nv];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if i != j {
                    *c = ((x >> 33) % 50) as Cost + 1;
                }
            }
        }
        DistanceMatrix::from_rows(&rows)
    }

    #[test]
    fn k0_is_identity() {
        let dm = asym(6, 1);
        let t = bs_pass(&[3, 1, 5, 2, 4], 0, &dm);
        assert_eq!(t.visits, vec![3, 1, 5, 2, 4]);
    }

    #[test]
    fn k1_swaps_adjacent_pairs_only() {
        let dm = asym(7, 3);
        let visits = [1, 2, 3, 4, 5, 6];
        let t = bs_pass(&visits, 1, &dm);
        assert!(respects_window(&visits, &t.visits, 1));
        assert_eq!(t, bs_brute_oracle(&visits, 1, &dm));
    }

    #[test]
    fn matches_oracle_on_small_cases() {
        for seed in 0..40 {
            let dm = asym(9, seed);
            let visits: Vec<usize> = (1..9).collect();
            for k in 1..=4 {
                let t = bs_pass(&visits, k, &dm);
                let o = bs_brute_oracle(&visits, k, &dm);
                assert_eq!(t, o, "seed {seed} k {k}");
            }
        }
    }

    #[test]
    fn large_k_reaches_all_orders() {
        let dm = asym(6, 9);
        let visits = [5, 4, 3, 2, 1];
        let t = bs_pass(&visits, 4, &dm);
        let full = bs_brute_oracle(&visits, 10, &dm);
        assert_eq!(t.cost, full.cost);
    }

    #[test]
    fn fixed_point_is_stable() {
        let dm = asym(10, 5);
        let visits: Vec<usize> = (1..10).rev().collect();
        let out = bs_fixed_point(&visits, 2, &dm, DEFAULT_MAX_PASSES).unwrap();
        assert_eq!(bs_pass(&out.tour.visits, 2, &dm).visits, out.tour.visits);
        assert!(out.passes >= 1);
        assert!(matches!(
            bs_fixed_point(&visits, 2, &dm, 0),
            Err(BsError::PassLimit { .. })
        ));
    }

    #[test]
    fn layer_size_does_not_grow_with_length() {
        for k in 1..=4 {
            let short = BsLayeredGraph::new(30, k).layer_sizes().into_iter().max().unwrap();
            let long = BsLayeredGraph::new(300, k).layer_sizes().into_iter().max().unwrap();
            assert_eq!(short, long, "k {k}");
        }
    }
}
