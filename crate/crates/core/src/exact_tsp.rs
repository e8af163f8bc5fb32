//! Exact route optimization by the Held-Karp subset dynamic program.

use std::ops::Add;

use thiserror::Error;

use crate::instance_io::DistanceMatrix;
use crate::model::{Cost, Tour};

/// Default largest route size solved exactly.
pub const DEFAULT_MAX_EXACT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("route has {size} customers, above the exact limit of {max}")]
    RouteTooLarge { size: usize, max: usize },
}

/// Optimal visiting order of `customers` starting and ending at the depot.
///
/// The input order is ignored: the result depends only on the customer set.
pub fn solve_exact(customers: &[usize], dm: &DistanceMatrix, max_exact: usize) -> Result<Tour, ExactError> {
    let m = customers.len();
    if m > max_exact {
        return Err(ExactError::RouteTooLarge { size: m, max: max_exact });
    }
    let mut sorted = customers.to_vec();
    sorted.sort_unstable();
    let customers = &sorted[..];
    if m <= 2 {
        let fwd = Tour::new(customers.to_vec(), dm);
        if m == 2 {
            let rev = Tour::new(vec![customers[1], customers[0]], dm);
            if rev.cost < fwd.cost {
                return Ok(rev);
            }
        }
        return Ok(fwd);
    }
    let max_edge = (0..=m)
        .flat_map(|i| (0..=m).map(move |j| (i, j)))
        .map(|(i, j)| dm.get(vertex(customers, i), vertex(customers, j)))
        .max()
        .unwrap_or(0);
    let bound = max_edge.saturating_mul(m as Cost + 2);
    let order = if bound < u16::MAX as Cost / 2 {
        held_karp::<u16>(customers, dm)
    } else if bound < u32::MAX as Cost / 2 {
        held_karp::<u32>(customers, dm)
    } else {
        held_karp::<i64>(customers, dm)
    };
    Ok(Tour::new(order, dm))
}

#[inline]
fn vertex(customers: &[usize], i: usize) -> usize {
    if i == 0 {
        0
    } else {
        customers[i - 1]
    }
}

trait DpCost: Copy + Ord + Add<Output = Self> {
    const INF: Self;
    fn from_cost(c: Cost) -> Self;
}

impl DpCost for u16 {
    const INF: u16 = u16::MAX / 2;
    fn from_cost(c: Cost) -> Self {
        c as u16
    }
}

impl DpCost for u32 {
    const INF: u32 = u32::MAX / 2;
    fn from_cost(c: Cost) -> Self {
        c as u32
    }
}

impl DpCost for i64 {
    const INF: i64 = i64::MAX / 4;
    fn from_cost(c: Cost) -> Self {
        c
    }
}

fn held_karp<T: DpCost>(customers: &[usize], dm: &DistanceMatrix) -> Vec<usize> {
    let m = customers.len();
    let local: Vec<T> = (0..m * m)
        .map(|x| T::from_cost(dm.get(customers[x / m], customers[x % m])))
        .collect();
    let d = |i: usize, j: usize| local[i * m + j];
    let from_depot = |j: usize| T::from_cost(dm.get(0, customers[j]));
    let to_depot = |j: usize| T::from_cost(dm.get(customers[j], 0));
    let full = (1usize << m) - 1;
    // dp[mask * m + j]: cheapest path from the depot through `mask`, ending at j.
    let mut dp = vec![T::INF; (full + 1) * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = from_depot(j);
    }
    for mask in 1..=full {
        let rest_all = full & !mask;
        if rest_all == 0 {
            continue;
        }
        let mut js = mask;
        while js != 0 {
            let j = js.trailing_zeros() as usize;
            js &= js - 1;
            let cur = dp[mask * m + j];
            if cur == T::INF {
                continue;
            }
            let row = &local[j * m..(j + 1) * m];
            let mut rest = rest_all;
            while rest != 0 {
                let nxt = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let cand = cur + row[nxt];
                let slot = &mut dp[(mask | 1 << nxt) * m + nxt];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }

    let mut last = 0;
    let mut best = T::INF;
    for j in 0..m {
        let c = dp[full * m + j] + to_depot(j);
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut order = vec![customers[last]];
    let mut mask = full;
    let mut target = dp[full * m + last];
    while mask.count_ones() > 1 {
        let prev_mask = mask & !(1 << last);
        let prev = (0..m)
            .find(|&i| prev_mask >> i & 1 == 1 && dp[prev_mask * m + i] + d(i, last) == target)
            .expect("Held-Karp backtrack failed");
        order.push(customers[prev]);
        target = dp[prev_mask * m + prev];
        mask = prev_mask;
        last = prev;
    }
    order.reverse();
    order
}
